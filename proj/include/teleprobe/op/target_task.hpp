#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "teleprobe/net/clock.hpp"
#include "teleprobe/op/client.hpp"
#include "teleprobe/op/profile.hpp"
#include "teleprobe/op/script.hpp"
#include "teleprobe/stats/segment.hpp"

namespace teleprobe::op {

struct TaskOptions {
    std::int64_t settle_window_ms = 1000;
    std::int64_t settle_edge_ms = 200;      // averaging span at each end of the window
    double settle_band_deg = 0.05;
    std::int64_t segment_timeout_ms = 60000;
    std::int64_t telemetry_silence_ms = 3000;
    double initial_speed_deg_s = 10.0;
    double min_speed_deg_s = 1.0;       // slower than this reads as "not moving"
    double motion_deg = 0.1;            // smallest change read as "it moved"
    std::int64_t min_tap_ms = 20;
    double max_tap_scale = 1.0;         // dead taps grow up to twice the nominal length
};

/// A press or release as planned by the operator.
struct OperatorAction {
    net::Micros stimulus_us = 0;  // decision that caused it
    net::Micros exec_us = 0;      // when it went on the wire
    int dir = 0;                  // 0 = release
};

/// Runs one target script against a connected OperatorClient with a
/// latency-limited bang-bang policy and produces one SegmentRecord per target.
///
/// While off, the operator presses toward the target if the error exceeds
/// stop threshold + anticipation. While on, they release once the error
/// predicted over their own reaction delay falls inside that band or changes
/// sign. Nothing moves during a deadband traversal, so the prediction only
/// starts leading once motion is seen. Errors too small for a held press to
/// be stopped in time are closed with taps sized from the typical speed; taps
/// that move nothing (deadband) are lengthened, at most to twice nominal.
class TargetTaskRunner {
public:
    /// Ground-truth count of in-deadband reversals applied in [from, to).
    using ReversalCounter = std::function<int(net::Micros from, net::Micros to)>;

    TargetTaskRunner(net::Clock& clock, OperatorClient& client, OperatorProfile profile, TargetScript script,
                     std::uint64_t seed, TaskOptions opts = {})
        : clock_(clock),
          client_(client),
          profile_(std::move(profile)),
          script_(std::move(script)),
          opts_(opts),
          rng_(seed),
          v_est_(opts.initial_speed_deg_s) {
        profile_.validate();
        if (!probe::is_steering(script_.axis)) throw config_error("target task needs a steering axis");
    }
    TargetTaskRunner(const TargetTaskRunner&) = delete;
    TargetTaskRunner& operator=(const TargetTaskRunner&) = delete;
    ~TargetTaskRunner() { cancel_all(); }

    void set_reversal_counter(ReversalCounter fn) { reversal_counter_ = std::move(fn); }
    /// Called with each finished record.
    void on_segment(std::function<void(const stats::SegmentRecord&)> fn) { on_segment_ = std::move(fn); }

    void start() {
        client_.on_imu([this](const protocol::Imu& imu) { on_imu(imu); });
        started_us_ = clock_.now_us();
        schedule_decision();
    }

    bool done() const noexcept { return done_; }
    bool aborted() const noexcept { return aborted_; }
    const std::vector<stats::SegmentRecord>& records() const noexcept { return records_; }
    const std::vector<OperatorAction>& actions() const noexcept { return actions_; }

private:
    double angle_of(const protocol::Imu& imu) const {
        return script_.axis == probe::AxisId::SteerLR ? imu.yaw_deg : imu.pitch_deg;
    }
    double target() const { return script_.targets_deg[index_]; }

    void on_imu(const protocol::Imu& imu) {
        const double a = angle_of(imu);
        const auto now = clock_.now_us();
        if (have_angle_ && now > last_angle_us_) {
            imu_interval_s_ = 0.9 * imu_interval_s_ + 0.1 * (static_cast<double>(now - last_angle_us_) / 1e6);
        }
        if (have_angle_ && sent_dir_ != 0 && now > last_angle_us_) {
            const double v = sent_dir_ * (a - last_angle_) / (static_cast<double>(now - last_angle_us_) / 1e6);
            v_recent_ = std::max(0.0, 0.5 * v_recent_ + 0.5 * v);
            if (v_recent_ > opts_.min_speed_deg_s) v_est_ = 0.9 * v_est_ + 0.1 * v_recent_;
        }
        last_angle_ = a;
        last_angle_us_ = now;
        have_angle_ = true;
        if (segment_open_) {
            trace_.push_back({clock_.now_ms(), a, sent_dir_, sent_dir_ != 0});
        }
    }

    void schedule_decision() {
        decision_timer_ = clock_.call_after(net::ms_to_us(static_cast<double>(profile_.decision_period_ms)),
                                            [this] { decide(); });
    }

    void decide() {
        if (done_) return;
        schedule_decision();
        const auto now = clock_.now_us();
        const auto last_rx = client_.last_imu_rx_us().value_or(started_us_);
        if (now - last_rx > net::ms_to_us(static_cast<double>(opts_.telemetry_silence_ms))) {
            abort_run();
            return;
        }
        if (!have_angle_) return;
        if (!segment_open_) open_segment(now);
        if (try_settle(now)) return;
        if (now - segment_start_us_ > net::ms_to_us(static_cast<double>(opts_.segment_timeout_ms))) {
            close_segment(now, true);
            return;
        }
        if (now < observe_until_us_ || !pending_.empty()) return;
        if (profile_.fumble_prob > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < profile_.fumble_prob) {
            return;
        }
        policy(now);
    }

    /// Expected lag from a decision to its effect being seen: mean reaction,
    /// half a decision period, the link round trip and half a telemetry interval.
    double loop_delay_s() const {
        const auto& rtt = client_.link_stats().rtt_ms;
        const double rtt_s = rtt.empty() ? 0.0 : rtt.back() / 1000.0;
        return (static_cast<double>(profile_.reaction_ms) + static_cast<double>(profile_.reaction_jitter_ms) / 2.0) / 1000.0 +
               static_cast<double>(profile_.decision_period_ms) / 2000.0 + rtt_s + imu_interval_s_ / 2.0;
    }

    void policy(net::Micros now) {
        const double lead = profile_.stop_threshold_deg + profile_.anticipation_deg;
        if (sent_dir_ != 0) {
            // Where the tip will be once a release takes effect, judged from
            // the motion seen since the press (none while in a deadband).
            const double predicted = last_angle_ + sent_dir_ * v_recent_ * loop_delay_s();
            const double e = target() - predicted;
            if ((e > 0.0 ? 1 : -1) != sent_dir_ || std::fabs(e) <= lead) {
                const auto at = plan(now, 0);
                observe_until_us_ = at + net::ms_to_us(static_cast<double>(profile_.reaction_ms));
            }
            return;
        }
        const double e = target() - last_angle_;
        const double ae = std::fabs(e);
        const int d = e > 0.0 ? 1 : -1;
        if (ae <= lead) return;
        // Too close for a hold to be released in time: tap instead.
        if (ae <= lead + v_est_ * loop_delay_s()) {
            const bool dead = tap_dir_ == d && std::fabs(last_angle_ - tap_angle_) <= opts_.motion_deg;
            tap_scale_ = dead ? std::min(tap_scale_ * 1.5, opts_.max_tap_scale) : 1.0;
            const auto tap_ms = std::max<std::int64_t>(opts_.min_tap_ms,
                                                       static_cast<std::int64_t>(ae / v_est_ * 1000.0 * tap_scale_));
            tap_dir_ = d;
            tap_angle_ = last_angle_;
            const auto on_at = plan(now, d);
            const auto off_at = on_at + net::ms_to_us(static_cast<double>(tap_ms));
            schedule_action(now, off_at, 0);
            observe_until_us_ = off_at + net::ms_to_us(static_cast<double>(profile_.reaction_ms));
            return;
        }
        tap_dir_ = 0;
        plan(now, d);
    }

    /// Schedules `dir` one reaction time after the stimulus; returns its time.
    net::Micros plan(net::Micros stimulus, int dir) {
        auto delay = static_cast<double>(profile_.reaction_ms);
        if (profile_.reaction_jitter_ms > 0) {
            delay += std::uniform_real_distribution<double>(0.0, static_cast<double>(profile_.reaction_jitter_ms))(rng_);
        }
        const auto at = std::max(stimulus + net::ms_to_us(delay), last_action_us_);
        schedule_action(stimulus, at, dir);
        return at;
    }

    void schedule_action(net::Micros stimulus, net::Micros at, int dir) {
        last_action_us_ = std::max(last_action_us_, at);
        const auto id = clock_.call_at(at, [this, stimulus, dir] { execute(stimulus, dir); });
        pending_.push_back(id);
    }

    void execute(net::Micros stimulus, int dir) {
        if (!pending_.empty()) pending_.erase(pending_.begin());
        if (done_) return;
        if (dir == sent_dir_) return;
        if (sent_dir_ != 0 && dir != 0) client_.send_cmd(script_.axis, sent_dir_, false);
        client_.send_cmd(script_.axis, dir == 0 ? sent_dir_ : dir, dir != 0);
        actions_.push_back({stimulus, clock_.now_us(), dir});
        sent_dir_ = dir;
        v_recent_ = 0.0;
        if (dir == 0) quiet_since_us_ = clock_.now_us();
    }

    void open_segment(net::Micros now) {
        segment_open_ = true;
        segment_start_us_ = now;
        quiet_since_us_ = now;
        tap_dir_ = 0;
        trace_.clear();
        trace_.push_back({clock_.now_ms(), last_angle_, sent_dir_, sent_dir_ != 0});
    }

    bool try_settle(net::Micros now) {
        if (sent_dir_ != 0 || !pending_.empty()) return false;
        const auto window = net::ms_to_us(static_cast<double>(opts_.settle_window_ms));
        if (now - quiet_since_us_ < window) return false;
        const std::int64_t now_ms = now / 1000;
        const std::int64_t w0 = now_ms - opts_.settle_window_ms;
        double head = 0.0, tail = 0.0;
        int nh = 0, nt = 0;
        for (auto it = trace_.rbegin(); it != trace_.rend() && it->ts_ms >= w0; ++it) {
            if (it->ts_ms >= now_ms - opts_.settle_edge_ms) {
                tail += it->angle_deg;
                ++nt;
            }
            if (it->ts_ms < w0 + opts_.settle_edge_ms) {
                head += it->angle_deg;
                ++nh;
            }
        }
        if (nh == 0 || nt == 0) return false;
        if (std::fabs(head / nh - tail / nt) >= opts_.settle_band_deg) return false;
        close_segment(now, false);
        return true;
    }

    void close_segment(net::Micros now, bool aborted) {
        if (sent_dir_ != 0) {
            client_.send_cmd(script_.axis, sent_dir_, false);
            sent_dir_ = 0;
        }
        stats::SegmentWindow w;
        w.start_ms = segment_start_us_ / 1000;
        w.settle_ms = now / 1000;
        w.still_band_deg = script_.tolerance_deg;
        auto rec = stats::segment_metrics(trace_, target(), w);
        if (reversal_counter_) rec.reversal_in_deadband_count = reversal_counter_(segment_start_us_, now);
        rec.aborted = aborted;
        records_.push_back(std::move(rec));
        if (on_segment_) on_segment_(records_.back());
        segment_open_ = false;
        ++index_;
        if (index_ >= script_.targets_deg.size()) finish();
    }

    void abort_run() {
        aborted_ = true;
        const auto now = clock_.now_us();
        if (segment_open_) {
            close_segment(now, true);
        }
        while (!done_) {
            stats::SegmentRecord r;
            r.target_deg = target();
            r.start_deg = r.final_deg = last_angle_;
            r.error_deg = std::fabs(r.final_deg - r.target_deg);
            r.aborted = true;
            records_.push_back(r);
            if (on_segment_) on_segment_(records_.back());
            if (++index_ >= script_.targets_deg.size()) finish();
        }
    }

    void finish() {
        done_ = true;
        cancel_all();
        if (sent_dir_ != 0) {
            client_.send_cmd(script_.axis, sent_dir_, false);
            sent_dir_ = 0;
        }
    }

    void cancel_all() {
        clock_.cancel(decision_timer_);
        for (auto id : pending_) clock_.cancel(id);
        pending_.clear();
    }

    net::Clock& clock_;
    OperatorClient& client_;
    OperatorProfile profile_;
    TargetScript script_;
    TaskOptions opts_;
    std::mt19937_64 rng_;
    ReversalCounter reversal_counter_;
    std::function<void(const stats::SegmentRecord&)> on_segment_;

    net::Micros started_us_ = 0;
    net::TimerId decision_timer_ = 0;
    std::vector<net::TimerId> pending_;
    net::Micros last_action_us_ = 0;
    net::Micros observe_until_us_ = 0;
    net::Micros quiet_since_us_ = 0;
    std::vector<OperatorAction> actions_;

    bool have_angle_ = false;
    double last_angle_ = 0.0;
    net::Micros last_angle_us_ = 0;
    double v_recent_ = 0.0;  // speed toward the pressed direction, deg/s
    double v_est_;           // typical speed while moving, deg/s
    double imu_interval_s_ = 0.04;
    int tap_dir_ = 0;
    double tap_angle_ = 0.0;
    double tap_scale_ = 1.0;
    int sent_dir_ = 0;

    std::size_t index_ = 0;
    bool segment_open_ = false;
    net::Micros segment_start_us_ = 0;
    std::vector<stats::TracePoint> trace_;
    std::vector<stats::SegmentRecord> records_;
    bool done_ = false;
    bool aborted_ = false;
};

} // namespace teleprobe::op
