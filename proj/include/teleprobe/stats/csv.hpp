#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "teleprobe/error.hpp"
#include "teleprobe/stats/descriptive.hpp"
#include "teleprobe/stats/segment.hpp"

namespace teleprobe::stats {

/// Shortest-ish stable rendering used in every emitted CSV.
inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline constexpr const char* trace_header = "ts_ms,angle_deg,cmd_dir,cmd_on";
inline constexpr const char* summary_header = "condition,axis,metric,n,mean,std,median,iqr,cov";

inline void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
    out << trace_header << '\n';
    for (const auto& p : trace) {
        out << p.ts_ms << ',' << fmt_num(p.angle_deg) << ',' << p.cmd_dir << ',' << (p.cmd_on ? 1 : 0) << '\n';
    }
}

inline std::vector<TracePoint> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("ts_ms,", 0) != 0) {
        throw stats_error("trace csv: missing header");
    }
    std::vector<TracePoint> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        TracePoint p;
        char c1 = 0, c2 = 0, c3 = 0;
        int on = 0;
        if (!(ss >> p.ts_ms >> c1 >> p.angle_deg >> c2 >> p.cmd_dir >> c3 >> on) || c1 != ',' || c2 != ',' ||
            c3 != ',') {
            throw stats_error("trace csv: bad row at line " + std::to_string(lineno));
        }
        p.cmd_on = on != 0;
        out.push_back(p);
    }
    return out;
}

/// One row of a condition/axis/metric summary table; undefined statistics are left blank.
inline void write_summary_row(std::ostream& out, const std::string& condition, const std::string& axis,
                              const std::string& metric, const StatsSummary& s) {
    out << condition << ',' << axis << ',' << metric << ',' << s.n() << ',' << fmt_num(s.mean()) << ','
        << (s.has_std() ? fmt_num(s.std()) : "") << ',' << fmt_num(s.median()) << ','
        << (s.has_std() ? fmt_num(s.iqr()) : "") << ',' << (s.has_cov() ? fmt_num(s.cov()) : "") << '\n';
}

} // namespace teleprobe::stats
