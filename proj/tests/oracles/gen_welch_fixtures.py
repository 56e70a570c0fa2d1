#!/usr/bin/env python3
"""Freezes Welch t-test reference values computed with scipy into a C++ header."""
import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)
pairs = [
    ([1, 2, 3, 4, 5], [2, 3, 4, 5, 6]),
    ([6.8, 4.1, 9.9, 7.2, 5.5, 8.0], [11.5, 3.0, 21.0, 9.4, 12.2, 14.8, 7.7]),
]
for i in range(22):
    na = int(rng.integers(2, 40))
    nb = int(rng.integers(2, 40))
    a = rng.normal(rng.uniform(-5, 15), rng.uniform(0.2, 6), na)
    b = rng.normal(rng.uniform(-5, 15), rng.uniform(0.2, 6), nb)
    pairs.append((list(np.round(a, 6)), list(np.round(b, 6))))

def fmt(xs):
    return "{" + ", ".join(repr(float(x)) for x in xs) + "}"

out = ["// Generated by tests/oracles/gen_welch_fixtures.py (scipy.stats.ttest_ind, equal_var=False).",
       "#pragma once", "#include <vector>", "", "namespace welch_fixtures {", "",
       "struct Case { std::vector<double> a, b; double t, dof, p; };", "",
       "inline const std::vector<Case>& cases() {", "    static const std::vector<Case> c = {"]
for a, b in pairs:
    r = stats.ttest_ind(a, b, equal_var=False)
    va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
    na, nb = len(a), len(b)
    dof = (va / na + vb / nb) ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    out.append(f"        {{{fmt(a)},\n         {fmt(b)},\n         {float(r.statistic)!r}, {float(dof)!r}, {float(r.pvalue)!r}}},")
out += ["    };", "    return c;", "}", "", "} // namespace welch_fixtures", ""]
open("tests/welch_fixtures.hpp", "w").write("\n".join(out))
