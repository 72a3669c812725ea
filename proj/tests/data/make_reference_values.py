"""Regenerates reference_values.hpp from numpy/statsmodels.

    python3 make_reference_values.py > reference_values.hpp
"""
import numpy as np
from statsmodels.stats.diagnostic import normal_ad

rng = np.random.default_rng(20240501)


def adjusted(x):
    n = len(x)
    a, _ = normal_ad(x)
    return a * (1 + 0.75 / n + 2.25 / n**2)


pool = []
for i in range(2000):
    kind = i % 3
    if kind == 0:
        pool.append(rng.standard_normal(52))
    elif kind == 1:
        pool.append(rng.exponential(size=52))
    else:
        pool.append(rng.standard_t(3, size=52))

# One sample per branch of the p-value approximation.
branches = {"low": (0, 0.2), "mid_low": (0.2, 0.34), "mid_high": (0.34, 0.6), "high": (0.6, 13)}
cases = {}
for name, (lo, hi) in branches.items():
    cases[name] = next(x for x in pool if lo < adjusted(x) < hi)
cases["bimodal"] = np.concatenate([np.full(26, -10.0), np.full(26, 10.0)]) + rng.normal(0, 0.01, 52)
cases["normal"] = rng.standard_normal(52)

quantile_sample = rng.normal(0, 1, 13)
probabilities = [0, 0.025, 0.1, 0.5, 0.9, 0.975, 1]


def literal(values):
    return "{" + ", ".join(repr(float(v)) for v in values) + "}"


print("#pragma once")
print("// Generated by make_reference_values.py; do not edit.")
print()
print("#include <array>")
print()
print("namespace reference {")
print()
print("struct AdCase {")
print("    const char* name;")
print("    std::array<double, 52> sample;")
print("    double statistic;")
print("    double adjusted;")
print("    double p_value;")
print("};")
print()
print("inline const std::array<AdCase, %d> kAdCases{{" % len(cases))
for name, x in cases.items():
    a, p = normal_ad(x)
    print(f'    {{"{name}", {literal(x)},')
    print(f"     {float(a)!r}, {float(adjusted(x))!r}, {float(p)!r}}},")
print("}};")
print()
print(f"inline const std::array<double, {len(quantile_sample)}> kQuantileSample{literal(quantile_sample)};")
print(f"inline const std::array<double, {len(probabilities)}> kQuantileProbabilities{literal(probabilities)};")
print(
    f"inline const std::array<double, {len(probabilities)}> kQuantileValues"
    + literal(np.percentile(quantile_sample, [100 * p for p in probabilities]))
    + ";"
)
print()
print("}  // namespace reference")
