#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace testutil {

inline double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// Kolmogorov-Smirnov distance. When the cdf is expensive, pass grid > 0 to
// evaluate it only at that many evenly spaced order statistics.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf, std::size_t grid = 0)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const std::size_t step = (grid == 0 || grid >= xs.size()) ? 1 : xs.size() / grid;
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); i += step) {
        const double f = cdf(xs[i]);
        d = std::max({d, std::fabs(f - i / n), std::fabs((i + 1) / n - f)});
    }
    return d;
}

// asymptotic critical value at level 0.001
inline double ks_critical(std::size_t n) { return 1.9495 / std::sqrt(static_cast<double>(n)); }

inline double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

inline double variance(const std::vector<double>& v)
{
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

} // namespace testutil
