#pragma once

#include <gambel/errors.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace gambel {

struct Diagnostic {
    double ess;
    double rhat;
};

namespace detail {

inline double mean_of(const double* x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s / n;
}

} // namespace detail

// split R-hat over equal-length chains; +inf when within-chain variance is zero
// but the chains disagree
inline double split_rhat(const std::vector<std::vector<double>>& chains)
{
    if (chains.empty()) throw insufficient_draws_error("rhat: no chains");
    const std::size_t n = chains.front().size();
    for (const auto& c : chains)
        if (c.size() != n) throw insufficient_draws_error("rhat: chains differ in length");
    if (n < 4) throw insufficient_draws_error("rhat: need at least 4 draws per chain");
    const std::size_t half = n / 2;
    std::vector<double> means, vars;
    for (const auto& c : chains) {
        for (int k = 0; k < 2; ++k) {
            const double* x = c.data() + (k == 0 ? 0 : n - half);
            const double m = detail::mean_of(x, half);
            double v = 0.0;
            for (std::size_t i = 0; i < half; ++i) v += (x[i] - m) * (x[i] - m);
            means.push_back(m);
            vars.push_back(v / (half - 1));
        }
    }
    const double M = static_cast<double>(means.size()), N = static_cast<double>(half);
    const double mm = detail::mean_of(means.data(), means.size());
    double B = 0.0;
    for (double m : means) B += (m - mm) * (m - mm);
    B *= N / (M - 1.0);
    const double W = detail::mean_of(vars.data(), vars.size());
    const double var_plus = (N - 1.0) / N * W + B / N;
    if (W <= 0.0) return B > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    return std::sqrt(var_plus / W);
}

// multi-chain ESS with Geyer's initial monotone sequence
inline double effective_sample_size(const std::vector<std::vector<double>>& chains)
{
    if (chains.empty()) throw insufficient_draws_error("ess: no chains");
    const std::size_t n = chains.front().size();
    for (const auto& c : chains)
        if (c.size() != n) throw insufficient_draws_error("ess: chains differ in length");
    if (n < 4) throw insufficient_draws_error("ess: need at least 4 draws per chain");
    const std::size_t M = chains.size();
    std::vector<double> means(M), vars(M);
    for (std::size_t m = 0; m < M; ++m) {
        means[m] = detail::mean_of(chains[m].data(), n);
        double v = 0.0;
        for (double x : chains[m]) v += (x - means[m]) * (x - means[m]);
        vars[m] = v / (n - 1.0);
    }
    const double W = detail::mean_of(vars.data(), M);
    double var_plus = (n - 1.0) / n * W;
    if (M > 1) {
        const double mm = detail::mean_of(means.data(), M);
        double B = 0.0;
        for (double x : means) B += (x - mm) * (x - mm);
        var_plus += B / (M - 1.0);
    }
    if (!(var_plus > 0.0)) return std::numeric_limits<double>::quiet_NaN();

    auto rho = [&](std::size_t lag) {
        double acov = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const auto& c = chains[m];
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) s += (c[i] - means[m]) * (c[i + lag] - means[m]);
            acov += s / n;
        }
        acov /= M;
        return 1.0 - (W - acov) / var_plus;
    };

    double tau = 0.0, prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        tau += pair;
    }
    tau = std::max(2.0 * tau - 1.0, 1.0 / std::log10(static_cast<double>(n * M)));
    return static_cast<double>(n * M) / tau;
}

inline Diagnostic chain_diagnostics(const std::vector<std::vector<double>>& chains)
{
    return {effective_sample_size(chains), split_rhat(chains)};
}

} // namespace gambel
