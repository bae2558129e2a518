#pragma once

#include <gambel/distributions.hpp>
#include <gambel/errors.hpp>
#include <gambel/prior.hpp>
#include <gambel/quadrature.hpp>
#include <gambel/specfun.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace gambel {

// ---- hazard ----

struct HazardReport {
    std::vector<double> grid;
    std::vector<double> rates;
    // first grid point from which the rate is nonincreasing; +inf if none
    double monotone_decreasing_from = std::numeric_limits<double>::infinity();
    // sup |x r(x) - aq| over grid points at or beyond the tail start; NaN if none
    double asymptote_check = std::numeric_limits<double>::quiet_NaN();
};

// r(x) = f(x) / S(x) for the folded law
inline double hazard_rate(const GambelParams& p, double x)
{
    if (!(x > 0.0)) throw domain_error("hazard_rate: x must be positive");
    return gambel_pdf(p, x, Fold::folded) / gambel_survival(p, x);
}

inline HazardReport hazard_profile(const GambelParams& p, const std::vector<double>& grid, double tail_start = 1e3)
{
    if (grid.empty()) throw domain_error("hazard_profile: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw domain_error("hazard_profile: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw domain_error("hazard_profile: grid must be strictly increasing");
    }
    HazardReport r;
    r.grid = grid;
    r.rates.reserve(grid.size());
    for (double x : grid) r.rates.push_back(hazard_rate(p, x));

    // walk back from the end while the rate keeps not increasing (relative slack for quadrature noise)
    std::size_t i = grid.size() - 1;
    while (i > 0 && r.rates[i] <= r.rates[i - 1] * (1.0 + 1e-9)) --i;
    if (i + 1 < grid.size()) r.monotone_decreasing_from = grid[i];

    const double aq = p.a * p.q;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] < tail_start) continue;
        const double d = std::fabs(grid[k] * r.rates[k] - aq);
        r.asymptote_check = std::isnan(r.asymptote_check) ? d : std::max(r.asymptote_check, d);
    }
    return r;
}

// ---- Gini / Lorenz ----

namespace detail {

struct GaussRule {
    std::array<double, 20> x;
    std::array<double, 20> w;
};

// 20-point Gauss-Legendre on [-1, 1]
inline const GaussRule& gauss_rule()
{
    static const GaussRule rule = [] {
        GaussRule r;
        const auto& a = boost::math::quadrature::gauss<double, 20>::abscissa();
        const auto& w = boost::math::quadrature::gauss<double, 20>::weights();
        for (std::size_t i = 0; i < 10; ++i) {
            r.x[i] = -a[9 - i];
            r.w[i] = w[9 - i];
            r.x[19 - i] = a[9 - i];
            r.w[19 - i] = w[9 - i];
        }
        return r;
    }();
    return rule;
}

template <class F>
double gl20(F& f, double a, double b)
{
    const auto& g = gauss_rule();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 20; ++i) s += g.w[i] * f(c + h * g.x[i]);
    return s * h;
}

} // namespace detail

// G = 1 - int S^2 / int S over (0, truncation), S(x) = 1 - int_0^x density
template <class Density>
double gini_numeric(Density density, double truncation, double quad_tol = 1e-10)
{
    if (!(truncation > 0.0) || !std::isfinite(truncation)) throw domain_error("gini_numeric: truncation must be positive");
    constexpr int panels = 256;
    const double x1 = truncation * 1e-16;
    auto f = [&](double x) { return x > 0.0 ? density(x) : 0.0; };
    double F = quad::tanh_sinh(f, 0.0, x1, quad_tol);
    double int_s = x1 * (1.0 - 0.5 * F), int_s2 = x1 * (1.0 - F) * (1.0 - F);
    const auto& g = detail::gauss_rule();
    const double ratio = std::pow(truncation / x1, 1.0 / panels);
    double l = x1;
    for (int k = 0; k < panels; ++k) {
        const double r = (k + 1 == panels) ? truncation : l * ratio;
        const double c = 0.5 * (l + r), h = 0.5 * (r - l);
        for (int i = 0; i < 20; ++i) {
            const double t = c + h * g.x[i];
            const double s = std::clamp(1.0 - (F + detail::gl20(f, l, t)), 0.0, 1.0);
            int_s += h * g.w[i] * s;
            int_s2 += h * g.w[i] * s * s;
        }
        F += detail::gl20(f, l, r);
        l = r;
    }
    if (!(int_s > 0.0)) throw numerical_error("gini_numeric: degenerate survival integral");
    return std::clamp(1.0 - int_s2 / int_s, 0.0, 1.0);
}

struct GiniReport {
    double gini;
    bool mean_finite;
    double truncation;
};

inline GiniReport gambel_gini(const GambelParams& p, double truncation = 1e6)
{
    const GambelKernel k(p);
    const double g = gini_numeric([&](double x) { return 2.0 * k.pdf(x); }, truncation);
    return {g, p.a * p.q > 1.0, truncation};
}

struct LorenzResult {
    std::vector<double> p_grid;
    std::vector<double> L_values;
    double gini = 0.0;
    double truncation_bound = 0.0;
    bool mean_finite = false;
};

inline LorenzResult lorenz_numeric(const GambelParams& p, const std::vector<double>& p_grid, double truncation = 1e6)
{
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
        if (!(p_grid[i] > 0.0 && p_grid[i] < 1.0)) throw domain_error("lorenz_numeric: p must lie in (0,1)");
        if (i > 0 && !(p_grid[i] > p_grid[i - 1])) throw domain_error("lorenz_numeric: p grid must be increasing");
    }
    LorenzResult out;
    out.p_grid = p_grid;
    out.truncation_bound = truncation;
    out.mean_finite = p.a * p.q > 1.0;

    const GambelKernel k(p);
    auto xf = [&](double x) { return x > 0.0 ? 2.0 * x * k.pdf(x) : 0.0; };
    double prev = 0.0, acc = 0.0;
    std::vector<double> partial;
    for (double pr : p_grid) {
        const double t = std::min(gambel_quantile(p, pr), truncation);
        if (t > prev) acc += quad::tanh_sinh(xf, prev, t, 1e-12);
        prev = std::max(prev, t);
        partial.push_back(acc);
    }
    double mean;
    if (out.mean_finite)
        mean = gambel_moment(p, 1);
    else
        mean = acc + (truncation > prev ? quad::tanh_sinh(xf, prev, truncation, 1e-12) : 0.0);
    for (double v : partial) out.L_values.push_back(std::clamp(v / mean, 0.0, 1.0));
    out.gini = gambel_gini(p, truncation).gini;
    return out;
}

namespace detail {

// partial first moment int_0^theta x dF(x) over the mean, by the two-term 2F2 expansion
inline double lorenz_series(const GambelParams& p, double theta)
{
    const double s = 1.0 / p.q, d = p.b - s;
    const double lc = std::log(p.xi) * s - std::log(phi(p.q)); // log of the scale xi^{1/q}/phi
    const double lv = std::log(theta) - lc;
    const double z = std::exp(p.q * lv);
    const double lb = log_beta(p.a, p.b), lgs = log_gamma(s);
    const double lA = std::log(p.q) + log_gamma(p.a + s) + log_gamma(d) - log_gamma(p.a + p.b) - lgs - lb;
    const double lB = log_gamma(-d) - std::log(p.b) - lgs - lb;
    const auto f1 = gen_hyp({p.a + s, 2.0 * s}, {1.0 - d, 1.0 + 2.0 * s}, z);
    const auto f2 = gen_hyp({p.a + p.b, p.b + s}, {1.0 + d, 1.0 + p.b + s}, z);
    if (f1.log_scaled || f2.log_scaled) throw convergence_error("lorenz_closed_form: series overflow");
    const double t1 = gamma_sign(d) * 0.5 * std::exp(lA + 2.0 * lv) * f1.value;
    const double t2 = gamma_sign(-d) * p.b * p.q / (p.b * p.q + 1.0) * std::exp(lB + (p.q * p.b + 1.0) * lv) * f2.value;
    const double lmean =
        log_gamma(2.0 * s) + log_gamma(p.a - s) + log_gamma(p.b + s) - lgs - log_gamma(p.a) - log_gamma(p.b);
    const double v = t1 + t2;
    const double err = (std::fabs(t1) + std::fabs(t2)) / std::fabs(v) * (std::max(f1.est_error, f2.est_error) + 64 * eps);
    if (!(err < 1e-6)) throw convergence_error("lorenz_closed_form: series lost precision");
    return v / std::exp(lmean);
}

} // namespace detail

// Lorenz curve from the term-by-term integrated cdf series; needs a finite mean.
inline double lorenz_closed_form(const GambelParams& p, double prob)
{
    if (!(prob > 0.0 && prob < 1.0)) throw domain_error("lorenz_closed_form: p must lie in (0,1)");
    if (!(p.a * p.q > 1.0)) throw moment_error("lorenz_closed_form: mean does not exist (needs aq > 1)");
    const double theta = gambel_quantile(p, prob);
    const double d = p.b - 1.0 / p.q;
    if (std::fabs(d - std::nearbyint(d)) < 0.02) {
        // Gamma poles at integer b - 1/q. The symmetric average over b +- h is even in h,
        // so two Richardson steps on h, 2h, 4h remove the h^2 and h^4 terms.
        auto avg = [&](double h) {
            const GambelParams lo(p.q, p.a, p.b - h, p.xi), hi(p.q, p.a, p.b + h, p.xi);
            return 0.5 * (detail::lorenz_series(lo, theta) + detail::lorenz_series(hi, theta));
        };
        constexpr double h = 0.025;
        const double a1 = avg(h), a2 = avg(2 * h), a4 = avg(4 * h);
        const double r1 = (4 * a1 - a2) / 3, r2 = (4 * a2 - a4) / 3;
        return std::clamp((16 * r1 - r2) / 15, 0.0, 1.0);
    }
    return std::clamp(detail::lorenz_series(p, theta), 0.0, 1.0);
}

struct LorenzCheck {
    double closed_form;
    double numeric;
    double abs_diff;
    bool agrees;
};

inline LorenzCheck lorenz_cross_check(const GambelParams& p, double prob, double tol = 1e-4)
{
    const double c = lorenz_closed_form(p, prob);
    const double n = lorenz_numeric(p, {prob}).L_values.front();
    return {c, n, std::fabs(c - n), std::fabs(c - n) <= tol};
}

// ---- curvature ----

struct CurvatureReport {
    double pm_curv;
    double modal_mass;
};

// argmax of f''/(1+f'^2)^{3/2}; d1 is f', modal_cdf(x) = P(|theta| < x)
template <class D1, class Mass>
CurvatureReport pm_curvature(D1 d1, Mass modal_cdf, double lo = 1e-6, double hi = 50.0)
{
    if (!(lo > 0.0 && hi > lo)) throw domain_error("pm_curvature: bad search interval");
    auto curv = [&](double x) {
        const double h = std::min(1e-5 * std::max(1.0, x), 0.5 * x);
        const double f1 = d1(x);
        const double f2 = (d1(x + h) - d1(x - h)) / (2.0 * h);
        return f2 / std::pow(1.0 + f1 * f1, 1.5);
    };
    constexpr int n = 2000;
    const double step = std::log(hi / lo) / (n - 1);
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = curv(lo * std::exp(step * i));
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    if (best == 0 || best == n - 1) throw no_interior_max_error("pm_curvature: maximum at the search boundary");
    // golden section in log x
    double a = std::log(lo) + step * (best - 1), b = std::log(lo) + step * (best + 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = curv(std::exp(c)), fd = curv(std::exp(d));
    while (b - a > 1e-12) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = curv(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = curv(std::exp(d));
        }
    }
    const double x = std::exp(0.5 * (a + b));
    return {x, modal_cdf(x)};
}

// Gambel: curvature of the unfolded density
inline CurvatureReport gambel_pm_curvature(const GambelParams& p)
{
    const GambelKernel k(p);
    return pm_curvature([&](double x) { return k.pdf_derivative(x); }, [&](double x) { return gambel_cdf(p, x); });
}

// Laplace: curvature of the folded density rate e^{-rate x}
inline CurvatureReport laplace_pm_curvature(double rate)
{
    detail::require_positive(rate, "rate");
    return pm_curvature([&](double x) { return -rate * rate * std::exp(-rate * x); },
                        [&](double x) { return -std::expm1(-rate * x); });
}

// ---- shrinkage profile ----

// E[theta | y] under y ~ N(theta, 1); NaN where the quadrature fails
inline std::vector<double> shrinkage_profile(const PriorSpec& prior, const std::vector<double>& y_grid,
                                             double quad_tol = 1e-10)
{
    std::vector<double> out;
    out.reserve(y_grid.size());
    if (const auto* s = std::get_if<SpikeSlabPrior>(&prior.kind)) {
        const double pi = s->alpha / (s->alpha + s->beta), v = s->slab_variance;
        for (double y : y_grid) {
            // log odds of slab vs spike for the marginal of y
            const double lo = std::log(pi / (1.0 - pi)) - 0.5 * std::log1p(v) + 0.5 * y * y * v / (1.0 + v);
            out.push_back(y * v / (1.0 + v) / (1.0 + std::exp(-lo)));
        }
        return out;
    }
    std::function<double(double)> log_prior;
    if (const auto* g = std::get_if<GambelPrior>(&prior.kind)) {
        auto k = std::make_shared<GambelKernel>(g->params);
        log_prior = [k](double t) { return k->log_pdf(t); };
    } else {
        const double r = std::get<LaplacePrior>(prior.kind).rate;
        log_prior = [r](double t) { return std::log(0.5 * r) - r * std::fabs(t); };
    }
    for (double y : y_grid) {
        try {
            auto w = [&](double t) { return std::exp(-0.5 * (y - t) * (y - t) + log_prior(t)); };
            auto tw = [&](double t) { return t * w(t); };
            const double a = y - 40.0, b = y + 40.0;
            double num = 0.0, den = 0.0;
            if (a < 0.0 && b > 0.0) {
                num = quad::tanh_sinh(tw, a, 0.0, quad_tol) + quad::tanh_sinh(tw, 0.0, b, quad_tol);
                den = quad::tanh_sinh(w, a, 0.0, quad_tol) + quad::tanh_sinh(w, 0.0, b, quad_tol);
            } else {
                num = quad::tanh_sinh(tw, a, b, quad_tol);
                den = quad::tanh_sinh(w, a, b, quad_tol);
            }
            out.push_back(num / den);
        } catch (const error&) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

// ---- tails and hyperparameters ----

// least-squares slope of log f against log theta on [1e2, 1e4]
inline double tail_index_fit(const GambelParams& p)
{
    const GambelKernel k(p);
    constexpr int n = 41;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(1e2) + (std::log(1e4) - std::log(1e2)) * i / (n - 1);
        const double ly = k.log_pdf(std::exp(lx));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double xi_consistent(double q, double p, double n, double rho, double C)
{
    detail::require_positive(q, "q");
    detail::require_positive(rho, "rho");
    detail::require_positive(C, "C");
    if (!(p >= 1.0)) throw domain_error("xi_consistent: p must be >= 1");
    if (!(n >= 2.0)) throw domain_error("xi_consistent: n must be >= 2");
    return std::pow(C / (p * std::pow(n, rho) * std::log(n)), 0.5 * q);
}

} // namespace gambel
