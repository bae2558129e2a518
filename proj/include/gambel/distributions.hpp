#pragma once

#include <gambel/errors.hpp>
#include <gambel/quadrature.hpp>
#include <gambel/random.hpp>
#include <gambel/specfun.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace gambel {

enum class Fold { unfolded, folded };

namespace detail {

inline void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw domain_error(std::string(what) + " must be positive and finite");
}

} // namespace detail

struct GambelParams {
    double q, a, b, xi;

    GambelParams(double q_, double a_, double b_, double xi_) : q(q_), a(a_), b(b_), xi(xi_)
    {
        detail::require_positive(q, "q");
        detail::require_positive(a, "a");
        detail::require_positive(b, "b");
        detail::require_positive(xi, "xi");
    }

    static GambelParams horseshoe() { return {2.0, 0.5, 0.5, 1.0}; }

    bool singular_at_zero() const { return b <= 1.0 / q; }
    double tail_exponent() const { return a * q + 1.0; }
};

struct EPParams {
    double q, kappa;

    EPParams(double q_, double kappa_) : q(q_), kappa(kappa_)
    {
        detail::require_positive(q, "q");
        if (!(kappa > 0.0 && kappa < 1.0)) throw domain_error("kappa must lie in (0,1)");
    }
    double sd() const { return std::pow((1.0 - kappa) / kappa, 1.0 / q); }
};

struct GGParams {
    double a, d, q;

    GGParams(double a_, double d_, double q_) : a(a_), d(d_), q(q_)
    {
        detail::require_positive(a, "a");
        detail::require_positive(d, "d");
        detail::require_positive(q, "q");
    }
};

struct GB2Params {
    double p, scale, a, b;

    GB2Params(double p_, double scale_, double a_, double b_) : p(p_), scale(scale_), a(a_), b(b_)
    {
        detail::require_positive(p, "p");
        detail::require_positive(scale, "scale");
        detail::require_positive(a, "a");
        detail::require_positive(b, "b");
    }
};

struct G3BParams {
    double a, b, xi;

    G3BParams(double a_, double b_, double xi_) : a(a_), b(b_), xi(xi_)
    {
        detail::require_positive(a, "a");
        detail::require_positive(b, "b");
        detail::require_positive(xi, "xi");
    }
};

struct GammaBetaRatioParams {
    double beta, lambda, a, b;

    GammaBetaRatioParams(double beta_, double lambda_, double a_, double b_)
        : beta(beta_), lambda(lambda_), a(a_), b(b_)
    {
        detail::require_positive(beta, "beta");
        detail::require_positive(lambda, "lambda");
        detail::require_positive(a, "a");
        detail::require_positive(b, "b");
    }
};

struct DensityCdf {
    double density;
    double cdf;
};

// ---- exponential power ----

inline double ep_pdf(const EPParams& p, double x)
{
    const double ph = phi(p.q), g = p.sd();
    return p.q * ph / (2.0 * g * std::exp(log_gamma(1.0 / p.q))) * std::exp(-std::pow(ph * std::fabs(x) / g, p.q));
}

inline double ep_cdf(const EPParams& p, double x)
{
    const double t = std::pow(phi(p.q) * std::fabs(x) / p.sd(), p.q);
    const double h = 0.5 * reg_lower_inc_gamma(1.0 / p.q, t);
    return x < 0.0 ? 0.5 - h : 0.5 + h;
}

inline std::vector<double> ep_sample(const EPParams& p, Rng& rng, std::size_t n)
{
    const double scale = p.sd() / phi(p.q);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.rademacher() * scale * std::exp(rng.log_gamma_variate(1.0 / p.q) / p.q);
    return out;
}

// ---- generalized gamma ----

inline DensityCdf gg_pdf_cdf(const GGParams& p, double x)
{
    if (!(x > 0.0)) throw domain_error("gg_pdf_cdf: x must be positive");
    const double t = std::pow(x / p.a, p.q);
    const double ld = std::log(p.q) + (p.d - 1.0) * std::log(x) - t - p.d * std::log(p.a) - log_gamma(p.d / p.q);
    return {std::exp(ld), reg_lower_inc_gamma(p.d / p.q, t)};
}

inline std::vector<double> gg_sample(const GGParams& p, Rng& rng, std::size_t n)
{
    std::vector<double> out(n);
    for (auto& v : out) v = p.a * std::exp(rng.log_gamma_variate(p.d / p.q) / p.q);
    return out;
}

// ---- generalized beta of the second kind ----

inline double gb2_pdf(const GB2Params& p, double x)
{
    if (!(x > 0.0)) throw domain_error("gb2_pdf: x must be positive");
    const double lr = std::log(x / p.scale);
    const double ld = std::log(p.p) + (p.a * p.p - 1.0) * lr - (p.a + p.b) * std::log1p(std::exp(p.p * lr)) -
                      std::log(p.scale) - log_beta(p.a, p.b);
    return std::exp(ld);
}

inline std::vector<double> gb2_sample(const GB2Params& p, Rng& rng, std::size_t n)
{
    std::vector<double> out(n);
    for (auto& v : out) v = p.scale * std::exp((rng.log_gamma_variate(p.a) - rng.log_gamma_variate(p.b)) / p.p);
    return out;
}

// ---- three-parameter beta ----

inline double g3b_pdf(const G3BParams& p, double x)
{
    if (!(x > 0.0 && x < 1.0)) throw domain_error("g3b_pdf: x must lie in (0,1)");
    const double ld = p.a * std::log(p.xi) + (p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x) -
                      (p.a + p.b) * std::log1p(-(1.0 - p.xi) * x) - log_beta(p.a, p.b);
    return std::exp(ld);
}

inline std::vector<double> g3b_sample(const G3BParams& p, Rng& rng, std::size_t n)
{
    // kappa = X1/(X0+X1), X1 ~ Gamma(a, xi), X0 ~ Gamma(b, 1)
    std::vector<double> out(n);
    const double lxi = std::log(p.xi);
    for (auto& v : out) {
        const double la = rng.log_gamma_variate(p.a), lb = rng.log_gamma_variate(p.b);
        v = 1.0 / (1.0 + std::exp(lb - la + lxi));
    }
    return out;
}

// law of (1-kappa)/kappa when kappa ~ G3B(a, b, xi)
inline GB2Params weight_to_coefficient(const G3BParams& g) { return {1.0, g.xi, g.b, g.a}; }

// ---- Gambel ----

// Precomputed constants of the unfolded density.
class GambelKernel {
public:
    explicit GambelKernel(const GambelParams& p, SeriesControl ctl = {})
        : p_(p), ctl_(ctl), x_(p.a + 1.0 / p.q), y_(1.0 + 1.0 / p.q - p.b), phi_(phi(p.q))
    {
        log_c_ = log_gamma(x_) - log_gamma(1.0 / p.q) + std::log(0.5 * p.q) - log_beta(p.a, p.b) + std::log(phi_) -
                 std::log(p.xi) / p.q;
    }

    const GambelParams& params() const { return p_; }
    double phi_q() const { return phi_; }

    double log_z(double t) const { return p_.q * (std::log(phi_) + std::log(t)) - std::log(p_.xi); }

    // log of the unfolded density at |theta|
    double log_pdf(double theta) const
    {
        const double t = std::fabs(theta);
        if (t == 0.0) {
            if (p_.singular_at_zero()) return detail::inf;
            return log_c_ + log_gamma(p_.b - 1.0 / p_.q) - log_gamma(p_.a + p_.b);
        }
        if (std::isinf(t)) return -detail::inf;
        const double lz = log_z(t);
        if (lz > 700.0) return log_c_ - x_ * lz; // leading asymptotic, relative error O(1/z)
        return log_c_ + tricomi_psi(x_, y_, std::exp(std::max(lz, -690.0)), ctl_).log();
    }

    double pdf(double theta) const { return std::exp(log_pdf(theta)); }

    // d f / d theta for theta > 0 (unfolded); uses dPsi/dz = -x Psi(x+1, y+1, z)
    double pdf_derivative(double theta) const
    {
        if (!(theta > 0.0)) throw domain_error("pdf_derivative: theta must be positive");
        const double lz = log_z(theta);
        double lpsi1;
        if (lz > 700.0)
            lpsi1 = -(x_ + 1.0) * lz;
        else
            lpsi1 = tricomi_psi(x_ + 1.0, y_ + 1.0, std::exp(std::max(lz, -690.0)), ctl_).log();
        // c * (-x) * Psi(x+1,y+1,z) * q z / theta
        return -std::exp(log_c_ + std::log(x_) + lpsi1 + std::log(p_.q) + lz - std::log(theta));
    }

private:
    GambelParams p_;
    SeriesControl ctl_;
    double x_, y_, phi_, log_c_ = 0.0;
};

inline double gambel_pdf(const GambelParams& p, double theta, Fold fold = Fold::unfolded)
{
    if (fold == Fold::folded && !(theta >= 0.0)) throw domain_error("gambel_pdf: folded density needs theta >= 0");
    const double f = GambelKernel(p).pdf(theta);
    return fold == Fold::folded ? 2.0 * f : f;
}

inline double gambel_log_pdf(const GambelParams& p, double theta, Fold fold = Fold::unfolded)
{
    const double lf = GambelKernel(p).log_pdf(theta);
    return fold == Fold::folded ? lf + std::log(2.0) : lf;
}

namespace detail {

// P(theta' > theta) for the folded law, via u = 1/theta'
inline double gambel_tail_integral(const GambelKernel& k, double theta)
{
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        return 2.0 * std::exp(k.log_pdf(1.0 / u) - 2.0 * std::log(u));
    };
    return quad::tanh_sinh(g, 0.0, 1.0 / theta, 1e-13);
}

inline double gambel_head_integral(const GambelKernel& k, double theta)
{
    auto g = [&](double t) {
        if (t <= 0.0) return 0.0;
        return 2.0 * k.pdf(t);
    };
    return quad::tanh_sinh(g, 0.0, theta, 1e-13);
}

// Two-term series for the folded cdf. Returns NaN when the series is not usable.
inline double gambel_cdf_series(const GambelParams& p, double theta, double max_z, double max_err)
{
    const double s = 1.0 / p.q, d = p.b - s;
    if (std::fabs(d - std::nearbyint(d)) < near_integer_floor) return std::nan("");
    const double lz = p.q * (std::log(phi(p.q)) + std::log(theta)) - std::log(p.xi);
    const double z = std::exp(lz);
    if (z > max_z) return std::nan("");
    try {
        const double lb = log_beta(p.a, p.b), lgs = log_gamma(s);
        const double lA = std::log(p.q) + log_gamma(p.a + s) + log_gamma(d) - log_gamma(p.a + p.b) - lgs - lb;
        const double lB = log_gamma(-d) - std::log(p.b) - lgs - lb;
        const auto f1 = gen_hyp({s, p.a + s}, {1.0 + s, 1.0 - d}, z);
        const auto f2 = gen_hyp({p.b, p.a + p.b}, {1.0 + p.b, 1.0 + d}, z);
        if (f1.log_scaled || f2.log_scaled) return std::nan("");
        const double t1 = gamma_sign(d) * std::exp(lA + s * lz) * f1.value;
        const double t2 = gamma_sign(-d) * std::exp(lB + p.b * lz) * f2.value;
        const double v = t1 + t2;
        const double cond = (std::fabs(t1) + std::fabs(t2)) / std::fabs(v);
        const double err = cond * (std::max(f1.est_error, f2.est_error) + 64 * eps);
        if (!(err <= max_err) || v < -1e-12 || v > 1.0 + 1e-12) return std::nan("");
        return std::clamp(v, 0.0, 1.0);
    } catch (const numerical_error&) {
        return std::nan("");
    }
}

} // namespace detail

// folded cdf, P(|theta| <= t)
inline double gambel_cdf(const GambelParams& p, double theta)
{
    if (std::isnan(theta)) throw domain_error("gambel_cdf: theta is NaN");
    if (theta <= 0.0) return 0.0;
    if (std::isinf(theta)) return 1.0;
    const double v = detail::gambel_cdf_series(p, theta, 30.0, 1e-11);
    if (!std::isnan(v)) return v;
    const GambelKernel k(p);
    const double tail = detail::gambel_tail_integral(k, theta);
    if (tail < 0.5) return std::clamp(1.0 - tail, 0.0, 1.0);
    return std::clamp(detail::gambel_head_integral(k, theta), 0.0, 1.0);
}

// folded survival function, accurate far in the tail
inline double gambel_survival(const GambelParams& p, double theta)
{
    if (theta <= 0.0) return 1.0;
    if (std::isinf(theta)) return 0.0;
    const double v = detail::gambel_cdf_series(p, theta, 30.0, 1e-11);
    if (!std::isnan(v) && v < 0.5) return 1.0 - v;
    const GambelKernel k(p);
    const double tail = detail::gambel_tail_integral(k, theta);
    if (tail < 0.5) return tail;
    return 1.0 - detail::gambel_head_integral(k, theta);
}

// folded quantile
inline double gambel_quantile(const GambelParams& p, double prob)
{
    if (!(prob > 0.0 && prob < 1.0)) throw domain_error("gambel_quantile: p must lie in (0,1)");
    auto g = [&](double lt) {
        const double t = std::exp(lt);
        return prob <= 0.5 ? gambel_cdf(p, t) - prob : (1.0 - prob) - gambel_survival(p, t);
    };
    double lo = std::log(1e-12), hi = 0.0;
    double glo = g(lo);
    while (glo > 0.0) {
        lo -= std::log(10.0);
        if (lo < -690.0) throw bracket_error("gambel_quantile: could not bracket from below");
        glo = g(lo);
    }
    double ghi = g(hi);
    while (ghi < 0.0) {
        hi += std::log(2.0);
        if (hi > 690.0) throw bracket_error("gambel_quantile: could not bracket from above");
        ghi = g(hi);
    }
    if (glo == 0.0) return std::exp(lo);
    if (ghi == 0.0) return std::exp(hi);
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(50),
                                                     iters);
    const double t = std::exp(0.5 * (r.first + r.second));
    if (std::fabs(gambel_cdf(p, t) - prob) > 1e-10)
        throw bracket_error("gambel_quantile: root did not reach the cdf tolerance");
    return t;
}

// E|theta|^k under the folded law (equals E theta^k for even k)
inline double gambel_moment(const GambelParams& p, int k)
{
    if (k < 0) throw domain_error("gambel_moment: k must be nonnegative");
    if (!(k < p.a * p.q))
        throw moment_error("gambel_moment: moment of order " + std::to_string(k) + " does not exist (needs k < aq)");
    if (k == 0) return 1.0;
    const double s = 1.0 / p.q;
    const double l = k * (std::log(p.xi) * s - std::log(phi(p.q))) + log_gamma((1.0 + k) * s) + log_gamma(p.a - k * s) +
                     log_gamma(p.b + k * s) - log_gamma(s) - log_gamma(p.a) - log_gamma(p.b);
    return std::exp(l);
}

inline double gambel_variance(const GambelParams& p) { return gambel_moment(p, 2); }

inline double gambel_kurtosis(const GambelParams& p)
{
    const double m2 = gambel_moment(p, 2);
    return gambel_moment(p, 4) / (m2 * m2);
}

inline double gambel_kurtosis_approx(const GambelParams& p)
{
    if (!(p.a > 4.0 / p.q)) throw domain_error("gambel_kurtosis_approx: needs a > 4/q");
    return std::pow(3.0 * p.a * (p.q * p.b + 2.0) / (p.b * (p.q * p.a - 4.0)), 2.0 / p.q);
}

inline double gambel_draw(const GambelParams& p, Rng& rng, Fold fold = Fold::unfolded)
{
    // theta = X / Y, X ~ GG(xi^{1/q}, 1, q), Y ~ GB2(q, phi, a, b)
    const double lg = rng.log_gamma_variate(1.0 / p.q);
    const double la = rng.log_gamma_variate(p.a);
    const double lb = rng.log_gamma_variate(p.b);
    const double t = std::exp((std::log(p.xi) + lg + lb - la) / p.q - std::log(phi(p.q)));
    return fold == Fold::folded ? t : rng.rademacher() * t;
}

inline std::vector<double> gambel_sample(const GambelParams& p, Rng& rng, std::size_t n, Fold fold = Fold::unfolded)
{
    std::vector<double> out(n);
    for (auto& v : out) v = gambel_draw(p, rng, fold);
    return out;
}

// ---- Gamma / Beta ratio ----

inline DensityCdf gamma_beta_ratio(const GammaBetaRatioParams& p, double z)
{
    if (!(z > 0.0)) throw domain_error("gamma_beta_ratio: z must be positive");
    const double lb = log_beta(p.a, p.b);
    const auto m = kummer_m(p.beta + p.a, p.beta + p.a + p.b, -p.lambda * z);
    const double ld = p.beta * std::log(p.lambda) + log_beta(p.beta + p.a, p.b) - log_gamma(p.beta) - lb +
                      (p.beta - 1.0) * std::log(z) + m.log();
    double cdf = std::nan("");
    try {
        const auto f = gen_hyp({p.beta, p.a + p.beta}, {p.beta + 1.0, p.a + p.b + p.beta}, -p.lambda * z);
        if (!f.log_scaled && f.est_error < 1e-10) {
            cdf = std::exp(log_beta(p.b, p.a + p.beta) + p.beta * std::log(p.lambda * z) - log_gamma(p.beta + 1.0) - lb) *
                  f.value;
        }
    } catch (const numerical_error&) {
    }
    if (std::isnan(cdf)) {
        // alternating series lost precision: F(z) = E_Y P(beta, lambda z Y), Y ~ Beta(a, b)
        auto g = [&](double y) {
            if (y <= 0.0 || y >= 1.0) return 0.0;
            return reg_lower_inc_gamma(p.beta, p.lambda * z * y) *
                   std::exp((p.a - 1.0) * std::log(y) + (p.b - 1.0) * std::log1p(-y) - lb);
        };
        cdf = quad::tanh_sinh(g, 0.0, 1.0, 1e-12);
    }
    return {std::exp(ld), std::clamp(cdf, 0.0, 1.0)};
}

} // namespace gambel
