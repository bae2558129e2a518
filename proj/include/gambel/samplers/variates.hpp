#pragma once

#include <gambel/errors.hpp>
#include <gambel/random.hpp>
#include <gambel/specfun.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gambel {

// Gamma(shape, rate) conditioned on X > lower. shape <= 0 is fine when lower > 0.
// Exact rejection samplers; the envelope depends on where lower sits relative to the mode.
inline double rand_truncated_gamma(double shape, double rate, double lower, Rng& rng)
{
    if (!(rate > 0.0) || !std::isfinite(rate)) throw domain_error("truncated gamma: rate must be positive");
    if (!(lower >= 0.0) || !std::isfinite(lower)) throw domain_error("truncated gamma: lower must be finite and >= 0");
    if (!std::isfinite(shape)) throw domain_error("truncated gamma: bad shape");
    const double s = shape, x0 = lower * rate;
    if (x0 <= 0.0) {
        if (!(s > 0.0)) throw domain_error("truncated gamma: shape must be positive without truncation");
        return rng.gamma(s) / rate;
    }
    double x;
    if (s >= 1.0 && x0 <= s - 1.0) {
        do x = rng.gamma(s);
        while (x <= x0);
    } else if (s > 1.0) {
        // x0 + Exp(beta), beta tuned so the ratio peaks at x0
        const double beta = 1.0 - (s - 1.0) / x0;
        for (;;) {
            x = x0 + rng.exponential() / beta;
            if (std::log(rng.uniform()) <= (s - 1.0) * std::log(x / x0) - (1.0 - beta) * (x - x0)) break;
        }
    } else if (x0 >= 1.0) {
        for (;;) {
            x = x0 + rng.exponential();
            if (std::log(rng.uniform()) <= (s - 1.0) * std::log(x / x0)) break;
        }
    } else {
        // s <= 1, x0 < 1: envelope x^{s-1} on [x0, 1], e^{-x} beyond
        const double lx0 = std::log(x0);
        const bool flat = std::fabs(s * lx0) < 1e-10;
        const double m1 = flat ? -lx0 : -std::expm1(s * lx0) / s;
        const double p1 = 1.0 / (1.0 + std::exp(-1.0) / m1);
        for (;;) {
            if (rng.uniform() < p1) {
                const double v = rng.uniform();
                double lx;
                if (flat)
                    lx = lx0 * (1.0 - v);
                else if (s < 0.0)
                    lx = lx0 + std::log1p(-v * (1.0 - std::exp(-s * lx0))) / s;
                else
                    lx = std::log(std::exp(s * lx0) + v * (1.0 - std::exp(s * lx0))) / s;
                x = std::min(std::exp(lx), 1.0);
                if (x > x0 && rng.uniform() <= std::exp(-x)) break;
            } else {
                x = 1.0 + rng.exponential();
                if (std::log(rng.uniform()) <= (s - 1.0) * std::log(x)) break;
            }
        }
    }
    return x / rate;
}

// GG(a_scale, d, q) (density prop. to x^{d-1} exp(-(x/a)^q)) left truncated at lower.
// Works through w = (x/a)^q ~ Gamma(d/q, 1).
inline double rand_truncated_gg(double a_scale, double d, double q, double lower, Rng& rng)
{
    if (!(a_scale > 0.0) || !(q > 0.0)) throw domain_error("truncated GG: scale and q must be positive");
    if (!(lower >= 0.0)) throw domain_error("truncated GG: lower must be >= 0");
    const double w0 = std::pow(lower / a_scale, q);
    const double w = rand_truncated_gamma(d / q, 1.0, w0, rng);
    return a_scale * std::pow(w, 1.0 / q);
}

// lower + Exp(rate)
inline double rand_truncated_exp(double rate, double lower, Rng& rng)
{
    if (!(rate > 0.0)) throw domain_error("truncated exp: rate must be positive");
    if (!(lower >= 0.0)) throw domain_error("truncated exp: lower must be >= 0");
    return lower + rng.exponential() / rate;
}

namespace detail {

// Devroye (2014): density prop. to x^{lam-1} exp(-omega (x + 1/x) / 2), lam >= 0, omega > 0
inline double gig_standard(double lam, double omega, Rng& rng)
{
    const double alpha = omega * omega / (std::sqrt(omega * omega + lam * lam) + lam);
    auto psi = [&](double x) { return -alpha * (std::cosh(x) - 1.0) - lam * std::expm1(x) + lam * x; };
    auto dpsi = [&](double x) { return -alpha * std::sinh(x) - lam * std::expm1(x); };

    double t, s;
    double x = -psi(1.0);
    if (x > 2.0)
        t = std::sqrt(2.0 / (alpha + lam));
    else if (x < 0.5)
        t = std::log(4.0 / (alpha + 2.0 * lam));
    else
        t = 1.0;
    x = -psi(-1.0);
    if (x > 2.0)
        s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + lam));
    else if (x < 0.5)
        s = std::min(lam > 0.0 ? 1.0 / lam : std::numeric_limits<double>::infinity(),
                     std::log1p(1.0 / alpha + std::sqrt(1.0 / (alpha * alpha) + 2.0 / alpha)));
    else
        s = 1.0;

    const double eta = -psi(t), zeta = -dpsi(t), theta = -psi(-s), xi = dpsi(-s);
    const double p = 1.0 / xi, r = 1.0 / zeta;
    const double td = t - r * eta, sd = s - p * theta, q = td + sd;
    for (;;) {
        const double u = rng.uniform(), v = rng.uniform(), w = rng.uniform();
        double X;
        if (u < q / (p + q + r))
            X = -sd + q * v;
        else if (u < (q + r) / (p + q + r))
            X = td - r * std::log(v);
        else
            X = -sd + p * std::log(v);
        double lchi;
        if (X > td)
            lchi = -eta - zeta * (X - t);
        else if (X < -sd)
            lchi = -theta + xi * (X + s);
        else
            lchi = 0.0;
        if (std::log(w) + lchi <= psi(X)) {
            const double lo = lam / omega;
            return (lo + std::sqrt(1.0 + lo * lo)) * std::exp(X);
        }
    }
}

} // namespace detail

// GIG with density prop. to x^{order-1} exp(-(chi/x + psi x)/2)
inline double rand_gig(double order, double chi, double psi, Rng& rng)
{
    if (!std::isfinite(order) || !(chi >= 0.0) || !(psi >= 0.0) || !std::isfinite(chi) || !std::isfinite(psi))
        throw domain_error("GIG: bad parameters");
    if (chi == 0.0) {
        if (!(order > 0.0) || !(psi > 0.0)) throw domain_error("GIG: chi = 0 needs order > 0 and psi > 0");
        return rng.gamma(order, 0.5 * psi);
    }
    if (psi == 0.0) {
        if (!(order < 0.0)) throw domain_error("GIG: psi = 0 needs order < 0");
        return 0.5 * chi / rng.gamma(-order);
    }
    const double x = detail::gig_standard(std::fabs(order), std::sqrt(chi * psi), rng);
    return std::sqrt(chi / psi) * (order < 0.0 ? 1.0 / x : x);
}

// positive stable with Laplace transform exp(-s^alpha), Kanter's representation
inline double rand_positive_stable(double alpha, Rng& rng)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("stable: alpha must lie in (0,1)");
    const double la = log_zolotarev_s(rng.uniform(), 2.0 * alpha);
    return std::exp((1.0 - alpha) / alpha * (la - std::log(rng.exponential())));
}

// density prop. to p_alpha(t) exp(-tilt t). Laplace transform exp(tilt^alpha - (tilt + s)^alpha).
// Split into m iid pieces with Laplace exponent divided by m, so each piece
// is accepted from an untilted proposal with probability exp(-tilt^alpha / m) >= e^{-1}.
inline double rand_tilted_stable(double alpha, double tilt, Rng& rng)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("tilted stable: alpha must lie in (0,1)");
    if (!(tilt >= 0.0) || !std::isfinite(tilt)) throw domain_error("tilted stable: tilt must be finite and >= 0");
    if (alpha == 0.5) {
        // Levy / inverse Gaussian
        if (tilt == 0.0) {
            const double z = rng.normal();
            return 0.5 / (z * z);
        }
        return rng.inverse_gaussian(0.5 / std::sqrt(tilt), 0.5);
    }
    const double mf = std::max(1.0, std::ceil(std::pow(tilt, alpha)));
    if (mf > 1e9) throw numerical_error("tilted stable: tilt too large");
    const auto m = static_cast<long>(mf);
    const double scale = std::pow(mf, -1.0 / alpha);
    double sum = 0.0;
    for (long i = 0; i < m; ++i) {
        for (;;) {
            const double t = scale * rand_positive_stable(alpha, rng);
            if (rng.uniform() <= std::exp(-tilt * t)) {
                sum += t;
                break;
            }
        }
    }
    return sum;
}

namespace detail {

// standard normal on [lo, hi], 0 <= lo < hi
inline double tn_positive(double lo, double hi, Rng& rng)
{
    const double root = std::sqrt(lo * lo + 4.0);
    const double al = 0.5 * (lo + root);
    const double uniform_width = 2.0 * std::sqrt(std::numbers::e) / (lo + root) * std::exp(0.25 * (lo * lo - lo * root));
    if (hi - lo < uniform_width) {
        for (;;) {
            const double z = lo + (hi - lo) * rng.uniform();
            if (std::log(rng.uniform()) <= 0.5 * (lo * lo - z * z)) return z;
        }
    }
    for (;;) {
        const double z = lo + rng.exponential() / al;
        if (z >= hi) continue;
        if (std::log(rng.uniform()) <= -0.5 * (z - al) * (z - al)) return z;
    }
}

inline double tn_standard(double lo, double hi, Rng& rng)
{
    if (lo >= 0.0) return tn_positive(lo, hi, rng);
    if (hi <= 0.0) return -tn_positive(-hi, -lo, rng);
    if (hi - lo >= 2.5) {
        for (;;) {
            const double z = rng.normal();
            if (z > lo && z < hi) return z;
        }
    }
    for (;;) {
        const double z = lo + (hi - lo) * rng.uniform();
        if (std::log(rng.uniform()) <= -0.5 * z * z) return z;
    }
}

} // namespace detail

// N(mean, sd^2) restricted to the open interval (lower, upper)
inline double rand_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng)
{
    if (!(upper > lower)) throw domain_error("truncated normal: empty interval");
    if (!(sd > 0.0) || !std::isfinite(mean)) throw domain_error("truncated normal: bad mean or sd");
    const double x = mean + sd * detail::tn_standard((lower - mean) / sd, (upper - mean) / sd, rng);
    const double lo = std::nextafter(lower, upper), hi = std::nextafter(upper, lower);
    return lo <= hi ? std::clamp(x, lo, hi) : 0.5 * (lower + upper);
}

// Systematic-scan Gibbs sweeps for N(Q^{-1} h, Q^{-1}) restricted to |theta_j| < bound_j.
// Canonical form so that Q may be singular (a zero diagonal gives a uniform conditional).
// Q and h are both multiplied by scale (1/sigma^2 in the regression sampler).
inline Eigen::VectorXd rand_box_truncated_normal(const Eigen::MatrixXd& Q, const Eigen::VectorXd& h,
                                                 const Eigen::VectorXd& bound, Eigen::VectorXd theta, int sweeps,
                                                 Rng& rng, bool diagonal = false, double scale = 1.0)
{
    const auto p = theta.size();
    if (Q.rows() != p || Q.cols() != p || h.size() != p || bound.size() != p)
        throw domain_error("box truncated normal: dimension mismatch");
    if (sweeps < 1) throw domain_error("box truncated normal: sweeps must be >= 1");
    for (Eigen::Index j = 0; j < p; ++j)
        if (!(bound[j] > 0.0) || !(std::fabs(theta[j]) < bound[j])) throw infeasible_error("box truncated normal: infeasible start");
    for (int s = 0; s < sweeps; ++s) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double c = bound[j], qjj = scale * Q(j, j);
            if (!(qjj > 0.0)) {
                theta[j] = c * (2.0 * rng.uniform() - 1.0);
                continue;
            }
            double off = 0.0;
            if (!diagonal) off = scale * (Q.col(j).dot(theta) - Q(j, j) * theta[j]);
            const double m = (scale * h[j] - off) / qjj;
            theta[j] = rand_truncated_normal(m, 1.0 / std::sqrt(qjj), -c, c, rng);
        }
    }
    return theta;
}

} // namespace gambel
