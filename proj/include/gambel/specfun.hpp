#pragma once

#include <gambel/errors.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace gambel {

struct SeriesControl {
    double rel_tol = 1e-13;
    int max_terms = 20000;
    double asymptotic_switch = 50.0;

    void validate() const
    {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-6))
            throw domain_error("SeriesControl: rel_tol must lie in (0, 1e-6]");
        if (max_terms < 100)
            throw domain_error("SeriesControl: max_terms must be >= 100");
        if (!(asymptotic_switch > 0.0))
            throw domain_error("SeriesControl: asymptotic_switch must be positive");
    }
};

struct SpecialValue {
    double value = 0.0;
    bool log_scaled = false;
    double est_error = 0.0;

    double linear() const { return log_scaled ? std::exp(value) : value; }
    double log() const { return log_scaled ? value : std::log(value); }
};

namespace detail {

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double inf = std::numeric_limits<double>::infinity();

// Psi branches are accepted when their error estimate is below this multiple of rel_tol
constexpr double psi_accept_factor = 100.0;
// |y - round(y)| below this is treated as near-integer
constexpr double near_integer_floor = 1e-6;

inline bool is_integer(double x) { return std::isfinite(x) && x == std::nearbyint(x); }
inline bool is_nonpositive_integer(double x) { return x <= 0.0 && is_integer(x); }

inline SpecialValue from_log(double logv, double err)
{
    if (logv > 700.0 || logv < -700.0)
        return {logv, true, err};
    return {std::exp(logv), false, err};
}

// Lanczos, g = 7, n = 9; valid for x >= 0.5
inline double lanczos_lgamma(double x)
{
    static constexpr std::array<double, 9> c = {
        0.99999999999980993,    676.5203681218851,     -1259.1392167224028,
        771.32342877765313,     -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
    x -= 1.0;
    double a = c[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

} // namespace detail

// log|Gamma(x)|, x not a nonpositive integer
inline double log_gamma(double x)
{
    if (std::isnan(x)) return x;
    if (detail::is_nonpositive_integer(x)) throw pole_error("log_gamma: pole at " + std::to_string(x));
    if (x >= 0.5) return detail::lanczos_lgamma(x);
    // reflection
    const double s = std::sin(std::numbers::pi * x);
    return std::log(std::numbers::pi / std::fabs(s)) - detail::lanczos_lgamma(1.0 - x);
}

inline double gamma_sign(double x)
{
    if (x > 0.0) return 1.0;
    // Gamma alternates sign between consecutive negative integers
    return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
}

inline double gamma_fn(double x)
{
    if (x > 0.0 && x < 171.0 && detail::is_integer(x)) {
        double r = 1.0;
        for (int i = 2; i < static_cast<int>(x); ++i) r *= i;
        return r;
    }
    return gamma_sign(x) * std::exp(log_gamma(x));
}

// 1/Gamma(x), zero at the poles
inline double recip_gamma(double x)
{
    if (detail::is_nonpositive_integer(x)) return 0.0;
    return gamma_sign(x) * std::exp(-log_gamma(x));
}

inline double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

inline double digamma(double x)
{
    if (detail::is_nonpositive_integer(x)) throw pole_error("digamma: pole");
    if (x < 0.0)
        return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
    double r = 0.0;
    while (x < 12.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    const double x2 = 1.0 / (x * x);
    r += std::log(x) - 0.5 / x -
         x2 * (1.0 / 12 - x2 * (1.0 / 120 - x2 * (1.0 / 252 - x2 * (1.0 / 240 - x2 * (1.0 / 132)))));
    return r;
}

inline double phi(double q)
{
    if (!(q > 0.0) || !std::isfinite(q)) throw domain_error("phi: q must be positive");
    return std::exp(0.5 * (log_gamma(3.0 / q) - log_gamma(1.0 / q)));
}

inline SpecialValue gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den)
{
    double lg = 0.0;
    for (double a : num) {
        if (!(a > 0.0)) throw domain_error("gamma_ratio: nonpositive argument");
        lg += log_gamma(a);
    }
    for (double b : den) {
        if (!(b > 0.0)) throw domain_error("gamma_ratio: nonpositive argument");
        lg -= log_gamma(b);
    }
    const double n = static_cast<double>(num.size() + den.size());
    return detail::from_log(lg, 4.0 * n * detail::eps * std::max(1.0, std::fabs(lg)));
}

// P(s, x) = gamma(s, x) / Gamma(s)
inline double reg_lower_inc_gamma(double s, double x)
{
    if (!(s > 0.0)) throw domain_error("reg_lower_inc_gamma: s must be positive");
    if (!(x >= 0.0)) throw domain_error("reg_lower_inc_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double lpre = -x + s * std::log(x) - log_gamma(s);
    if (x < s + 1.0) {
        double ap = s, del = 1.0 / s, sum = del;
        for (int n = 0; n < 100000; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return std::min(1.0, sum * std::exp(lpre));
    }
    // Lentz continued fraction for Q
    const double tiny = 1e-300;
    double b = x + 1.0 - s, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::max(0.0, 1.0 - std::exp(lpre) * h);
}

inline double reg_upper_inc_gamma(double s, double x)
{
    if (!(s > 0.0)) throw domain_error("reg_upper_inc_gamma: s must be positive");
    if (!(x >= 0.0)) throw domain_error("reg_upper_inc_gamma: x must be nonnegative");
    if (x < s + 1.0) return 1.0 - reg_lower_inc_gamma(s, x);
    const double lpre = -x + s * std::log(x) - log_gamma(s);
    const double tiny = 1e-300;
    double b = x + 1.0 - s, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(lpre) * h;
}

namespace detail {

// Plain pFq series with Kahan summation; rescales to log form when it would overflow.
inline SpecialValue hyp_series(const std::vector<double>& a, const std::vector<double>& b, double z,
                               const SeriesControl& ctl)
{
    constexpr double big = 1e280;
    const double log_big = std::log(big);
    double sum = 1.0, comp = 0.0, term = 1.0, max_abs = 1.0, offset = 0.0;
    int k = 0;
    bool done = (z == 0.0);
    double remainder = 0.0;
    for (; !done && k < ctl.max_terms; ++k) {
        double ratio = z / (k + 1.0);
        for (double ai : a) ratio *= ai + k;
        for (double bj : b) ratio /= bj + k;
        term *= ratio;
        if (term == 0.0) {
            done = true;
            break;
        }
        const double yk = term - comp;
        const double t = sum + yk;
        comp = (t - sum) - yk;
        sum = t;
        max_abs = std::max(max_abs, std::fabs(term));
        if (std::fabs(sum) > big) {
            sum /= big;
            term /= big;
            comp /= big;
            max_abs /= big;
            offset += log_big;
        }
        const double r = std::fabs(ratio);
        if (r < 1.0) {
            const double tail = std::fabs(term) * r / (1.0 - r);
            if (tail <= std::max(0.01 * ctl.rel_tol, 0.5 * eps) * std::fabs(sum) && k > 1) {
                remainder = tail;
                done = true;
            }
        }
    }
    if (!done)
        throw convergence_error("hypergeometric series: max_terms reached before tolerance");
    const double err = (sum == 0.0) ? inf
                                    : (remainder + (k + 2.0) * eps * max_abs) / std::fabs(sum);
    if (offset > 0.0) {
        if (sum < 0.0) throw numerical_error("hypergeometric series: negative overflow");
        return {std::log(sum) + offset, true, err};
    }
    return {sum, false, err};
}

// z^{-x} 2F0(x, 1+x-y;; -1/z), truncated at the smallest term
inline SpecialValue psi_asymptotic(double x, double y, double z)
{
    const double a2 = 1.0 + x - y;
    double sum = 1.0, comp = 0.0, term = 1.0, next_abs = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double next = term * (x + k) * (a2 + k) / (k + 1.0) * (-1.0 / z);
        if (next == 0.0) {
            next_abs = 0.0;
            break;
        }
        if (std::fabs(next) >= std::fabs(term)) {
            next_abs = std::fabs(next);
            break;
        }
        term = next;
        const double yk = term - comp;
        const double t = sum + yk;
        comp = (t - sum) - yk;
        sum = t;
        next_abs = std::fabs(term);
    }
    if (!(sum > 0.0)) return {0.0, false, inf};
    return from_log(-x * std::log(z) + std::log(sum), next_abs / sum + 4 * eps);
}

// (1/Gamma(x)) int_0^inf e^{-zt} t^{x-1} (1+t)^{y-x-1} dt, written in s = z t
inline SpecialValue psi_integral(double x, double y, double z)
{
    static thread_local boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0, l1 = 0.0, I = 0.0;
    const double p = y - x - 1.0;
    if (x < 1.0) {
        // s = w^{1/x} removes the s^{x-1} endpoint singularity
        auto f = [&](double w) {
            const double s = std::pow(w, 1.0 / x);
            if (!std::isfinite(s)) return 0.0;
            return std::exp(-s + p * std::log1p(s / z)) / x;
        };
        I = integrator.integrate(f, 1e-14, &err, &l1);
    } else {
        auto f = [&](double s) { return std::exp(-s + (x - 1.0) * std::log(s) + p * std::log1p(s / z)); };
        I = integrator.integrate(f, 1e-14, &err, &l1);
    }
    if (!(I > 0.0)) throw convergence_error("tricomi_psi: integral representation failed");
    return from_log(-x * std::log(z) - log_gamma(x) + std::log(I), std::max(err / I, 1e-14));
}

// z^zpow * Psi(x, n + 1, z), n >= 0 integer (logarithmic case)
inline SpecialValue psi_log_series(double x, int n, double z, double zpow, const SeriesControl& ctl)
{
    const double lz = std::log(z);
    double fact_n = 1.0;
    for (int i = 2; i <= n; ++i) fact_n *= i;
    const double pre = ((n + 1) % 2 == 0 ? 1.0 : -1.0) / fact_n * recip_gamma(x - n);

    double first = 0.0, first_abs = 0.0;
    if (pre != 0.0) {
        double coef = 1.0; // (x)_k / ((n+1)_k k!) z^k
        double sum = 0.0, comp = 0.0;
        double psi_x = digamma(x), psi_1 = digamma(1.0), psi_n = digamma(n + 1.0);
        int k = 0;
        for (; k < ctl.max_terms; ++k) {
            const double t = coef * (lz + psi_x - psi_1 - psi_n);
            const double yk = t - comp;
            const double s = sum + yk;
            comp = (s - sum) - yk;
            sum = s;
            first_abs += std::fabs(t);
            const double ratio = (x + k) / ((n + 1.0 + k) * (k + 1.0)) * z;
            coef *= ratio;
            psi_x += 1.0 / (x + k);
            psi_1 += 1.0 / (1.0 + k);
            psi_n += 1.0 / (n + 1.0 + k);
            if (k > 2 && ratio < 0.5 && std::fabs(coef) * (std::fabs(lz) + std::fabs(psi_x) + 2 * std::fabs(psi_n)) <=
                                             ctl.rel_tol * std::fabs(sum))
                break;
        }
        if (k == ctl.max_terms) throw convergence_error("tricomi_psi: log series did not converge");
        const double zp = std::pow(z, zpow);
        first = pre * sum * zp;
        first_abs *= std::fabs(pre) * zp;
    }
    double second = 0.0;
    if (n > 0) {
        // sum_{k=1}^n (k-1)! (1-x+k)_{n-k} / (n-k)! z^{-k} / Gamma(x)
        const double rg = recip_gamma(x);
        for (int k = 1; k <= n; ++k) {
            double fk = 1.0;
            for (int i = 2; i < k; ++i) fk *= i;
            double poch = 1.0;
            for (int i = 0; i < n - k; ++i) poch *= (1.0 - x + k + i);
            double fnk = 1.0;
            for (int i = 2; i <= n - k; ++i) fnk *= i;
            second += fk * poch / fnk * std::exp((zpow - k) * lz);
        }
        second *= rg;
    }
    const double v = first + second;
    const double err = (v == 0.0) ? inf : 64.0 * eps * (first_abs + std::fabs(second)) / std::fabs(v);
    return {v, false, err};
}

// M(x, y, -w) for large w: Gamma(y)/Gamma(y-x) w^{-x} 2F0(x, 1+x-y;; 1/w) plus the
// recessive Gamma(y)/Gamma(x) e^{-w} w^{x-y} term
inline SpecialValue kummer_neg_asymptotic(double x, double y, double w)
{
    const double a2 = 1.0 + x - y;
    double sum = 1.0, term = 1.0, next_abs = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double next = term * (x + k) * (a2 + k) / ((k + 1.0) * w);
        next_abs = std::fabs(next);
        if (next == 0.0 || next_abs >= std::fabs(term)) break;
        term = next;
        sum += term;
    }
    const double lw = std::log(w);
    const double err = next_abs / std::fabs(sum) + 4 * eps;
    const double smain = gamma_sign(y) * gamma_sign(y - x) * (sum < 0.0 ? -1.0 : 1.0);
    const double lmain = log_gamma(y) - log_gamma(y - x) - x * lw + std::log(std::fabs(sum));
    if (is_nonpositive_integer(x)) return {smain * std::exp(lmain), false, err};
    const double lrec = log_gamma(y) - log_gamma(x) - w + (x - y) * lw;
    if (smain > 0.0 && lrec - lmain < -40.0) return from_log(lmain, err);
    const double v = smain * std::exp(lmain) + gamma_sign(y) * gamma_sign(x) * std::exp(lrec);
    return {v, false, err * std::exp(lmain) / std::fabs(v)};
}

} // namespace detail

inline SpecialValue kummer_m(double x, double y, double z, const SeriesControl& ctl = {})
{
    ctl.validate();
    if (detail::is_nonpositive_integer(y)) throw pole_error("kummer_m: y is a nonpositive integer");
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) throw domain_error("kummer_m: non-finite argument");
    if (z < -ctl.asymptotic_switch && !detail::is_nonpositive_integer(x) && !detail::is_nonpositive_integer(y - x)) {
        const auto as = detail::kummer_neg_asymptotic(x, y, -z);
        if (as.est_error <= detail::psi_accept_factor * ctl.rel_tol) return as;
    }
    if (z < -1.0 && !detail::is_nonpositive_integer(x)) {
        // Kummer transformation, positive series
        const auto m = detail::hyp_series({y - x}, {y}, -z, ctl);
        if (m.log_scaled) return detail::from_log(z + m.value, m.est_error);
        if (m.value > 0.0) return detail::from_log(z + std::log(m.value), m.est_error);
        return {std::exp(z) * m.value, false, m.est_error};
    }
    return detail::hyp_series({x}, {y}, z, ctl);
}

inline SpecialValue gen_hyp(std::vector<double> a, std::vector<double> b, double z, const SeriesControl& ctl = {})
{
    ctl.validate();
    for (auto it = a.begin(); it != a.end();) {
        auto m = std::find(b.begin(), b.end(), *it);
        if (m != b.end()) {
            b.erase(m);
            it = a.erase(it);
        } else {
            ++it;
        }
    }
    for (double bj : b)
        if (detail::is_nonpositive_integer(bj)) throw pole_error("gen_hyp: denominator parameter is a nonpositive integer");
    if (a.size() > b.size() + 1 && z != 0.0)
        throw domain_error("gen_hyp: divergent series (p > q + 1)");
    if (a.size() == b.size() + 1 && std::fabs(z) >= 1.0)
        throw convergence_error("gen_hyp: |z| >= 1 outside the disc of convergence");
    return detail::hyp_series(a, b, z, ctl);
}

inline SpecialValue tricomi_psi(double x, double y, double z, const SeriesControl& ctl = {})
{
    ctl.validate();
    if (!(x > 0.0) || !std::isfinite(x)) throw domain_error("tricomi_psi: x must be positive");
    if (!(z > 0.0) || !std::isfinite(z)) throw domain_error("tricomi_psi: z must be positive");
    if (!std::isfinite(y)) throw domain_error("tricomi_psi: y must be finite");
    const double accept = detail::psi_accept_factor * ctl.rel_tol;

    const auto as = detail::psi_asymptotic(x, y, z);
    if (as.est_error <= accept) return as;
    if (z >= ctl.asymptotic_switch) return detail::psi_integral(x, y, z);

    const double n = std::nearbyint(y);
    if (y == n) {
        SpecialValue v;
        if (n >= 1.0)
            v = detail::psi_log_series(x, static_cast<int>(n) - 1, z, 0.0, ctl);
        else // z^{1-y} Psi(x-y+1, 2-y, z)
            v = detail::psi_log_series(x - y + 1.0, static_cast<int>(1.0 - n), z, 1.0 - y, ctl);
        if (v.est_error <= accept && v.value > 0.0) return v;
        return detail::psi_integral(x, y, z);
    }
    if (std::fabs(y - n) < detail::near_integer_floor) return detail::psi_integral(x, y, z);

    // reflection combination of two Kummer series
    const auto m1 = kummer_m(x, y, z, ctl);
    const auto m2 = kummer_m(1.0 + x - y, 2.0 - y, z, ctl);
    if (m1.log_scaled || m2.log_scaled) return detail::psi_integral(x, y, z);
    const double c1 = gamma_fn(1.0 - y) * recip_gamma(1.0 + x - y);
    const double c2 = gamma_fn(y - 1.0) * recip_gamma(x) * std::pow(z, 1.0 - y);
    const double t1 = c1 * m1.value, t2 = c2 * m2.value;
    const double v = t1 + t2;
    const double cond = (std::fabs(t1) + std::fabs(t2)) / std::fabs(v);
    const double err = cond * (std::max(m1.est_error, m2.est_error) + 32 * detail::eps);
    if (v > 0.0 && err <= accept) return {v, false, err};
    return detail::psi_integral(x, y, z);
}

inline double log_zolotarev_s(double u, double q)
{
    if (!(u > 0.0 && u < 1.0)) throw domain_error("zolotarev_s: u must lie in (0,1)");
    if (!(q > 0.0 && q < 2.0)) throw domain_error("zolotarev_s: q must lie in (0,2)");
    const double al = 0.5 * q;
    const double pi = std::numbers::pi;
    const double s_pu = (u > 0.5) ? std::sin(pi * (1.0 - u)) : std::sin(pi * u);
    const double s_au = std::sin(al * pi * u);
    const double s_bu = std::sin((1.0 - al) * pi * u);
    return (std::log(s_au) - std::log(s_pu)) / (1.0 - al) + std::log(s_bu) - std::log(s_au);
}

// Zolotarev function A(u) of the Kanter representation with alpha = q/2
inline double zolotarev_s(double u, double q) { return std::exp(log_zolotarev_s(u, q)); }

} // namespace gambel
