#pragma once

#include <gambel/errors.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace gambel {

inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// independent stream seed for (base, stream) pairs
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t s = base;
    const std::uint64_t a = splitmix64(s);
    s = a ^ (stream * 0xd1b54a32d192ed03ULL);
    return splitmix64(s);
}

// Small wrapper over mt19937_64. Variate algorithms are written out here so
// that draws do not depend on the standard library's distribution classes.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform on the open interval (0,1)
    double uniform()
    {
        for (;;) {
            const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double exponential() { return -std::log(uniform()); }

    double rademacher() { return (eng_() >> 63) ? 1.0 : -1.0; }

    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // log of a Gamma(shape, 1) draw; stays finite for tiny shapes
    double log_gamma_variate(double shape)
    {
        if (!(shape > 0.0)) throw domain_error("gamma variate: shape must be positive");
        if (shape < 1.0) {
            const double lu = std::log(uniform());
            return log_gamma_variate(shape + 1.0) + lu / shape;
        }
        // Marsaglia-Tsang
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
        }
    }

    double gamma(double shape) { return std::exp(log_gamma_variate(shape)); }
    double gamma(double shape, double rate) { return gamma(shape) / rate; }

    double beta(double a, double b)
    {
        const double la = log_gamma_variate(a), lb = log_gamma_variate(b);
        // a/(a+b) with a = e^la, b = e^lb
        return 1.0 / (1.0 + std::exp(lb - la));
    }

    // inverse gamma with shape and scale
    double inv_gamma(double shape, double scale) { return scale / gamma(shape); }

    double inverse_gaussian(double mean, double shape)
    {
        // Michael, Schucany and Haas
        const double nu = normal();
        const double y = nu * nu;
        const double x = mean + mean * mean * y / (2.0 * shape) -
                         mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
        if (uniform() <= mean / (mean + x)) return x;
        return mean * mean / x;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace gambel
