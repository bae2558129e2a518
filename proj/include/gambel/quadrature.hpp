#pragma once

#include <gambel/errors.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace gambel::quad {

// Thin wrappers over Boost.Math. Each integrator object caches abscissae, so
// they are kept per thread.

// (a, b) finite, integrable endpoint singularities allowed
template <class F>
double tanh_sinh(F f, double a, double b, double tol = 1e-12, double* err = nullptr)
{
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    double e = 0.0, l1 = 0.0;
    const double v = ts.integrate(f, a, b, tol, &e, &l1);
    if (err) *err = e;
    if (!std::isfinite(v)) throw convergence_error("quadrature: non-finite result");
    return v;
}

// (a, inf)
template <class F>
double to_infinity(F f, double a, double tol = 1e-12, double* err = nullptr)
{
    static thread_local boost::math::quadrature::exp_sinh<double> es(12);
    double e = 0.0, l1 = 0.0;
    const double v = es.integrate([&](double t) { return f(a + t); }, tol, &e, &l1);
    if (err) *err = e;
    if (!std::isfinite(v)) throw convergence_error("quadrature: non-finite result");
    return v;
}

// smooth integrand on a finite interval
template <class F>
double adaptive(F f, double a, double b, double tol = 1e-12, double* err = nullptr)
{
    double e = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &e);
    if (err) *err = e;
    if (!std::isfinite(v)) throw convergence_error("quadrature: non-finite result");
    return v;
}

// fixed 20-point Gauss-Legendre on [a, b]
template <class F>
double gauss20(F f, double a, double b)
{
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

} // namespace gambel::quad
