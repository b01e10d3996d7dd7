#include "icf/oracle.hpp"

#include "icf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace icf::oracle {

namespace {

void check_radius(Ambient ambient, double r0, int n) {
    if (n < 1) throw DomainError("dimension must be positive");
    if (!(r0 > 0.0)) throw DomainError("initial radius must be positive");
    if (ambient == Ambient::spherical && !(r0 < 0.5 * std::numbers::pi))
        throw DomainError("spherical geodesic radius must be below pi/2");
}

}  // namespace

double sphere_radius_rate(Ambient ambient, double alpha, double radius, int n) {
    switch (ambient) {
        case Ambient::euclidean: return std::pow(radius / n, alpha);
        case Ambient::hyperbolic: return std::pow(n / std::tanh(radius), -alpha);
        case Ambient::spherical: return std::pow(n / std::tan(radius), -alpha);
    }
    return 0.0;
}

double sphere_radius_rk4(Ambient ambient, double alpha, double r0, double t, double dt, int n) {
    check_radius(ambient, r0, n);
    if (t < 0.0) throw DomainError("time must be non-negative");
    const long steps = std::max(1L, static_cast<long>(std::ceil(t / dt - 1e-9)));
    const double h = t / steps;
    double r = r0;
    auto rate = [&](double x) {
        if (ambient == Ambient::spherical && !(x < 0.5 * std::numbers::pi))
            throw DomainError("spherical geodesic sphere reached the equator");
        return sphere_radius_rate(ambient, alpha, x, n);
    };
    for (long k = 0; k < steps; ++k) {
        const double a = rate(r);
        const double b = rate(r + 0.5 * h * a);
        const double c = rate(r + 0.5 * h * b);
        const double d = rate(r + h * c);
        r += h * (a + 2.0 * b + 2.0 * c + d) / 6.0;
    }
    if (ambient == Ambient::spherical && !(r < 0.5 * std::numbers::pi))
        throw DomainError("spherical geodesic sphere reached the equator");
    return r;
}

double spherical_blowup_time(double rho0, int n) {
    check_radius(Ambient::spherical, rho0, n);
    return -n * std::log(std::sin(rho0));
}

double sphere_radius(Ambient ambient, double alpha, double r0, double t, int n) {
    check_radius(ambient, r0, n);
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    if (t < 0.0) throw DomainError("time must be non-negative");
    switch (ambient) {
        case Ambient::euclidean:
            if (alpha == 1.0) return r0 * std::exp(t / n);
            return std::pow(std::pow(r0, 1.0 - alpha) + (1.0 - alpha) * std::pow(n, -alpha) * t, 1.0 / (1.0 - alpha));
        case Ambient::hyperbolic:
            if (alpha == 1.0) return std::asinh(std::sinh(r0) * std::exp(t / n));
            return sphere_radius_rk4(ambient, alpha, r0, t, 1e-5, n);
        case Ambient::spherical:
            if (alpha == 1.0) {
                if (t >= spherical_blowup_time(r0, n))
                    throw DomainError("t lies beyond the time the sphere reaches the equator");
                return std::asin(std::sin(r0) * std::exp(t / n));
            }
            return sphere_radius_rk4(ambient, alpha, r0, t, 1e-5, n);
    }
    return 0.0;
}

double sphere_support(Ambient ambient, double radius) {
    switch (ambient) {
        case Ambient::euclidean: return radius;
        case Ambient::hyperbolic: return std::tanh(radius);
        case Ambient::spherical: return std::tan(radius);
    }
    return 0.0;
}

FdReport fd_check(const curvfn::CurvatureFunction& f, std::span<const double> p, double step) {
    const int n = f.dim();
    if (static_cast<int>(p.size()) != n) throw DomainError("point has the wrong dimension");
    if (!(step > 0.0 && step < 1.0)) throw DomainError("relative step must lie in (0, 1)");
    const auto exact = f.evaluate(p);
    std::vector<double> x(p.begin(), p.end());
    const double pmax = *std::max_element(p.begin(), p.end());
    const double gscale = std::max(exact.grad.cwiseAbs().maxCoeff(), std::abs(exact.value) / pmax);
    const double hscale = std::max(exact.hess.cwiseAbs().maxCoeff(), std::abs(exact.value) / (pmax * pmax));

    FdReport rep;
    for (int i = 0; i < n; ++i) {
        const double h = step * p[i];
        x[i] = p[i] + h;
        const double fp = f.value(x);
        const auto gp = f.evaluate(x).grad;
        x[i] = p[i] - h;
        const double fm = f.value(x);
        const auto gm = f.evaluate(x).grad;
        x[i] = p[i];
        rep.grad_deviation = std::max(rep.grad_deviation, std::abs((fp - fm) / (2.0 * h) - exact.grad(i)) / gscale);
        for (int j = 0; j < n; ++j)
            rep.hess_deviation = std::max(rep.hess_deviation, std::abs((gp(j) - gm(j)) / (2.0 * h) - exact.hess(j, i)) / hscale);
    }
    return rep;
}

}  // namespace icf::oracle
