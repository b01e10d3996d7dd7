#pragma once

// Reference solutions: geodesic spheres under the flow, and finite-difference
// checks of curvature-function derivatives.

#include "icf/curvfn.hpp"
#include "icf/hypersurface.hpp"

#include <span>

namespace icf::oracle {

using hypersurface::Ambient;

/// Radius at time t of a geodesic sphere moving with speed F^{-alpha},
/// F = n * kappa on umbilic surfaces. Euclidean radius r; hyperbolic and
/// spherical geodesic radius rho.
///
/// Euclidean:  r' = (r / n)^alpha.
/// Hyperbolic: rho' = (n coth rho)^{-alpha}; for alpha = 1, sinh rho grows like e^{t/n},
///             otherwise classical RK4 with step 1e-5.
/// Spherical:  rho' = tan(rho) / n (alpha = 1 only), sin rho = sin rho0 e^{t/n}.
double sphere_radius(Ambient ambient, double alpha, double r0, double t, int n = 2);

/// Time at which a spherical geodesic sphere reaches the equator: -n ln sin rho0.
double spherical_blowup_time(double rho0, int n = 2);

/// Right-hand side of the radius ODE.
double sphere_radius_rate(Ambient ambient, double alpha, double radius, int n = 2);

/// Classical RK4 integration of the radius ODE with a fixed step.
double sphere_radius_rk4(Ambient ambient, double alpha, double r0, double t, double dt, int n = 2);

/// Support value of the geodesic sphere in the ambient's Euclidean chart:
/// r, tanh rho or tan rho.
double sphere_support(Ambient ambient, double radius);

struct FdReport {
    // Max abs difference over a scale: max(|grad|_inf, f / p_max) for the
    // gradient and max(|hess|_inf, f / p_max^2) for the Hessian.
    double grad_deviation = 0.0;
    double hess_deviation = 0.0;
    double max_deviation() const { return grad_deviation > hess_deviation ? grad_deviation : hess_deviation; }
};

/// Central differences with relative step `step * p_i`: the gradient from
/// values, the Hessian from analytic gradients.
FdReport fd_check(const curvfn::CurvatureFunction& f, std::span<const double> p, double step = 1e-5);

}  // namespace icf::oracle
