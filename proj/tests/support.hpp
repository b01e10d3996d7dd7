#pragma once

// Closed-form references shared by the test binaries.

#include "icf/hypersurface.hpp"
#include "icf/sphgrid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace testsupport {

using Vec3 = Eigen::Vector3d;

/// Orthonormal frame (e_theta, e_phi) at grid node (i, j).
inline void frame(const icf::sphgrid::SphereGrid& g, int i, int j, Vec3& z, Vec3& et, Vec3& ep) {
    const double st = g.sin_theta(j), ct = g.cos_theta(j), sp = std::sin(g.phi(i)), cp = std::cos(g.phi(i));
    z = Vec3(st * cp, st * sp, ct);
    et = Vec3(ct * cp, ct * sp, -st);
    ep = Vec3(-sp, cp, 0.0);
}

/// Any orthonormal tangent pair at the unit vector z.
inline void tangent_basis(const Vec3& z, Vec3& e1, Vec3& e2) {
    const Vec3 ref = std::abs(z.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    e1 = (ref - ref.dot(z) * z).normalized();
    e2 = z.cross(e1);
}

/// Support function sqrt(z^T A z) of the ellipsoid with semi-axes (a, b, c).
struct Ellipsoid {
    double a, b, c;

    Eigen::Matrix3d A() const { return Eigen::Vector3d(a * a, b * b, c * c).asDiagonal(); }
    double s(const Vec3& z) const { return std::sqrt(z.dot(A() * z)); }

    /// Tangential gradient of s at z.
    Vec3 grad(const Vec3& z) const {
        const Vec3 g = A() * z / s(z);
        return g - g.dot(z) * z;
    }

    /// Radii matrix hess s + s Id as the ambient Hessian of the 1-homogeneous
    /// extension, restricted to the tangent plane.
    Eigen::Matrix2d tau(const Vec3& z, const Vec3& e1, const Vec3& e2) const {
        const double S = s(z);
        const Vec3 Az = A() * z;
        const Eigen::Matrix3d H = A() / S - Az * Az.transpose() / (S * S * S);
        Eigen::Matrix2d t;
        t << e1.dot(H * e1), e1.dot(H * e2), e2.dot(H * e1), e2.dot(H * e2);
        return t;
    }

    /// Sorted principal radii (eigenvalues of the inverse Weingarten map) in
    /// the given ambient, built from the unsymmetrized product S tau.
    Eigen::Vector2d radii(icf::hypersurface::Ambient amb, const Vec3& z) const {
        Vec3 e1, e2;
        tangent_basis(z, e1, e2);
        const Eigen::Matrix2d t = tau(z, e1, e2);
        const Vec3 g3 = grad(z);
        const Eigen::Vector2d g(g3.dot(e1), g3.dot(e2));
        const double sv = s(z), g2 = g.squaredNorm();
        Eigen::Matrix2d M = t;
        if (amb == icf::hypersurface::Ambient::hyperbolic) {
            const double D = 1 - sv * sv - g2;
            M = std::sqrt((1 - sv * sv) / D) * (Eigen::Matrix2d::Identity() + g * g.transpose() / D) * t;
        } else if (amb == icf::hypersurface::Ambient::spherical) {
            const double E = 1 + sv * sv + g2;
            M = std::sqrt((1 + sv * sv) / E) * (Eigen::Matrix2d::Identity() - g * g.transpose() / E) * t;
        }
        Eigen::EigenSolver<Eigen::Matrix2d> es(M);
        Eigen::Vector2d ev = es.eigenvalues().real();
        if (ev(0) > ev(1)) std::swap(ev(0), ev(1));
        return ev;
    }

    /// Sorted principal curvatures (k1 <= k2).
    Eigen::Vector2d kappa(icf::hypersurface::Ambient amb, const Vec3& z) const {
        const Eigen::Vector2d r = radii(amb, z);
        return Eigen::Vector2d(1.0 / r(1), 1.0 / r(0));
    }

    icf::sphgrid::ScalarField field(const icf::sphgrid::SphereGrid& g) const {
        return icf::sphgrid::sample(g, [this](double x, double y, double z) { return s(Vec3(x, y, z)); });
    }
};

inline double observed_order(double coarse, double fine, double ratio = 2.0) { return std::log(coarse / fine) / std::log(ratio); }

}  // namespace testsupport
