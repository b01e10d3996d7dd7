#pragma once

// Strictly convex hypersurfaces in the three space forms, represented by the
// support function of their image in the Euclidean chart.

#include "icf/curvfn.hpp"
#include "icf/sphgrid.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace icf::hypersurface {

using sphgrid::ScalarField;
using sphgrid::SphereGrid;
using sphgrid::Sym2;
using sphgrid::Vec2;

enum class Ambient { euclidean, hyperbolic, spherical };

std::string to_string(Ambient a);
/// Accepts euclidean, hyperbolic, spherical; throws ConfigError.
Ambient parse_ambient(std::string_view text);

struct SupportState {
    Ambient ambient = Ambient::euclidean;
    ScalarField s;
    double t = 0.0;
};

/// Per-node chart data derived from (s, grad s, tau).
struct NodeFrame {
    Sym2 winv;          // symmetrized inverse Weingarten matrix
    double chart = 1.0; // 1 - s^2 - |grad s|^2 (hyperbolic), 1 + s^2 + |grad s|^2 (spherical), 1 otherwise
    double prefactor = 1.0;  // factor multiplying F_*^alpha in the support equation
    double stiffness = 1.0;  // prefactor * congruence factor * largest eigenvalue of S
};

enum class NodeStatus { ok, outside_ball, not_convex };

/// Computes the inverse Weingarten matrix of one node. `tau_floor` is the
/// smallest accepted eigenvalue of tau.
NodeStatus node_frame(Ambient a, double s, Vec2 grad, const Sym2& tau, double tau_floor, NodeFrame& out);

/// W^{-1} at node k; throws StateInvalidError or ConvexityLostError.
Sym2 weingarten_inverse(const SphereGrid& g, const SupportState& state, int node);

struct CurvatureField {
    std::vector<Vec2> kappa;  // kappa.x <= kappa.y
    ScalarField F;
};

CurvatureField principal_curvatures(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f);

/// Ambient point per node. Euclidean: (0, Y); hyperbolic: hyperboloid point;
/// spherical: point of S^3 in R^4.
std::vector<std::array<double, 4>> embed(const SphereGrid& g, const SupportState& state);

struct ValidationReport {
    double min_tau_eig = 0.0;
    int min_tau_node = -1;
    double mean_s = 0.0;
    double min_s = 0.0;
    double max_Y2 = 0.0;           // max of s^2 + |grad s|^2
    double ball_margin = 1.0;      // 1 - max_Y2 for hyperbolic states, else 1
    int worst_ball_node = -1;
    bool convexity_lost = false;
    bool domain_violation = false;
    bool near_degenerate = false;  // hyperbolic margin below 1e-2
    bool valid() const { return !convexity_lost && !domain_violation; }
};

inline constexpr double kConvexityFloor = 1e-10;  // relative to mean(s)
inline constexpr double kBallMarginFloor = 1e-6;
inline constexpr double kNearDegenerate = 1e-2;

ValidationReport validate(const SphereGrid& g, const SupportState& state);

/// Throws the matching error when validate() reports a violation.
void require_valid(const SphereGrid& g, const SupportState& state);

struct PolarDual {
    SupportState state;
    /// For each target node, the point z of the original surface whose normal maps to it.
    std::vector<std::array<double, 3>> preimage;
};

/// Support function of the polar hypersurface of a spherical state, sampled
/// on the same grid by maximizing -<u, z> / s(z) over z.
PolarDual polar_dual_with_preimage(const SphereGrid& g, const SupportState& state);
SupportState polar_dual(const SphereGrid& g, const SupportState& state);

/// Sixth-order Lagrange interpolation of a grid field at the unit vector z.
double interpolate(const SphereGrid& g, const ScalarField& field, const double z[3]);

}  // namespace icf::hypersurface
