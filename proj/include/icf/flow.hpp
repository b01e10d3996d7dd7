#pragma once

// Explicit integration of the support-function form of inverse curvature
// flows in Euclidean, hyperbolic and spherical space.

#include "icf/curvfn.hpp"
#include "icf/diagnostics.hpp"
#include "icf/hypersurface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace icf::flow {

using hypersurface::Ambient;
using hypersurface::SupportState;
using sphgrid::ScalarField;
using sphgrid::SphereGrid;

struct StopThresholds {
    double hyperbolic_margin = 1e-4;
    double spherical_max_Y = 50.0;
    long step_cap = 20'000'000;
};

struct FlowConfig {
    Ambient ambient = Ambient::euclidean;
    curvfn::CurvatureFunction f = curvfn::construct("power-mean:1", 2);
    double alpha = 1.0;
    double t_end = 1.0;
    double cfl = 0.2;
    /// Snapshot cadence; zero keeps only the initial and final states.
    double snap_every = 0.0;
    /// Rescaled Euclidean flow whose fixed points are round spheres.
    bool normalized = false;
    /// Allows alpha outside the range covered by the convergence theory.
    bool unsafe_alpha = false;
    /// Overrides the CFL step when positive.
    double dt_fixed = 0.0;
    StopThresholds stop;
};

/// Throws ConfigError for an inconsistent configuration; the message states
/// the admissible alpha range.
void check_config(const FlowConfig& config);

/// Node maxima gathered while evaluating the right-hand side.
struct RhsStats {
    double stiffness = 0.0;  // max of alpha F_*^{alpha-1} tr(dF_*) c_amb
    double q = 0.0;
    double pinch = 1.0;
    double F_min = 0.0;
    double F_max = 0.0;
    double max_Y2 = 0.0;
};

ScalarField compute_rhs(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f, double alpha);

/// F_*(tau) - s / n, Euclidean states with alpha = 1 only.
ScalarField compute_rhs_normalized(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f,
                                   double alpha = 1.0);

/// cfl * h_min^2 / max over nodes of alpha F_*^{alpha-1} tr(dF_*) c_amb.
double cfl_dt(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f, double alpha, double cfl);

/// One explicit midpoint step; the result is validated.
SupportState step(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f, double alpha,
                  double dt, bool normalized = false);

enum class Termination { t_end, hyperbolic_margin, spherical_equator, convexity_lost, step_cap };
std::string to_string(Termination t);

struct MonitorSample {
    double t = 0.0;
    double q = 0.0;
    double pinch = 1.0;
    double F_min = 0.0;
    double F_max = 0.0;
    double max_Y = 0.0;
};

struct FlowRun {
    FlowConfig config;
    std::vector<SupportState> snapshots;
    std::vector<diagnostics::DiagnosticsRecord> records;  // one per snapshot
    std::vector<MonitorSample> monitor;                   // one per accepted step
    Termination termination = Termination::t_end;
    std::string message;
    long steps = 0;
    int failed_node = -1;
    std::optional<double> T_star_estimate;  // spherical runs stopped near the equator
};

FlowRun run(const SphereGrid& g, const FlowConfig& config, const SupportState& initial);

/// Blow-up time from the tail of the max|Y| series, extrapolating 1/max|Y|^2 to zero.
std::optional<double> estimate_blowup_time(const std::vector<MonitorSample>& monitor);

struct DualityResidual {
    std::vector<double> t;
    std::vector<double> max_residual;
};

/// Residual of the contracting dual flow evaluated on the polar duals of the
/// snapshots of a spherical run, at every interior snapshot.
DualityResidual verify_polar_duality_residual(const SphereGrid& g, const std::vector<SupportState>& snapshots,
                                              const curvfn::CurvatureFunction& f);
DualityResidual verify_polar_duality_residual(const SphereGrid& g, const FlowRun& run);

}  // namespace icf::flow
