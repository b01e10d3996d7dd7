#pragma once

// Scalar summaries of support states and analyses of their time series.

#include "icf/curvfn.hpp"
#include "icf/hypersurface.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace icf::diagnostics {

using hypersurface::Ambient;
using hypersurface::SupportState;
using sphgrid::SphereGrid;

struct DiagnosticsRecord {
    double t = 0.0;
    double kappa_min = 0.0;
    double kappa_max = 0.0;
    double pinch = 1.0;  // max over nodes of kappa_2 / kappa_1
    double q = 0.0;      // min over nodes of kappa_1 / F
    double F_min = 0.0;
    double F_max = 0.0;
    double dev = 0.0;    // max |kappa_i - 1|; NaN outside hyperbolic space
    double osc = 0.0;    // (max s - min s) / mean s
    double convexity_margin = 0.0;  // min eigenvalue of tau over mean s
};

DiagnosticsRecord snapshot(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f);

/// Record from an already extracted curvature field.
DiagnosticsRecord summarize(const SphereGrid& g, const SupportState& state, const hypersurface::CurvatureField& cf,
                            double convexity_margin);

struct Verdict {
    bool pass = true;
    int first_violation = -1;  // index of the first offending record
    double worst = 0.0;        // most negative relative change (monotonicity) or largest ratio (pinch bound)
};

inline constexpr double kMonotoneTol = 1e-6;
inline constexpr double kPinchTol = 1e-4;

/// Pass iff q[k+1] >= q[k] - tol * q[k] for all k.
Verdict check_monotone_q(std::span<const double> q, double tol = kMonotoneTol);
Verdict check_monotone_q(const std::vector<DiagnosticsRecord>& series, double tol = kMonotoneTol);

/// Pass iff pinch(t) <= pinch(0) * (1 + tol) throughout.
Verdict check_pinch_bound(std::span<const double> pinch, double tol = kPinchTol);
Verdict check_pinch_bound(const std::vector<DiagnosticsRecord>& series, double tol = kPinchTol);

struct PinchingConstant {
    double value = 0.0;    // largest sampled tau_max / tau_min on the feasible set
    bool bounded = false;  // false when the estimate never stabilized
    std::vector<double> history;  // estimate after each refinement round
};

/// Empirical sup of tau_max / tau_min over {tau : tau_max <= C f_*(tau)}.
PinchingConstant pinching_bound_constant(const curvfn::CurvatureFunction& f, double C, std::uint64_t seed = 1);

struct DecayFit {
    double rate = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;  // RMS residual of the log-linear fit
    int points = 0;
    bool already_round = false;
};

inline constexpr double kDecayWindow = 0.5;
inline constexpr int kMinDecayPoints = 10;

/// Least-squares fit of log y = log A - rate * t.
DecayFit fit_exponential(std::span<const double> t, std::span<const double> y);

/// Decay of dev (hyperbolic, window dev < 0.5) or osc (Euclidean). Returns
/// already_round when the pinch never departs from 1 by more than 1e-9;
/// throws DomainError when fewer than 10 records fall in the window.
DecayFit fit_decay(const std::vector<DiagnosticsRecord>& series, Ambient ambient);

/// Column names in output order.
const std::vector<std::string>& csv_columns();
std::string csv_row(const DiagnosticsRecord& r);
void write_csv(const std::vector<DiagnosticsRecord>& series, const std::string& path);

}  // namespace icf::diagnostics
