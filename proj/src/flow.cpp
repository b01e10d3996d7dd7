#include "icf/flow.hpp"

#include "icf/error.hpp"
#include "icf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace icf::flow {

using hypersurface::NodeFrame;
using hypersurface::NodeStatus;
using sphgrid::Sym2;
using sphgrid::Vec2;

void check_config(const FlowConfig& c) {
    if (c.f.dim() != 2) throw ConfigError("flows run on surfaces; the curvature function must have n = 2");
    if (!(c.t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (!(c.cfl > 0.0)) throw ConfigError("cfl must be positive");
    if (c.snap_every < 0.0) throw ConfigError("snapshot cadence must be non-negative");
    if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (c.normalized) {
        if (c.ambient != Ambient::euclidean) throw ConfigError("the normalized flow is defined in Euclidean space only");
        if (c.alpha != 1.0) throw ConfigError("the normalized flow requires alpha = 1");
    }
    if (!c.unsafe_alpha) {
        if (c.ambient == Ambient::spherical && c.alpha != 1.0)
            throw ConfigError("alpha must equal 1 in spherical space (got " + std::to_string(c.alpha) +
                              "); pass --unsafe-alpha to run anyway");
        if (c.ambient != Ambient::spherical && c.alpha > 1.0)
            throw ConfigError("alpha must lie in (0, 1] in Euclidean and hyperbolic space (got " + std::to_string(c.alpha) +
                              "); pass --unsafe-alpha to run anyway");
    }
}

namespace {

struct RowStats {
    double stiffness = 0.0;
    double q = std::numeric_limits<double>::infinity();
    double pinch = 1.0;
    double F_min = std::numeric_limits<double>::infinity();
    double F_max = 0.0;
    double max_Y2 = 0.0;
    int bad_node = -1;
    NodeStatus bad = NodeStatus::ok;
};

class Evaluator {
public:
    Evaluator(const SphereGrid& g, const curvfn::CurvatureFunction& f, double alpha, bool normalized)
        : g_(g), f_(f), alpha_(alpha), normalized_(normalized), rows_(g.I()) {}

    /// rhs and node statistics; throws on an invalid node.
    void eval(const SupportState& st, ScalarField& rhs, RhsStats& stats) {
        sphgrid::covariant_hessian(g_, st.s, d_);
        if (!rhs.matches(g_)) rhs = ScalarField(g_);
        const double floor = hypersurface::kConvexityFloor * sphgrid::reduce(g_, st.s, sphgrid::Reduction::mean);
        const int J = g_.J();
        const double n = f_.dim();
        parallel_for(0, g_.I(), [&](int i) {
            RowStats rs;
            NodeFrame fr;
            for (int j = 0; j < J; ++j) {
                const int k = g_.index(i, j);
                const double s = st.s[k];
                Sym2 tau = d_.hess[k];
                tau.xx += s;
                tau.yy += s;
                NodeStatus status = hypersurface::node_frame(st.ambient, s, d_.grad[k], tau, floor, fr);
                const Vec2 lam = sphgrid::eig2(fr.winv);
                if (status == NodeStatus::ok && !(lam.x > 0.0)) status = NodeStatus::not_convex;
                if (status != NodeStatus::ok) {
                    if (rs.bad_node < 0) {
                        rs.bad_node = k;
                        rs.bad = status;
                    }
                    rhs[k] = 0.0;
                    continue;
                }
                const double kap[2] = {1.0 / lam.y, 1.0 / lam.x};
                double grad[2];
                const double F = f_.eval_raw(kap, grad, nullptr);
                const double Fs = 1.0 / F;
                const double trace = Fs * Fs * (grad[0] * kap[0] * kap[0] + grad[1] * kap[1] * kap[1]);
                const double speed = alpha_ == 1.0 ? Fs : std::pow(Fs, alpha_);
                rhs[k] = fr.prefactor * speed - (normalized_ ? s / n : 0.0);
                const double stiff = alpha_ * (alpha_ == 1.0 ? 1.0 : std::pow(Fs, alpha_ - 1.0)) * trace * fr.stiffness;
                rs.stiffness = std::max(rs.stiffness, stiff);
                rs.q = std::min(rs.q, kap[0] / F);
                rs.pinch = std::max(rs.pinch, kap[1] / kap[0]);
                rs.F_min = std::min(rs.F_min, F);
                rs.F_max = std::max(rs.F_max, F);
                rs.max_Y2 = std::max(rs.max_Y2, s * s + d_.gradnorm2[k]);
            }
            rows_[i] = rs;
        });
        RowStats all;
        for (const auto& rs : rows_) {
            if (rs.bad_node >= 0 && (all.bad_node < 0 || rs.bad_node < all.bad_node)) {
                all.bad_node = rs.bad_node;
                all.bad = rs.bad;
            }
            all.stiffness = std::max(all.stiffness, rs.stiffness);
            all.q = std::min(all.q, rs.q);
            all.pinch = std::max(all.pinch, rs.pinch);
            all.F_min = std::min(all.F_min, rs.F_min);
            all.F_max = std::max(all.F_max, rs.F_max);
            all.max_Y2 = std::max(all.max_Y2, rs.max_Y2);
        }
        if (all.bad == NodeStatus::outside_ball)
            throw StateInvalidError("support point leaves the unit ball at node " + std::to_string(all.bad_node), all.bad_node, st.t);
        if (all.bad == NodeStatus::not_convex)
            throw ConvexityLostError("radii matrix is not positive definite at node " + std::to_string(all.bad_node),
                                     all.bad_node, st.t);
        stats = RhsStats{all.stiffness, all.q, all.pinch, all.F_min, all.F_max, all.max_Y2};
    }

    double dt_from(const RhsStats& stats, double cfl) const {
        return cfl * g_.h_min() * g_.h_min() / stats.stiffness;
    }

private:
    const SphereGrid& g_;
    const curvfn::CurvatureFunction& f_;
    double alpha_;
    bool normalized_;
    sphgrid::Derivatives d_;
    std::vector<RowStats> rows_;
};

void check_flow_inputs(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f) {
    if (!state.s.matches(g)) throw ConfigError("state does not match the grid");
    if (f.dim() != 2) throw ConfigError("flows run on surfaces; the curvature function must have n = 2");
}

void axpy(ScalarField& out, const ScalarField& x, double a, const ScalarField& y) {
    for (int k = 0; k < x.size(); ++k) out[k] = x[k] + a * y[k];
}

}  // namespace

ScalarField compute_rhs(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f, double alpha) {
    check_flow_inputs(g, state, f);
    Evaluator ev(g, f, alpha, false);
    ScalarField rhs(g);
    RhsStats stats;
    ev.eval(state, rhs, stats);
    return rhs;
}

ScalarField compute_rhs_normalized(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f,
                                   double alpha) {
    if (state.ambient != Ambient::euclidean) throw UnsupportedError("the normalized flow is defined in Euclidean space only");
    if (alpha != 1.0) throw ConfigError("the normalized flow requires alpha = 1");
    check_flow_inputs(g, state, f);
    Evaluator ev(g, f, alpha, true);
    ScalarField rhs(g);
    RhsStats stats;
    ev.eval(state, rhs, stats);
    return rhs;
}

double cfl_dt(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f, double alpha, double cfl) {
    check_flow_inputs(g, state, f);
    Evaluator ev(g, f, alpha, false);
    ScalarField rhs(g);
    RhsStats stats;
    ev.eval(state, rhs, stats);
    return ev.dt_from(stats, cfl);
}

SupportState step(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f, double alpha,
                  double dt, bool normalized) {
    check_flow_inputs(g, state, f);
    if (normalized && state.ambient != Ambient::euclidean)
        throw UnsupportedError("the normalized flow is defined in Euclidean space only");
    hypersurface::require_valid(g, state);
    Evaluator ev(g, f, alpha, normalized);
    ScalarField k1(g), k2(g);
    RhsStats stats;
    ev.eval(state, k1, stats);
    sphgrid::polar_filter(g, k1);
    SupportState mid{state.ambient, ScalarField(g), state.t + 0.5 * dt};
    axpy(mid.s, state.s, 0.5 * dt, k1);
    ev.eval(mid, k2, stats);
    sphgrid::polar_filter(g, k2);
    SupportState next{state.ambient, ScalarField(g), state.t + dt};
    axpy(next.s, state.s, dt, k2);
    hypersurface::require_valid(g, next);
    return next;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::t_end: return "t_end";
        case Termination::hyperbolic_margin: return "hyperbolic_margin";
        case Termination::spherical_equator: return "spherical_equator";
        case Termination::convexity_lost: return "convexity_lost";
        case Termination::step_cap: return "step_cap";
    }
    return "?";
}

std::optional<double> estimate_blowup_time(const std::vector<MonitorSample>& monitor) {
    if (monitor.size() < 3) return std::nullopt;
    const int e = static_cast<int>(monitor.size()) - 1;
    auto u = [&](int k) { return 1.0 / (monitor[k].max_Y * monitor[k].max_Y); };
    const double ue = u(e);
    int a = -1, b = -1;
    for (int k = e - 1; k >= 0; --k) {
        if (a < 0 && u(k) >= 2.0 * ue) a = k;
        if (u(k) >= 4.0 * ue) {
            b = k;
            break;
        }
    }
    if (a < 0 || b < 0 || b >= a) return std::nullopt;
    // Quadratic through (t_b, u_b), (t_a, u_a), (t_e, u_e), solved for u = 0.
    const double t0 = monitor[b].t, t1 = monitor[a].t, t2 = monitor[e].t;
    const double u0 = u(b), u1 = u(a), u2 = ue;
    const double d01 = (u1 - u0) / (t1 - t0), d12 = (u2 - u1) / (t2 - t1);
    const double c2 = (d12 - d01) / (t2 - t0);
    const double c1 = d12 + c2 * (t2 - t1);  // slope at t2
    // u(t2 + x) = u2 + c1 x + c2 x^2.
    const double linear = -u2 / c1;
    if (std::abs(c2 * linear * linear) < 1e-14 * std::abs(u2)) return t2 + linear;
    const double disc = c1 * c1 - 4.0 * c2 * u2;
    if (disc < 0.0) return t2 + linear;
    const double sq = std::sqrt(disc);
    const double x1 = (-c1 + sq) / (2.0 * c2), x2 = (-c1 - sq) / (2.0 * c2);
    const double x = std::abs(x1 - linear) < std::abs(x2 - linear) ? x1 : x2;
    return t2 + x;
}

FlowRun run(const SphereGrid& g, const FlowConfig& config, const SupportState& initial) {
    check_config(config);
    check_flow_inputs(g, initial, config.f);
    if (initial.ambient != config.ambient) throw ConfigError("initial state and configuration disagree on the ambient space");
    hypersurface::require_valid(g, initial);

    FlowRun out;
    out.config = config;
    Evaluator ev(g, config.f, config.alpha, config.normalized);
    SupportState state = initial;
    ScalarField k1(g), k2(g);
    SupportState mid{state.ambient, ScalarField(g), 0.0};
    RhsStats stats;

    auto record = [&](const SupportState& st) {
        out.snapshots.push_back(st);
        out.records.push_back(diagnostics::snapshot(g, st, config.f));
    };
    record(state);

    const double t0 = initial.t;
    const double t_stop = t0 + config.t_end;
    long snap_index = 1;
    auto next_mark = [&]() {
        if (config.snap_every <= 0.0) return t_stop;
        return std::min(t_stop, t0 + snap_index * config.snap_every);
    };

    try {
        while (true) {
            ev.eval(state, k1, stats);
            out.monitor.push_back(MonitorSample{state.t, stats.q, stats.pinch, stats.F_min, stats.F_max, std::sqrt(stats.max_Y2)});
            if (state.t >= t_stop) {
                out.termination = Termination::t_end;
                break;
            }
            if (config.ambient == Ambient::hyperbolic && 1.0 - stats.max_Y2 < config.stop.hyperbolic_margin) {
                out.termination = Termination::hyperbolic_margin;
                break;
            }
            if (config.ambient == Ambient::spherical && std::sqrt(stats.max_Y2) >= config.stop.spherical_max_Y) {
                out.termination = Termination::spherical_equator;
                break;
            }
            if (out.steps >= config.stop.step_cap) {
                out.termination = Termination::step_cap;
                break;
            }
            const double mark = next_mark();
            double dt = config.dt_fixed > 0.0 ? config.dt_fixed : ev.dt_from(stats, config.cfl);
            if (config.ambient == Ambient::hyperbolic && config.dt_fixed <= 0.0) {
                // Near the ball boundary the step is limited by the remaining gap, not by stiffness.
                double speed = 0.0;
                for (double v : k1.values()) speed = std::max(speed, std::abs(v));
                const double gap = 1.0 - std::sqrt(stats.max_Y2);
                if (speed > 0.0) dt = std::min(dt, 0.25 * gap / speed);
            }
            bool lands = false;
            if (state.t + dt >= mark - 1e-12 * std::max(1.0, std::abs(mark))) {
                dt = mark - state.t;
                lands = true;
            }
            sphgrid::polar_filter(g, k1);
            mid.t = state.t + 0.5 * dt;
            axpy(mid.s, state.s, 0.5 * dt, k1);
            ev.eval(mid, k2, stats);
            sphgrid::polar_filter(g, k2);
            axpy(state.s, state.s, dt, k2);
            state.t = lands ? mark : state.t + dt;
            ++out.steps;
            if (lands) {
                hypersurface::require_valid(g, state);
                record(state);
                ++snap_index;
            }
        }
    } catch (const ConvexityLostError& e) {
        out.termination = Termination::convexity_lost;
        out.message = e.what();
        out.failed_node = e.node();
    } catch (const StateInvalidError& e) {
        if (config.ambient != Ambient::hyperbolic) throw;
        out.termination = Termination::hyperbolic_margin;
        out.message = e.what();
        out.failed_node = e.node();
    }

    if (out.snapshots.back().t != state.t && out.termination != Termination::convexity_lost) {
        try {
            record(state);
        } catch (const Error&) {
        }
    }
    if (config.ambient == Ambient::spherical && out.termination == Termination::spherical_equator)
        out.T_star_estimate = estimate_blowup_time(out.monitor);
    return out;
}

DualityResidual verify_polar_duality_residual(const SphereGrid& g, const std::vector<SupportState>& snapshots,
                                              const curvfn::CurvatureFunction& f) {
    if (snapshots.size() < 3) throw ConfigError("duality residual needs at least three snapshots");
    for (const auto& s : snapshots)
        if (s.ambient != Ambient::spherical) throw UnsupportedError("duality residual is defined for spherical runs only");
    std::vector<SupportState> duals;
    duals.reserve(snapshots.size());
    for (const auto& s : snapshots) duals.push_back(hypersurface::polar_dual(g, s));

    DualityResidual out;
    for (std::size_t k = 1; k + 1 < duals.size(); ++k) {
        const double h1 = duals[k].t - duals[k - 1].t, h2 = duals[k + 1].t - duals[k].t;
        const double wa = -h2 / (h1 * (h1 + h2)), wb = (h2 - h1) / (h1 * h2), wc = h1 / (h2 * (h1 + h2));
        const auto& st = duals[k];
        const auto d = sphgrid::covariant_hessian(g, st.s);
        const double floor = hypersurface::kConvexityFloor * sphgrid::reduce(g, st.s, sphgrid::Reduction::mean);
        double worst = 0.0;
        for (int n = 0; n < g.size(); ++n) {
            const double s = st.s[n];
            Sym2 tau = d.hess[n];
            tau.xx += s;
            tau.yy += s;
            NodeFrame fr;
            const auto status = hypersurface::node_frame(Ambient::spherical, s, d.grad[n], tau, floor, fr);
            if (status != NodeStatus::ok)
                throw ConvexityLostError("polar dual is not strictly convex at node " + std::to_string(n), n, st.t);
            const Vec2 lam = sphgrid::eig2(fr.winv);
            const double radii[2] = {lam.x, lam.y};
            const double dsdt = wa * duals[k - 1].s[n] + wb * s + wc * duals[k + 1].s[n];
            const double R = dsdt + fr.prefactor / f.eval_raw(radii, nullptr, nullptr);
            worst = std::max(worst, std::abs(R));
        }
        out.t.push_back(st.t);
        out.max_residual.push_back(worst);
    }
    return out;
}

DualityResidual verify_polar_duality_residual(const SphereGrid& g, const FlowRun& run) {
    if (run.config.ambient != Ambient::spherical) throw UnsupportedError("duality residual is defined for spherical runs only");
    return verify_polar_duality_residual(g, run.snapshots, run.config.f);
}

}  // namespace icf::flow
