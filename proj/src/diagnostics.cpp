#include "icf/diagnostics.hpp"

#include "icf/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace icf::diagnostics {

DiagnosticsRecord summarize(const SphereGrid& g, const SupportState& state, const hypersurface::CurvatureField& cf,
                            double convexity_margin) {
    const double inf = std::numeric_limits<double>::infinity();
    DiagnosticsRecord r;
    r.t = state.t;
    r.kappa_min = inf;
    r.kappa_max = -inf;
    r.pinch = 1.0;
    r.q = inf;
    r.F_min = inf;
    r.F_max = -inf;
    r.dev = state.ambient == Ambient::hyperbolic ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < g.size(); ++k) {
        const auto kap = cf.kappa[k];
        r.kappa_min = std::min(r.kappa_min, kap.x);
        r.kappa_max = std::max(r.kappa_max, kap.y);
        r.pinch = std::max(r.pinch, kap.y / kap.x);
        r.q = std::min(r.q, kap.x / cf.F[k]);
        r.F_min = std::min(r.F_min, cf.F[k]);
        r.F_max = std::max(r.F_max, cf.F[k]);
        if (state.ambient == Ambient::hyperbolic)
            r.dev = std::max({r.dev, std::abs(kap.x - 1.0), std::abs(kap.y - 1.0)});
    }
    const double mean = sphgrid::reduce(g, state.s, sphgrid::Reduction::mean);
    r.osc = (sphgrid::reduce(g, state.s, sphgrid::Reduction::max) - sphgrid::reduce(g, state.s, sphgrid::Reduction::min)) / mean;
    r.convexity_margin = convexity_margin;
    return r;
}

DiagnosticsRecord snapshot(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f) {
    const auto rep = hypersurface::validate(g, state);
    const auto cf = hypersurface::principal_curvatures(g, state, f);
    return summarize(g, state, cf, rep.min_tau_eig / rep.mean_s);
}

Verdict check_monotone_q(std::span<const double> q, double tol) {
    Verdict v;
    for (std::size_t k = 0; k + 1 < q.size(); ++k) {
        const double rel = (q[k + 1] - q[k]) / std::abs(q[k]);
        v.worst = std::min(v.worst, rel);
        if (!(q[k + 1] >= q[k] - tol * std::abs(q[k])) && v.pass) {
            v.pass = false;
            v.first_violation = static_cast<int>(k + 1);
        }
    }
    return v;
}

Verdict check_monotone_q(const std::vector<DiagnosticsRecord>& series, double tol) {
    std::vector<double> q(series.size());
    std::transform(series.begin(), series.end(), q.begin(), [](const auto& r) { return r.q; });
    return check_monotone_q(q, tol);
}

Verdict check_pinch_bound(std::span<const double> pinch, double tol) {
    Verdict v;
    if (pinch.empty()) return v;
    v.worst = 1.0;
    for (std::size_t k = 0; k < pinch.size(); ++k) {
        v.worst = std::max(v.worst, pinch[k] / pinch[0]);
        if (!(pinch[k] <= pinch[0] * (1.0 + tol)) && v.pass) {
            v.pass = false;
            v.first_violation = static_cast<int>(k);
        }
    }
    return v;
}

Verdict check_pinch_bound(const std::vector<DiagnosticsRecord>& series, double tol) {
    std::vector<double> p(series.size());
    std::transform(series.begin(), series.end(), p.begin(), [](const auto& r) { return r.pinch; });
    return check_pinch_bound(p, tol);
}

PinchingConstant pinching_bound_constant(const curvfn::CurvatureFunction& f, double C, std::uint64_t seed) {
    if (!(C > 0.0)) throw ConfigError("pinching constant C must be positive");
    const int n = f.dim();
    std::mt19937_64 rng(seed);
    std::vector<double> tau(n);
    auto feasible = [&](const std::vector<double>& t) {
        const double mx = *std::max_element(t.begin(), t.end());
        return mx <= C * f.dual_value(t);
    };

    // Pushes the smallest component of a feasible point down to the constraint
    // boundary (or to lo) and returns the resulting ratio.
    auto refine = [&](std::vector<double> t, double lo) {
        const int m = static_cast<int>(std::min_element(t.begin(), t.end()) - t.begin());
        double good = t[m];
        t[m] = lo;
        if (feasible(t)) return 1.0 / lo;
        double bad = lo;
        for (int it = 0; it < 200 && good / bad > 1.0 + 1e-15; ++it) {
            const double mid = std::sqrt(good * bad);
            t[m] = mid;
            (feasible(t) ? good : bad) = mid;
        }
        return 1.0 / good;
    };

    PinchingConstant out;
    const int per_round = n == 2 ? 2000 : 5000;
    double lo = 1.0;
    double best = 1.0;
    for (int round = 0; round < 15; ++round) {
        lo *= 0.1;
        std::uniform_real_distribution<double> comp(std::log(lo), 0.0);
        std::uniform_int_distribution<int> which(0, n - 1);
        // The ray (t, 1, ..., 1) first, then random points with a unit maximum.
        std::fill(tau.begin(), tau.end(), 1.0);
        tau[0] = std::sqrt(lo);
        if (feasible(tau)) best = std::max(best, refine(tau, lo));
        for (int s = 0; s < per_round; ++s) {
            for (auto& v : tau) v = std::exp(comp(rng));
            tau[which(rng)] = 1.0;
            if (feasible(tau)) best = std::max(best, refine(tau, lo));
        }
        out.history.push_back(best);
        if (out.history.size() >= 2) {
            const double prev = out.history[out.history.size() - 2];
            if (std::abs(best - prev) <= 0.01 * prev && best < 0.5 / lo) {
                out.value = best;
                out.bounded = true;
                return out;
            }
        }
    }
    out.value = best;
    out.bounded = false;
    return out;
}

DecayFit fit_exponential(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw DomainError("time and value series differ in length");
    const int n = static_cast<int>(t.size());
    if (n < 2) throw DomainError("need at least two points for a decay fit");
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (int k = 0; k < n; ++k) {
        if (!(y[k] > 0.0)) throw DomainError("decay fit needs positive values");
        const double ly = std::log(y[k]);
        st += t[k];
        sy += ly;
        stt += t[k] * t[k];
        sty += t[k] * ly;
    }
    const double denom = n * stt - st * st;
    if (!(std::abs(denom) > 0.0)) throw DomainError("decay fit needs distinct times");
    const double slope = (n * sty - st * sy) / denom;
    const double icpt = (sy - slope * st) / n;
    double ss = 0.0;
    for (int k = 0; k < n; ++k) {
        const double r = std::log(y[k]) - (icpt + slope * t[k]);
        ss += r * r;
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.amplitude = std::exp(icpt);
    fit.residual = std::sqrt(ss / n);
    fit.points = n;
    return fit;
}

DecayFit fit_decay(const std::vector<DiagnosticsRecord>& series, Ambient ambient) {
    if (ambient == Ambient::spherical) throw UnsupportedError("no decay law is fitted for spherical runs");
    const bool round = !series.empty() && std::all_of(series.begin(), series.end(), [](const auto& r) { return r.pinch - 1.0 <= 1e-9; });
    if (round) {
        DecayFit fit;
        fit.already_round = true;
        fit.rate = std::numeric_limits<double>::quiet_NaN();
        fit.points = static_cast<int>(series.size());
        return fit;
    }
    std::vector<double> t, y;
    for (const auto& r : series) {
        const double v = ambient == Ambient::hyperbolic ? r.dev : r.osc;
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        if (ambient == Ambient::hyperbolic && !(v < kDecayWindow)) continue;
        t.push_back(r.t);
        y.push_back(v);
    }
    if (static_cast<int>(t.size()) < kMinDecayPoints)
        throw DomainError("decay window holds " + std::to_string(t.size()) + " records, need at least " +
                          std::to_string(kMinDecayPoints));
    return fit_exponential(t, y);
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {"t", "kappa_min", "kappa_max", "pinch", "q",
                                                  "F_min", "F_max", "dev", "osc", "convexity_margin"};
    return cols;
}

std::string csv_row(const DiagnosticsRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.kappa_min,
                  r.kappa_max, r.pinch, r.q, r.F_min, r.F_max, r.dev, r.osc, r.convexity_margin);
    return buf;
}

void write_csv(const std::vector<DiagnosticsRecord>& series, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open " + path + " for writing");
    const auto& cols = csv_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) std::fprintf(fp, "%s%s", c ? "," : "", cols[c].c_str());
    std::fprintf(fp, "\n");
    for (const auto& r : series) std::fprintf(fp, "%s\n", csv_row(r).c_str());
    std::fclose(fp);
}

}  // namespace icf::diagnostics
