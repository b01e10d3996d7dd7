#include "icf/hypersurface.hpp"

#include "icf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace icf::hypersurface {

std::string to_string(Ambient a) {
    switch (a) {
        case Ambient::euclidean: return "euclidean";
        case Ambient::hyperbolic: return "hyperbolic";
        case Ambient::spherical: return "spherical";
    }
    return "?";
}

Ambient parse_ambient(std::string_view text) {
    if (text == "euclidean") return Ambient::euclidean;
    if (text == "hyperbolic") return Ambient::hyperbolic;
    if (text == "spherical") return Ambient::spherical;
    throw ConfigError("unknown ambient space '" + std::string(text) + "' (expected euclidean, hyperbolic or spherical)");
}

namespace {

// R T R for symmetric R = I + c g g^T.
Sym2 congruence(const Sym2& T, Vec2 g, double c) {
    const double r11 = 1.0 + c * g.x * g.x, r12 = c * g.x * g.y, r22 = 1.0 + c * g.y * g.y;
    const double m11 = r11 * T.xx + r12 * T.xy, m12 = r11 * T.xy + r12 * T.yy;
    const double m21 = r12 * T.xx + r22 * T.xy, m22 = r12 * T.xy + r22 * T.yy;
    const double a = m11 * r11 + m12 * r12;
    const double b = 0.5 * ((m11 * r12 + m12 * r22) + (m21 * r11 + m22 * r12));
    const double d = m21 * r12 + m22 * r22;
    return Sym2{a, b, d};
}

}  // namespace

NodeStatus node_frame(Ambient a, double s, Vec2 grad, const Sym2& tau, double tau_floor, NodeFrame& out) {
    const double g2 = grad.x * grad.x + grad.y * grad.y;
    switch (a) {
        case Ambient::euclidean:
            out.winv = tau;
            out.chart = out.prefactor = out.stiffness = 1.0;
            break;
        case Ambient::hyperbolic: {
            const double D = 1.0 - s * s - g2;
            if (!(D > 0.0)) return NodeStatus::outside_ball;
            const double x = g2 / D;
            const double c = 1.0 / (D * (std::sqrt(1.0 + x) + 1.0));
            const double q = std::sqrt((1.0 - s * s) / D);
            const Sym2 m = congruence(tau, grad, c);
            out.winv = Sym2{q * m.xx, q * m.xy, q * m.yy};
            out.chart = D;
            out.prefactor = std::sqrt(D * (1.0 - s * s));
            out.stiffness = (1.0 - s * s) * (1.0 + x);
            break;
        }
        case Ambient::spherical: {
            const double E = 1.0 + s * s + g2;
            const double c = -1.0 / (E * (1.0 + std::sqrt(1.0 - g2 / E)));
            const double q = std::sqrt((1.0 + s * s) / E);
            const Sym2 m = congruence(tau, grad, c);
            out.winv = Sym2{q * m.xx, q * m.xy, q * m.yy};
            out.chart = E;
            out.prefactor = std::sqrt(E * (1.0 + s * s));
            out.stiffness = 1.0 + s * s;
            break;
        }
    }
    if (!(sphgrid::eig2(tau).x > tau_floor)) return NodeStatus::not_convex;
    return NodeStatus::ok;
}

namespace {

double convexity_floor(const SphereGrid& g, const SupportState& state) {
    return kConvexityFloor * sphgrid::reduce(g, state.s, sphgrid::Reduction::mean);
}

void throw_status(NodeStatus st, int node, double t) {
    if (st == NodeStatus::outside_ball)
        throw StateInvalidError("support point leaves the unit ball at node " + std::to_string(node), node, t);
    if (st == NodeStatus::not_convex)
        throw ConvexityLostError("radii matrix is not positive definite at node " + std::to_string(node), node, t);
}

Sym2 plus_s(Sym2 h, double s) {
    h.xx += s;
    h.yy += s;
    return h;
}

}  // namespace

Sym2 weingarten_inverse(const SphereGrid& g, const SupportState& state, int node) {
    if (node < 0 || node >= g.size()) throw DomainError("node index out of range");
    const auto d = sphgrid::covariant_hessian(g, state.s);
    NodeFrame fr;
    const auto st = node_frame(state.ambient, state.s[node], d.grad[node], plus_s(d.hess[node], state.s[node]),
                               convexity_floor(g, state), fr);
    throw_status(st, node, state.t);
    return fr.winv;
}

CurvatureField principal_curvatures(const SphereGrid& g, const SupportState& state, const curvfn::CurvatureFunction& f) {
    if (f.dim() != 2) throw ConfigError("the surface layer needs a two-dimensional curvature function");
    const auto d = sphgrid::covariant_hessian(g, state.s);
    const double floor = convexity_floor(g, state);
    CurvatureField out;
    out.kappa.resize(g.size());
    out.F = ScalarField(g);
    NodeFrame fr;
    for (int k = 0; k < g.size(); ++k) {
        throw_status(node_frame(state.ambient, state.s[k], d.grad[k], plus_s(d.hess[k], state.s[k]), floor, fr), k, state.t);
        const Vec2 r = sphgrid::eig2(fr.winv);
        if (!(r.x > 0.0)) throw_status(NodeStatus::not_convex, k, state.t);
        out.kappa[k] = Vec2{1.0 / r.y, 1.0 / r.x};
        const double kap[2] = {out.kappa[k].x, out.kappa[k].y};
        out.F[k] = f.eval_raw(kap, nullptr, nullptr);
    }
    return out;
}

std::vector<std::array<double, 4>> embed(const SphereGrid& g, const SupportState& state) {
    const auto d = sphgrid::covariant_hessian(g, state.s);
    std::vector<std::array<double, 4>> out(g.size());
    for (int i = 0; i < g.I(); ++i)
        for (int j = 0; j < g.J(); ++j) {
            const int k = g.index(i, j);
            const double st = g.sin_theta(j), ct = g.cos_theta(j);
            const double sp = std::sin(g.phi(i)), cp = std::cos(g.phi(i));
            const double z[3] = {st * cp, st * sp, ct};
            const double et[3] = {ct * cp, ct * sp, -st};
            const double ep[3] = {-sp, cp, 0.0};
            double Y[3];
            for (int a = 0; a < 3; ++a) Y[a] = state.s[k] * z[a] + d.grad[k].x * et[a] + d.grad[k].y * ep[a];
            const double y2 = Y[0] * Y[0] + Y[1] * Y[1] + Y[2] * Y[2];
            double scale = 1.0, x0 = 0.0;
            if (state.ambient == Ambient::hyperbolic) {
                if (!(y2 < 1.0)) throw StateInvalidError("support point leaves the unit ball at node " + std::to_string(k), k, state.t);
                scale = 1.0 / std::sqrt(1.0 - y2);
                x0 = scale;
            } else if (state.ambient == Ambient::spherical) {
                scale = 1.0 / std::sqrt(1.0 + y2);
                x0 = scale;
            }
            out[k] = {x0, scale * Y[0], scale * Y[1], scale * Y[2]};
        }
    return out;
}

ValidationReport validate(const SphereGrid& g, const SupportState& state) {
    ValidationReport rep;
    if (!state.s.matches(g)) throw ConfigError("state does not match the grid");
    const auto d = sphgrid::covariant_hessian(g, state.s);
    rep.mean_s = sphgrid::reduce(g, state.s, sphgrid::Reduction::mean);
    rep.min_s = sphgrid::reduce(g, state.s, sphgrid::Reduction::min);
    rep.min_tau_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < g.size(); ++k) {
        if (!std::isfinite(state.s[k])) {
            rep.domain_violation = true;
            continue;
        }
        const double e = sphgrid::eig2(plus_s(d.hess[k], state.s[k])).x;
        if (e < rep.min_tau_eig) {
            rep.min_tau_eig = e;
            rep.min_tau_node = k;
        }
        const double y2 = state.s[k] * state.s[k] + d.gradnorm2[k];
        if (y2 > rep.max_Y2) {
            rep.max_Y2 = y2;
            rep.worst_ball_node = k;
        }
    }
    if (state.ambient == Ambient::hyperbolic) {
        rep.ball_margin = 1.0 - rep.max_Y2;
        if (!(rep.ball_margin > kBallMarginFloor)) rep.domain_violation = true;
        rep.near_degenerate = rep.ball_margin < kNearDegenerate;
    }
    if (!(rep.min_s > 0.0)) rep.domain_violation = true;
    rep.convexity_lost = !(rep.min_tau_eig > kConvexityFloor * rep.mean_s);
    return rep;
}

void require_valid(const SphereGrid& g, const SupportState& state) {
    const auto rep = validate(g, state);
    if (rep.domain_violation) {
        const int node = rep.ball_margin <= kBallMarginFloor ? rep.worst_ball_node : 0;
        throw StateInvalidError("state leaves its chart domain (ball margin " + std::to_string(rep.ball_margin) +
                                    ", min s " + std::to_string(rep.min_s) + ")",
                                node, state.t);
    }
    if (rep.convexity_lost)
        throw ConvexityLostError("radii matrix is not positive definite at node " + std::to_string(rep.min_tau_node),
                                 rep.min_tau_node, state.t);
}

// ---- interpolation and polar duality ----------------------------------------

namespace {

void lagrange6(double t, double w[6]) {
    // Nodes at -2..3 relative to the base index.
    for (int a = 0; a < 6; ++a) {
        double num = 1.0, den = 1.0;
        for (int b = 0; b < 6; ++b) {
            if (b == a) continue;
            num *= t - (b - 2);
            den *= (a - b);
        }
        w[a] = num / den;
    }
}

void normalize(double z[3]) {
    const double n = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    for (int a = 0; a < 3; ++a) z[a] /= n;
}

}  // namespace

double interpolate(const SphereGrid& g, const ScalarField& field, const double z[3]) {
    const double theta = std::atan2(std::hypot(z[0], z[1]), z[2]);
    double phi = std::atan2(z[1], z[0]);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    const double x = phi / g.dphi();
    const double y = theta / g.dtheta() - 0.5;
    const int ix = static_cast<int>(std::floor(x));
    const int iy = static_cast<int>(std::floor(y));
    double wx[6], wy[6];
    lagrange6(x - ix, wx);
    lagrange6(y - iy, wy);
    double acc = 0.0;
    for (int b = 0; b < 6; ++b) {
        double row = 0.0;
        for (int a = 0; a < 6; ++a) {
            int gi, gj;
            g.ghost(ix + a - 2, iy + b - 2, gi, gj);
            row += wx[a] * field(gi, gj);
        }
        acc += wy[b] * row;
    }
    return acc;
}

PolarDual polar_dual_with_preimage(const SphereGrid& g, const SupportState& state) {
    if (state.ambient != Ambient::spherical) throw UnsupportedError("polar duality is defined for spherical states only");
    require_valid(g, state);
    const int I = g.I(), J = g.J();
    PolarDual out;
    out.state.ambient = Ambient::spherical;
    out.state.t = state.t;
    out.state.s = ScalarField(g);
    out.preimage.resize(g.size());

    for (int i = 0; i < I; ++i) {
        for (int j = 0; j < J; ++j) {
            double u[3];
            g.point(i, j, u);
            auto objective = [&](const double z[3], double sz) { return -(u[0] * z[0] + u[1] * z[1] + u[2] * z[2]) / sz; };
            auto at_node = [&](int a, int b) {
                double z[3];
                g.point(a, b, z);
                return objective(z, state.s(a, b));
            };

            // Discrete ascent from the antipodal node.
            int ci = (i + I / 2) % I, cj = J - 1 - j;
            double best = at_node(ci, cj);
            for (int iter = 0; iter < 4 * (I + J); ++iter) {
                int bi = ci, bj = cj;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        int ni, nj;
                        g.ghost(ci + di, cj + dj, ni, nj);
                        const double v = at_node(ni, nj);
                        if (v > best) {
                            best = v;
                            bi = ni;
                            bj = nj;
                        }
                    }
                if (bi == ci && bj == cj) break;
                ci = bi;
                cj = bj;
            }

            // Continuous refinement on the interpolated support function.
            double z0[3];
            g.point(ci, cj, z0);
            auto eval = [&](const double z[3]) { return objective(z, interpolate(g, state.s, z)); };
            double fbest = eval(z0);
            double delta = g.dtheta();
            for (int round = 0; round < 6; ++round) {
                double e1[3], e2[3];
                const double ref[3] = {std::abs(z0[0]) < 0.9 ? 1.0 : 0.0, std::abs(z0[0]) < 0.9 ? 0.0 : 1.0, 0.0};
                const double dot = ref[0] * z0[0] + ref[1] * z0[1] + ref[2] * z0[2];
                for (int a = 0; a < 3; ++a) e1[a] = ref[a] - dot * z0[a];
                normalize(e1);
                e2[0] = z0[1] * e1[2] - z0[2] * e1[1];
                e2[1] = z0[2] * e1[0] - z0[0] * e1[2];
                e2[2] = z0[0] * e1[1] - z0[1] * e1[0];
                auto chart = [&](double p, double q, double z[3]) {
                    for (int a = 0; a < 3; ++a) z[a] = z0[a] + p * e1[a] + q * e2[a];
                    normalize(z);
                };
                double G[3][3];
                double zs[3][3][3];
                double sp = 0.0, sq = 0.0, sv = fbest;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        if (a == 1 && b == 1) {
                            G[1][1] = fbest;
                            std::copy(z0, z0 + 3, zs[1][1]);
                            continue;
                        }
                        chart((a - 1) * delta, (b - 1) * delta, zs[a][b]);
                        G[a][b] = eval(zs[a][b]);
                        if (G[a][b] > sv) {
                            sv = G[a][b];
                            sp = (a - 1) * delta;
                            sq = (b - 1) * delta;
                        }
                    }
                const double gp = (G[2][1] - G[0][1]) / (2.0 * delta);
                const double gq = (G[1][2] - G[1][0]) / (2.0 * delta);
                const double hpp = (G[2][1] - 2.0 * G[1][1] + G[0][1]) / (delta * delta);
                const double hqq = (G[1][2] - 2.0 * G[1][1] + G[1][0]) / (delta * delta);
                const double hpq = (G[2][2] - G[2][0] - G[0][2] + G[0][0]) / (4.0 * delta * delta);
                const double det = hpp * hqq - hpq * hpq;
                double np = sp, nq = sq, nv = sv;
                if (hpp < 0.0 && det > 0.0) {
                    double dp = -(hqq * gp - hpq * gq) / det;
                    double dq = -(hpp * gq - hpq * gp) / det;
                    const double len = std::hypot(dp, dq);
                    if (len > delta) {
                        dp *= delta / len;
                        dq *= delta / len;
                    }
                    double zc[3];
                    chart(dp, dq, zc);
                    const double v = eval(zc);
                    if (v >= nv) {
                        np = dp;
                        nq = dq;
                        nv = v;
                    }
                }
                if (nv > fbest) {
                    double zn[3];
                    chart(np, nq, zn);
                    std::copy(zn, zn + 3, z0);
                    fbest = nv;
                }
                delta *= 0.25;
            }
            const int k = g.index(i, j);
            out.state.s[k] = fbest;
            out.preimage[k] = {z0[0], z0[1], z0[2]};
        }
    }
    return out;
}

SupportState polar_dual(const SphereGrid& g, const SupportState& state) { return polar_dual_with_preimage(g, state).state; }

}  // namespace icf::hypersurface
