#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "icf/error.hpp"
#include "icf/hypersurface.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace icf;
using namespace icf::hypersurface;
using testsupport::Vec3;

namespace {

const auto pm1 = curvfn::construct("power-mean:1", 2);

SupportState uniform(const SphereGrid& g, Ambient a, double s) { return SupportState{a, ScalarField(g, s), 0.0}; }

SupportState ellipsoid(const SphereGrid& g, Ambient a, const testsupport::Ellipsoid& e) { return SupportState{a, e.field(g), 0.0}; }

}  // namespace

TEST_CASE("ambient names") {
    for (auto a : {Ambient::euclidean, Ambient::hyperbolic, Ambient::spherical}) CHECK(parse_ambient(to_string(a)) == a);
    CHECK_THROWS_AS(parse_ambient("elliptic"), ConfigError);
}

TEST_CASE("node frame of umbilic nodes") {
    NodeFrame fr;
    const double rho = 0.7;
    CHECK(node_frame(Ambient::euclidean, 2.0, {0, 0}, Sym2{2, 0, 2}, 0.0, fr) == NodeStatus::ok);
    CHECK(fr.winv.xx == 2.0);
    CHECK(fr.chart == 1.0);

    // Geodesic spheres: radii tanh(rho) and tan(rho) in the chart.
    const double th = std::tanh(rho), tn = std::tan(rho);
    CHECK(node_frame(Ambient::hyperbolic, th, {0, 0}, Sym2{th, 0, th}, 0.0, fr) == NodeStatus::ok);
    CHECK(fr.winv.xx == doctest::Approx(th).epsilon(1e-15));
    CHECK(fr.winv.yy == doctest::Approx(th).epsilon(1e-15));
    CHECK(fr.chart == doctest::Approx(1 - th * th).epsilon(1e-15));
    CHECK(node_frame(Ambient::spherical, tn, {0, 0}, Sym2{tn, 0, tn}, 0.0, fr) == NodeStatus::ok);
    CHECK(fr.winv.xx == doctest::Approx(tn).epsilon(1e-15));
    CHECK(fr.chart == doctest::Approx(1 + tn * tn).epsilon(1e-15));

    CHECK(node_frame(Ambient::hyperbolic, 0.8, {0.7, 0}, Sym2{1, 0, 1}, 0.0, fr) == NodeStatus::outside_ball);
    CHECK(node_frame(Ambient::euclidean, 1.0, {0, 0}, Sym2{1, 0, -0.1}, 0.0, fr) == NodeStatus::not_convex);
    CHECK(node_frame(Ambient::euclidean, 1.0, {0, 0}, Sym2{1, 0, 0.01}, 0.1, fr) == NodeStatus::not_convex);
}

TEST_CASE("node frame agrees with the unsymmetrized product") {
    // Eigenvalues of the symmetrized matrix equal those of sqrt(.)(I +- g g^T / D) tau.
    const testsupport::Ellipsoid e{0.3, 0.4, 0.5};
    for (auto amb : {Ambient::euclidean, Ambient::hyperbolic, Ambient::spherical}) {
        for (int k = 0; k < 20; ++k) {
            const Vec3 z = Vec3(std::cos(k), std::sin(1.3 * k), 0.5 - 0.05 * k).normalized();
            Vec3 e1, e2;
            testsupport::tangent_basis(z, e1, e2);
            const Eigen::Matrix2d t = e.tau(z, e1, e2);
            const Vec3 g3 = e.grad(z);
            NodeFrame fr;
            REQUIRE(node_frame(amb, e.s(z), {g3.dot(e1), g3.dot(e2)}, Sym2{t(0, 0), t(0, 1), t(1, 1)}, 0.0, fr) == NodeStatus::ok);
            const auto ev = sphgrid::eig2(fr.winv);
            const Eigen::Vector2d ref = e.radii(amb, z);
            CHECK(ev.x == doctest::Approx(ref(0)).epsilon(1e-12));
            CHECK(ev.y == doctest::Approx(ref(1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("principal curvatures of geodesic spheres") {
    const SphereGrid g(32, 16);
    const double rho = 0.8;
    struct Case {
        Ambient a;
        double s, kappa;
    };
    for (const Case c : {Case{Ambient::euclidean, 1.5, 1 / 1.5}, Case{Ambient::hyperbolic, std::tanh(rho), 1 / std::tanh(rho)},
                         Case{Ambient::spherical, std::tan(rho), 1 / std::tan(rho)}}) {
        const auto cf = principal_curvatures(g, uniform(g, c.a, c.s), pm1);
        for (int k = 0; k < g.size(); ++k) {
            CHECK(cf.kappa[k].x == doctest::Approx(c.kappa).epsilon(1e-12));
            CHECK(cf.kappa[k].y == doctest::Approx(c.kappa).epsilon(1e-12));
            CHECK(cf.F[k] == doctest::Approx(2 * c.kappa).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(principal_curvatures(g, uniform(g, Ambient::euclidean, 1), curvfn::construct("power-mean:1", 3)), ConfigError);
}

TEST_CASE("principal curvatures of ellipsoids converge at second order") {
    const testsupport::Ellipsoid e{0.3, 0.4, 0.5};
    for (auto amb : {Ambient::euclidean, Ambient::hyperbolic, Ambient::spherical}) {
        std::vector<double> errs;
        for (int J : {16, 32, 64}) {
            const SphereGrid g(2 * J, J);
            const auto cf = principal_curvatures(g, ellipsoid(g, amb, e), pm1);
            double err = 0;
            for (int i = 0; i < g.I(); ++i)
                for (int j = 0; j < g.J(); ++j) {
                    Vec3 z, et, ep;
                    testsupport::frame(g, i, j, z, et, ep);
                    const Eigen::Vector2d k = e.kappa(amb, z);
                    const auto& kk = cf.kappa[g.index(i, j)];
                    err = std::max({err, std::abs(kk.x - k(0)) / k(0), std::abs(kk.y - k(1)) / k(1)});
                }
            errs.push_back(err);
        }
        CAPTURE(to_string(amb));
        CAPTURE(errs[2]);
        CHECK(errs[2] < 2e-3);
        const double order = testsupport::observed_order(errs[1], errs[2]);
        CHECK(order >= 1.7);
        CHECK(order <= 2.3);
    }
}

TEST_CASE("invalid states") {
    const SphereGrid g(16, 8);
    CHECK_THROWS_AS(principal_curvatures(g, uniform(g, Ambient::hyperbolic, 1.2), pm1), StateInvalidError);
    CHECK_THROWS_AS(require_valid(g, uniform(g, Ambient::hyperbolic, 1.0)), StateInvalidError);

    // A dented sphere: s = 1 + 0.9 P_4 loses convexity.
    auto dented = sample(g, [](double, double, double z) { return 1 + 0.5 * (35 * std::pow(z, 4) - 30 * z * z + 3) / 8; });
    const SupportState st{Ambient::euclidean, dented, 0.3};
    const auto rep = validate(g, st);
    CHECK(rep.convexity_lost);
    CHECK_FALSE(rep.valid());
    try {
        require_valid(g, st);
        FAIL("expected ConvexityLostError");
    } catch (const ConvexityLostError& e) {
        CHECK(e.node() == rep.min_tau_node);
        CHECK(e.time() == 0.3);
    }
    CHECK_THROWS_AS(principal_curvatures(g, st, pm1), ConvexityLostError);
    CHECK_THROWS_AS(weingarten_inverse(g, uniform(g, Ambient::euclidean, 1), -1), DomainError);
}

TEST_CASE("validation report") {
    const SphereGrid g(16, 8);
    auto rep = validate(g, uniform(g, Ambient::hyperbolic, 0.5));
    CHECK(rep.valid());
    CHECK(rep.max_Y2 == doctest::Approx(0.25));
    CHECK(rep.ball_margin == doctest::Approx(0.75));
    CHECK_FALSE(rep.near_degenerate);
    CHECK(rep.min_tau_eig == doctest::Approx(0.5).epsilon(1e-12));
    rep = validate(g, uniform(g, Ambient::hyperbolic, 0.999));
    CHECK(rep.valid());
    CHECK(rep.near_degenerate);
    rep = validate(g, uniform(g, Ambient::spherical, 30));
    CHECK(rep.valid());
    CHECK(rep.ball_margin == 1.0);
    CHECK_FALSE(validate(g, uniform(g, Ambient::euclidean, -1)).valid());
    CHECK_THROWS_AS(validate(g, SupportState{Ambient::euclidean, ScalarField(8, 4, 1.0), 0}), ConfigError);
}

TEST_CASE("embedding lands on the model spaces") {
    const SphereGrid g(16, 8);
    const testsupport::Ellipsoid e{0.3, 0.4, 0.5};
    const auto euc = embed(g, ellipsoid(g, Ambient::euclidean, e));
    const auto hyp = embed(g, ellipsoid(g, Ambient::hyperbolic, e));
    const auto sph = embed(g, ellipsoid(g, Ambient::spherical, e));
    for (int k = 0; k < g.size(); ++k) {
        CHECK(euc[k][0] == 0.0);
        // The chart point lies on the ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1.
        const double q = std::pow(euc[k][1] / 0.3, 2) + std::pow(euc[k][2] / 0.4, 2) + std::pow(euc[k][3] / 0.5, 2);
        CHECK(q == doctest::Approx(1).epsilon(1e-3));
        const auto& h = hyp[k];
        CHECK(-h[0] * h[0] + h[1] * h[1] + h[2] * h[2] + h[3] * h[3] == doctest::Approx(-1).epsilon(1e-12));
        CHECK(h[0] > 0);
        const auto& s = sph[k];
        CHECK(s[0] * s[0] + s[1] * s[1] + s[2] * s[2] + s[3] * s[3] == doctest::Approx(1).epsilon(1e-12));
        CHECK(s[1] / s[0] == doctest::Approx(euc[k][1]).epsilon(1e-12));
    }
}

TEST_CASE("interpolation") {
    const SphereGrid g(32, 16);
    const auto f = sample(g, [](double x, double y, double z) { return std::exp(x - 0.5 * y + 0.3 * z); });
    for (int k = 0; k < g.size(); k += 7) {
        double z[3];
        g.point(k / g.J(), k % g.J(), z);
        CHECK(interpolate(g, f, z) == doctest::Approx(f[k]).epsilon(1e-14));
    }
    std::vector<double> errs;
    for (int J : {8, 16, 32}) {
        const SphereGrid gg(2 * J, J);
        const auto ff = sample(gg, [](double x, double y, double z) { return std::exp(x - 0.5 * y + 0.3 * z); });
        double err = 0;
        for (int k = 0; k < 200; ++k) {
            const Vec3 v = Vec3(std::sin(0.7 * k), std::cos(1.9 * k), std::sin(0.31 * k + 1)).normalized();
            const double z[3] = {v.x(), v.y(), v.z()};
            err = std::max(err, std::abs(interpolate(gg, ff, z) - std::exp(v.x() - 0.5 * v.y() + 0.3 * v.z())));
        }
        errs.push_back(err);
    }
    CHECK(testsupport::observed_order(errs[1], errs[2]) > 5);
}

TEST_CASE("polar dual") {
    const SphereGrid g(32, 16);
    CHECK_THROWS_AS(polar_dual(g, uniform(g, Ambient::euclidean, 1)), UnsupportedError);

    // Geodesic sphere of radius rho is dual to the one of radius pi/2 - rho.
    const double rho = 0.6;
    const auto d = polar_dual(g, uniform(g, Ambient::spherical, std::tan(rho)));
    for (int k = 0; k < g.size(); ++k) CHECK(d.s[k] == doctest::Approx(1 / std::tan(rho)).epsilon(1e-12));

    // Ellipsoid (a, b, c) is dual to (1/a, 1/b, 1/c); the preimage of u is -A^{-1} u normalized.
    const testsupport::Ellipsoid e{0.5, 0.6, 0.7}, dual{2.0, 1 / 0.6, 1 / 0.7};
    std::vector<double> errs;
    for (int J : {16, 32, 64}) {
        const SphereGrid gg(2 * J, J);
        const auto pd = polar_dual_with_preimage(gg, ellipsoid(gg, Ambient::spherical, e));
        CHECK(pd.state.ambient == Ambient::spherical);
        double err = 0, perr = 0;
        for (int i = 0; i < gg.I(); ++i)
            for (int j = 0; j < gg.J(); ++j) {
                Vec3 u, et, ep;
                testsupport::frame(gg, i, j, u, et, ep);
                const int k = gg.index(i, j);
                err = std::max(err, std::abs(pd.state.s[k] - dual.s(u)) / dual.s(u));
                const Vec3 z = -(e.A().inverse() * u).normalized();
                const auto& p = pd.preimage[k];
                perr = std::max(perr, (Vec3(p[0], p[1], p[2]) - z).norm());
            }
        CAPTURE(J);
        CHECK(err < 1e-4);
        CHECK(perr < 1e-3);
        errs.push_back(err);
    }
    CHECK(errs[2] < 1e-7);

    // Dualizing twice returns the original state.
    {
        const SphereGrid g2(32, 16);
        const auto st = ellipsoid(g2, Ambient::spherical, e);
        const auto back = polar_dual(g2, polar_dual(g2, st));
        for (int k = 0; k < g2.size(); ++k) CHECK(back.s[k] == doctest::Approx(st.s[k]).epsilon(1e-5));
    }

    // Curvatures of dual hypersurfaces are reciprocal at corresponding points.
    const SphereGrid gg(64, 32);
    const auto pd = polar_dual_with_preimage(gg, ellipsoid(gg, Ambient::spherical, e));
    const auto cf = principal_curvatures(gg, pd.state, pm1);
    double worst = 0;
    for (int k = 0; k < gg.size(); ++k) {
        const auto& p = pd.preimage[k];
        const Eigen::Vector2d ko = e.kappa(Ambient::spherical, Vec3(p[0], p[1], p[2]));
        worst = std::max({worst, std::abs(cf.kappa[k].x * ko(1) - 1), std::abs(cf.kappa[k].y * ko(0) - 1)});
    }
    CHECK(worst < 1e-2);
}
