#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "icf/diagnostics.hpp"
#include "icf/error.hpp"
#include "support.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace icf;
using namespace icf::diagnostics;

namespace {

SupportState uniform(const SphereGrid& g, Ambient a, double s) { return SupportState{a, sphgrid::ScalarField(g, s), 0.0}; }

std::vector<DiagnosticsRecord> series_from(const std::vector<double>& t, const std::vector<double>& dev) {
    std::vector<DiagnosticsRecord> out;
    for (size_t k = 0; k < t.size(); ++k) {
        DiagnosticsRecord r;
        r.t = t[k];
        r.dev = dev[k];
        r.osc = dev[k];
        r.pinch = 1 + dev[k];
        out.push_back(r);
    }
    return out;
}

/// Largest ratio tau_max / tau_min admitted by tau_max <= C f_*(tau) in two
/// variables, by bisection on the ratio: f_* is homogeneous, so test (1, rho).
double ratio_bound(const curvfn::CurvatureFunction& f, double C) {
    auto ok = [&](double rho) {
        const double x[2] = {1.0, rho};
        return rho <= C * f.dual_value(x);
    };
    double lo = 1, hi = 2;
    while (ok(hi)) hi *= 2;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

TEST_CASE("records of geodesic spheres") {
    const SphereGrid g(16, 8);
    const auto pm1 = curvfn::construct("power-mean:1", 2);
    auto r = snapshot(g, uniform(g, Ambient::euclidean, 2.0), pm1);
    CHECK(r.kappa_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.kappa_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.pinch == doctest::Approx(1).epsilon(1e-12));
    CHECK(r.q == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.F_min == doctest::Approx(1).epsilon(1e-12));
    CHECK(r.osc == 0);
    CHECK(r.convexity_margin == doctest::Approx(1).epsilon(1e-12));
    CHECK(std::isnan(r.dev));

    r = snapshot(g, uniform(g, Ambient::hyperbolic, std::tanh(1.5)), pm1);
    CHECK(r.dev == doctest::Approx(1 / std::tanh(1.5) - 1).epsilon(1e-10));
    CHECK(r.kappa_min == doctest::Approx(1 / std::tanh(1.5)).epsilon(1e-12));
}

TEST_CASE("records of ellipsoids") {
    const testsupport::Ellipsoid e{1.0, 1.2, 1.5};
    const SphereGrid g(64, 32);
    const auto pm2 = curvfn::construct("power-mean:2", 2);
    const SupportState st{Ambient::euclidean, e.field(g), 0.25};
    const auto r = snapshot(g, st, pm2);
    double pinch = 0, kmin = 1e300, kmax = 0, q = 1e300;
    for (int i = 0; i < g.I(); ++i)
        for (int j = 0; j < g.J(); ++j) {
            testsupport::Vec3 z, et, ep;
            testsupport::frame(g, i, j, z, et, ep);
            const auto k = e.kappa(Ambient::euclidean, z);
            pinch = std::max(pinch, k(1) / k(0));
            kmin = std::min(kmin, k(0));
            kmax = std::max(kmax, k(1));
            q = std::min(q, k(0) / std::sqrt(2 * (k(0) * k(0) + k(1) * k(1))));
        }
    CHECK(r.t == 0.25);
    CHECK(r.pinch == doctest::Approx(pinch).epsilon(5e-3));
    CHECK(r.kappa_min == doctest::Approx(kmin).epsilon(5e-3));
    CHECK(r.kappa_max == doctest::Approx(kmax).epsilon(1e-3));
    CHECK(r.q == doctest::Approx(q).epsilon(1e-3));
    CHECK(r.osc == doctest::Approx((1.5 - 1.0) / sphgrid::reduce(g, st.s, sphgrid::Reduction::mean)).epsilon(1e-2));
}

TEST_CASE("monotonicity verdict") {
    const std::vector<double> up{1, 1, 1.1, 1.2};
    CHECK(check_monotone_q(up).pass);
    const std::vector<double> dip{1, 1 - 5e-7, 1.1};
    CHECK(check_monotone_q(dip).pass);
    const std::vector<double> down{1, 1.1, 1.0, 0.9};
    const auto v = check_monotone_q(down);
    CHECK_FALSE(v.pass);
    CHECK(v.first_violation == 2);
    CHECK(v.worst == doctest::Approx(-0.1).epsilon(1e-3));
    CHECK(check_monotone_q(std::vector<double>{}).pass);
}

TEST_CASE("pinch verdict") {
    const std::vector<double> ok{2, 1.9, 2.0001, 1.5};
    CHECK(check_pinch_bound(ok).pass);
    const std::vector<double> bad{2, 2.1, 1.5};
    const auto v = check_pinch_bound(bad);
    CHECK_FALSE(v.pass);
    CHECK(v.first_violation == 1);
    CHECK(v.worst == doctest::Approx(1.05));
    auto recs = series_from({0, 1, 2}, {1, 0.5, 0.2});
    CHECK(check_pinch_bound(recs).pass);
    recs[2].pinch = 3;
    CHECK(check_pinch_bound(recs).first_violation == 2);
}

TEST_CASE("pinching constant") {
    // Gauss-type function in two variables: ratio bound (C / 2)^2.
    const auto gauss = curvfn::construct("elem-sym:2", 2);
    const auto pc = pinching_bound_constant(gauss, 4.0);
    CHECK(pc.bounded);
    CHECK(pc.value <= 4 * (1 + 1e-9));
    CHECK(pc.value == doctest::Approx(4).epsilon(1e-6));
    CHECK(ratio_bound(gauss, 4.0) == doctest::Approx(4).epsilon(1e-12));

    for (const char* spec : {"power-mean:1", "power-mean:2", "power-mean:0.5"}) {
        const auto f = curvfn::construct(spec, 2);
        const auto p = pinching_bound_constant(f, 3.0, 7);
        CAPTURE(spec);
        CHECK(p.bounded);
        CHECK(p.value == doctest::Approx(ratio_bound(f, 3.0)).epsilon(1e-6));
    }

    // Harmonic mean: its dual is the arithmetic mean, which never rules out a ratio when C >= n.
    const auto hm = pinching_bound_constant(curvfn::construct("power-mean:-1", 2), 4.0);
    CHECK_FALSE(hm.bounded);
    CHECK(hm.history.size() == 15);
    CHECK_THROWS_AS(pinching_bound_constant(gauss, 0.0), ConfigError);

    // Three variables: bounded for the arithmetic mean.
    const auto three = pinching_bound_constant(curvfn::construct("power-mean:1", 3), 6.0);
    CHECK(three.bounded);
    // f_* is the harmonic sum; with max 1 and min m the constraint 1 + 1 + 1 / m <= C is loosest.
    CHECK(three.value == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("exponential fits") {
    std::vector<double> t, y;
    for (int k = 0; k < 30; ++k) {
        t.push_back(0.1 * k);
        y.push_back(0.3 * std::exp(-0.8 * t.back()));
    }
    auto fit = fit_exponential(t, y);
    CHECK(fit.rate == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.amplitude == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fit.residual < 1e-12);
    CHECK(fit.points == 30);
    y[3] = -1;
    CHECK_THROWS_AS(fit_exponential(t, y), DomainError);
    CHECK_THROWS_AS(fit_exponential(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);

    // Hyperbolic window keeps only dev < 0.5.
    std::vector<double> dev;
    t.clear();
    for (int k = 0; k < 40; ++k) {
        t.push_back(0.1 * k);
        dev.push_back(0.9 * std::exp(-t.back()));
    }
    fit = fit_decay(series_from(t, dev), Ambient::hyperbolic);
    CHECK(fit.rate == doctest::Approx(1).epsilon(1e-12));
    CHECK(fit.points == 34);
    fit = fit_decay(series_from(t, dev), Ambient::euclidean);
    CHECK(fit.points == 40);
    CHECK_THROWS_AS(fit_decay(series_from(t, dev), Ambient::spherical), UnsupportedError);
    CHECK_THROWS_AS(fit_decay(series_from({0, 1, 2}, {0.4, 0.3, 0.2}), Ambient::hyperbolic), DomainError);

    const auto round = fit_decay(series_from({0, 1, 2}, {0, 0, 0}), Ambient::hyperbolic);
    CHECK(round.already_round);
    CHECK(std::isnan(round.rate));
}

TEST_CASE("csv output") {
    const auto& cols = csv_columns();
    CHECK(cols.front() == "t");
    DiagnosticsRecord r;
    r.t = 0.125;
    r.q = 1.0 / 3;
    const std::string row = csv_row(r);
    CHECK(std::count(row.begin(), row.end(), ',') + 1 == static_cast<long>(cols.size()));
    CHECK(row.rfind("0.125,", 0) == 0);

    const auto path = std::filesystem::temp_directory_path() / "icf_diag_test.csv";
    write_csv({r, r}, path.string());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string header;
    for (size_t k = 0; k < cols.size(); ++k) header += (k ? "," : "") + cols[k];
    CHECK(ss.str() == header + "\n" + row + "\n" + row + "\n");
    std::filesystem::remove(path);
}
