#include "icf/cli.hpp"

#include "icf/diagnostics.hpp"
#include "icf/error.hpp"
#include "icf/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace icf::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using hypersurface::Ambient;

// ---- config text -------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("bad number for " + std::string(key) + ": '" + std::string(v) + "'");
    return out;
}

long to_long(std::string_view key, std::string_view v) {
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

void parse_grid(std::string_view text, int& I, int& J) {
    const auto x = text.find('x');
    if (x == std::string_view::npos) throw ConfigError("grid must look like <I>x<J>, got '" + std::string(text) + "'");
    I = static_cast<int>(to_long("grid", text.substr(0, x)));
    J = static_cast<int>(to_long("grid", text.substr(x + 1)));
}

std::string print_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "space=" << c.space << "\n"
       << "f=" << c.f << "\n"
       << "alpha=" << fmt_double(c.alpha) << "\n"
       << "init=" << c.init << "\n"
       << "grid=" << c.grid_I << "x" << c.grid_J << "\n"
       << "t_end=" << fmt_double(c.t_end) << "\n"
       << "cfl=" << fmt_double(c.cfl) << "\n"
       << "snap_every=" << fmt_double(c.snap_every) << "\n"
       << "normalized=" << (c.normalized ? "true" : "false") << "\n"
       << "unsafe_alpha=" << (c.unsafe_alpha ? "true" : "false") << "\n"
       << "dt_fixed=" << fmt_double(c.dt_fixed) << "\n"
       << "hyperbolic_margin=" << fmt_double(c.hyperbolic_margin) << "\n"
       << "spherical_max_y=" << fmt_double(c.spherical_max_Y) << "\n"
       << "step_cap=" << c.step_cap << "\n"
       << "out=" << c.out << "\n"
       << "svg=" << (c.svg ? "true" : "false") << "\n"
       << "save_states=" << (c.save_states ? "true" : "false") << "\n";
    return os.str();
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto val = trim(line.substr(eq + 1));
        if (key == "space") c.space = val;
        else if (key == "f") c.f = val;
        else if (key == "alpha") c.alpha = to_double(key, val);
        else if (key == "init") c.init = val;
        else if (key == "grid") parse_grid(val, c.grid_I, c.grid_J);
        else if (key == "t_end") c.t_end = to_double(key, val);
        else if (key == "cfl") c.cfl = to_double(key, val);
        else if (key == "snap_every") c.snap_every = to_double(key, val);
        else if (key == "normalized") c.normalized = to_bool(key, val);
        else if (key == "unsafe_alpha") c.unsafe_alpha = to_bool(key, val);
        else if (key == "dt_fixed") c.dt_fixed = to_double(key, val);
        else if (key == "hyperbolic_margin") c.hyperbolic_margin = to_double(key, val);
        else if (key == "spherical_max_y") c.spherical_max_Y = to_double(key, val);
        else if (key == "step_cap") c.step_cap = to_long(key, val);
        else if (key == "out") c.out = val;
        else if (key == "svg") c.svg = to_bool(key, val);
        else if (key == "save_states") c.save_states = to_bool(key, val);
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---- initial data -------------------------------------------------------------

namespace {

std::vector<double> numbers_after(std::string_view init, std::string_view prefix, std::size_t count) {
    std::vector<double> out;
    auto rest = init.substr(prefix.size());
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_double("init", trim(rest.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    if (out.size() != count)
        throw ConfigError("initial data '" + std::string(init) + "' needs " + std::to_string(count) + " parameters");
    return out;
}

}  // namespace

hypersurface::SupportState initial_state(const sphgrid::SphereGrid& g, Ambient ambient, std::string_view init) {
    hypersurface::SupportState st;
    st.ambient = ambient;
    if (init.starts_with("sphere:")) {
        const double r = numbers_after(init, "sphere:", 1)[0];
        st.s = sphgrid::ScalarField(g, r);
    } else if (init.starts_with("spheroid:")) {
        const auto p = numbers_after(init, "spheroid:", 3);
        const double a = p[0], b = p[1], c = p[2];
        if (!(a > 0 && b > 0 && c > 0)) throw ConfigError("spheroid semi-axes must be positive");
        st.s = sphgrid::sample(g, [&](double x, double y, double z) { return std::sqrt(a * a * x * x + b * b * y * y + c * c * z * z); });
    } else if (init.starts_with("perturbed-sphere:")) {
        const auto p = numbers_after(init, "perturbed-sphere:", 3);
        const double r = p[0], eps = p[1];
        if (p[2] < 0 || p[2] != std::floor(p[2])) throw ConfigError("perturbation mode must be a non-negative integer");
        const unsigned mode = static_cast<unsigned>(p[2]);
        st.s = sphgrid::sample(g, [&](double, double, double z) { return r * (1.0 + eps * std::legendre(mode, z)); });
    } else {
        throw ConfigError("unknown initial data '" + std::string(init) + "' (expected sphere:, spheroid: or perturbed-sphere:)");
    }
    const auto rep = hypersurface::validate(g, st);
    if (!rep.valid())
        throw ConfigError("initial data '" + std::string(init) + "' is not a valid strictly convex state in " +
                          hypersurface::to_string(ambient) + " space");
    return st;
}

flow::FlowConfig to_flow_config(const ExperimentConfig& c) {
    flow::FlowConfig fc;
    fc.ambient = hypersurface::parse_ambient(c.space);
    fc.f = curvfn::construct(c.f, 2);
    fc.alpha = c.alpha;
    fc.t_end = c.t_end;
    fc.cfl = c.cfl;
    fc.snap_every = c.snap_every;
    fc.normalized = c.normalized;
    fc.unsafe_alpha = c.unsafe_alpha;
    fc.dt_fixed = c.dt_fixed;
    fc.stop.hyperbolic_margin = c.hyperbolic_margin;
    fc.stop.spherical_max_Y = c.spherical_max_Y;
    fc.stop.step_cap = c.step_cap;
    flow::check_config(fc);
    return fc;
}

// ---- svg ----------------------------------------------------------------------

void write_svg(const sphgrid::SphereGrid& g, const flow::FlowRun& run, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    const double W = 900, H = 450, pad = 30;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Meridian sections (phi = 0 and phi = pi) of the chart image.
    std::vector<std::vector<std::pair<double, double>>> curves;
    double extent = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, run.snapshots.size() / 10);
    for (std::size_t k = 0; k < run.snapshots.size(); k += stride) {
        const auto X = hypersurface::embed(g, run.snapshots[k]);
        std::vector<std::pair<double, double>> pts;
        auto push = [&](int i, int j) {
            const auto& x = X[g.index(i, j)];
            const double w = run.snapshots[k].ambient == Ambient::euclidean ? 1.0 : x[0];
            pts.emplace_back(x[1] / w, x[3] / w);
            extent = std::max({extent, std::abs(x[1] / w), std::abs(x[3] / w)});
        };
        for (int j = 0; j < g.J(); ++j) push(0, j);
        for (int j = g.J() - 1; j >= 0; --j) push(g.I() / 2, j);
        curves.push_back(std::move(pts));
    }
    const double half = H / 2 - pad;
    os << "<g stroke-width=\"1\" fill=\"none\">\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const int shade = static_cast<int>(200.0 * (1.0 - static_cast<double>(c) / std::max<std::size_t>(1, curves.size() - 1)));
        os << "<polygon stroke=\"rgb(" << shade << "," << shade << ",255)\" points=\"";
        for (const auto& [x, z] : curves[c]) os << (H / 2 + half * x / extent) << "," << (H / 2 - half * z / extent) << " ";
        os << "\"/>\n";
    }
    os << "</g>\n";

    // q and pinch against t, each scaled to its own range.
    auto plot = [&](const std::function<double(const flow::MonitorSample&)>& get, const char* colour, const char* label, double y0) {
        if (run.monitor.size() < 2) return;
        double lo = get(run.monitor[0]), hi = lo;
        for (const auto& m : run.monitor) {
            lo = std::min(lo, get(m));
            hi = std::max(hi, get(m));
        }
        if (hi - lo < 1e-300) hi = lo + 1.0;
        const double t0 = run.monitor.front().t, t1 = std::max(run.monitor.back().t, t0 + 1e-300);
        const double x0 = H + pad, w = W - H - 2 * pad, h = H / 2 - 2 * pad;
        const std::size_t step = std::max<std::size_t>(1, run.monitor.size() / 400);
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
        for (std::size_t k = 0; k < run.monitor.size(); k += step) {
            const auto& m = run.monitor[k];
            os << x0 + w * (m.t - t0) / (t1 - t0) << "," << y0 + h * (1.0 - (get(m) - lo) / (hi - lo)) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << x0 << "\" y=\"" << y0 - 5 << "\" font-size=\"12\">" << label << " [" << fmt_double(lo).substr(0, 10)
           << ", " << fmt_double(hi).substr(0, 10) << "]</text>\n";
    };
    plot([](const flow::MonitorSample& m) { return m.q; }, "darkgreen", "q(t)", pad + 10);
    plot([](const flow::MonitorSample& m) { return m.pinch; }, "darkred", "pinch(t)", H / 2 + pad);
    os << "</svg>\n";
}

// ---- subcommands --------------------------------------------------------------

namespace {

void save_state(const sphgrid::SphereGrid& g, const hypersurface::SupportState& st, const flow::FlowConfig& fc,
                const fs::path& dir, int index) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%04d", index);
    sphgrid::write_binary(st.s, (dir / (std::string(name) + ".bin")).string());
    json side = {{"format_version", kFormatVersion},
                 {"ambient", hypersurface::to_string(st.ambient)},
                 {"t", st.t},
                 {"grid", {{"I", g.I()}, {"J", g.J()}}},
                 {"f", fc.f.to_string()},
                 {"alpha", fc.alpha}};
    std::ofstream((dir / (std::string(name) + ".json")).string()) << side.dump(2) << "\n";
}

int do_run(const ExperimentConfig& c) {
    int I = c.grid_I, J = c.grid_J;
    const sphgrid::SphereGrid g(I, J);
    const auto fc = to_flow_config(c);
    const auto initial = initial_state(g, fc.ambient, c.init);
    const auto run = flow::run(g, fc, initial);

    diagnostics::write_csv(run.records, c.out + ".csv");
    std::vector<double> q, pinch;
    for (const auto& m : run.monitor) {
        q.push_back(m.q);
        pinch.push_back(m.pinch);
    }
    const auto vq = diagnostics::check_monotone_q(q);
    const auto vp = diagnostics::check_pinch_bound(pinch);

    json summary;
    summary["format_version"] = kFormatVersion;
    summary["termination"] = flow::to_string(run.termination);
    summary["steps"] = run.steps;
    summary["t_final"] = run.snapshots.back().t;
    if (run.T_star_estimate) summary["T_star_estimate"] = *run.T_star_estimate;
    const bool decay_applies = fc.ambient == Ambient::hyperbolic || (fc.ambient == Ambient::euclidean && fc.normalized);
    if (decay_applies) {
        try {
            const auto fit = diagnostics::fit_decay(run.records, fc.ambient);
            if (fit.already_round) {
                summary["decay"] = "already_round";
            } else {
                summary["decay_rate"] = fit.rate;
                summary["decay_residual"] = fit.residual;
            }
        } catch (const DomainError& e) {
            summary["decay"] = std::string("not fitted: ") + e.what();
        }
    }
    summary["pinch_initial"] = run.records.front().pinch;
    summary["pinch_max"] = *std::max_element(pinch.begin(), pinch.end());
    summary["q_initial"] = run.records.front().q;
    summary["q_final"] = run.records.back().q;
    summary["verdicts"] = {{"monotone_q", vq.pass}, {"pinch_bound", vp.pass}};
    if (!run.message.empty()) summary["message"] = run.message;
    summary["config"] = print_config(c);
    std::ofstream(c.out + ".json") << summary.dump(2) << "\n";

    if (c.svg) write_svg(g, run, c.out + ".svg");
    if (c.save_states) {
        const fs::path dir = c.out + ".states";
        fs::create_directories(dir);
        for (std::size_t k = 0; k < run.snapshots.size(); ++k) save_state(g, run.snapshots[k], fc, dir, static_cast<int>(k));
    }

    std::cout << "termination: " << flow::to_string(run.termination) << " at t = " << run.snapshots.back().t << " after "
              << run.steps << " steps\n";
    if (run.T_star_estimate) std::printf("T* estimate: %.6f\n", *run.T_star_estimate);
    std::cout << "monotone q: " << (vq.pass ? "pass" : "FAIL") << ", pinch bound: " << (vp.pass ? "pass" : "FAIL") << "\n";
    if (run.termination == flow::Termination::step_cap) std::cerr << "warning: step cap reached before t_end\n";

    if (run.termination == flow::Termination::convexity_lost) return kDegenerate;
    if (run.termination == flow::Termination::hyperbolic_margin && !run.message.empty()) return kDegenerate;
    return vq.pass && vp.pass ? kOk : kVerdictFailed;
}

int do_verify(const std::string& spec, int n, int samples, std::uint64_t seed, int paths, double C) {
    const auto f = curvfn::construct(spec, n);
    const auto rep = curvfn::verify_properties(f, samples, seed);
    std::printf("function %s, n = %d, %d samples, seed %llu\n", f.to_string().c_str(), n, samples,
                static_cast<unsigned long long>(seed));
    std::printf("flags: inverse_concave=%d concave=%d convex=%d\n", f.flags().inverse_concave, f.flags().concave, f.flags().convex);
    std::printf("%-26s %14s %12s  %s\n", "check", "value", "threshold", "result");
    for (const auto& c : rep.checks)
        std::printf("%-26s %14.6e %2s%10.1e  %s\n", c.name.c_str(), c.value, c.at_least ? ">=" : "<=", c.threshold,
                    c.pass ? "pass" : "FAIL");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> comp(std::log(0.1), std::log(10.0));
    double fd = 0.0;
    std::vector<double> p(n);
    for (int k = 0; k < 20; ++k) {
        for (auto& v : p) v = std::exp(comp(rng));
        fd = std::max(fd, oracle::fd_check(f, p).max_deviation());
    }
    const bool fd_ok = fd <= 1e-6;
    std::printf("%-26s %14.6e %2s%10.1e  %s\n", "fd_derivatives", fd, "<=", 1e-6, fd_ok ? "pass" : "FAIL");

    const auto decay = curvfn::boundary_decay_scan(f, paths, seed);
    std::printf("boundary decay of f_*:");
    for (std::size_t k = 0; k < decay.t_values.size(); ++k) std::printf("  t=%.0e sup=%.6e", decay.t_values[k], decay.sup_values[k]);
    std::printf("\n  limit estimate %.6e: %s\n", decay.limit_estimate, decay.decays ? "decays" : "does not decay");

    const auto pc = diagnostics::pinching_bound_constant(f, C, seed);
    if (pc.bounded)
        std::printf("pinching constant for C = %g: %.12g\n", C, pc.value);
    else
        std::printf("pinching constant for C = %g: unbounded (last estimate %.6g)\n", C, pc.value);

    return rep.pass() && fd_ok ? kOk : kVerdictFailed;
}

struct LoadedRun {
    std::string dir;
    int I = 0, J = 0;
    std::string f;
    std::vector<hypersurface::SupportState> states;
};

LoadedRun load_states(const std::string& dir) {
    LoadedRun out;
    out.dir = dir;
    std::vector<fs::path> sidecars;
    if (!fs::is_directory(dir)) throw ConfigError(dir + " is not a directory");
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json" && e.path().filename().string().starts_with("state_")) sidecars.push_back(e.path());
    std::sort(sidecars.begin(), sidecars.end());
    if (sidecars.empty()) throw ConfigError(dir + " holds no saved states");
    for (const auto& side : sidecars) {
        std::ifstream in(side);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("cannot parse " + side.string() + ": " + e.what());
        }
        hypersurface::SupportState st;
        st.ambient = hypersurface::parse_ambient(j.at("ambient").get<std::string>());
        st.t = j.at("t").get<double>();
        auto bin = side;
        bin.replace_extension(".bin");
        st.s = sphgrid::read_binary(bin.string());
        out.I = j.at("grid").at("I").get<int>();
        out.J = j.at("grid").at("J").get<int>();
        out.f = j.at("f").get<std::string>();
        if (st.s.I() != out.I || st.s.J() != out.J) throw ConfigError(bin.string() + " disagrees with its sidecar grid");
        out.states.push_back(std::move(st));
    }
    return out;
}

int do_duality(std::vector<std::string> dirs) {
    struct Series {
        LoadedRun run;
        flow::DualityResidual res;
    };
    std::vector<Series> all;
    for (const auto& d : dirs) {
        Series s;
        s.run = load_states(d);
        const sphgrid::SphereGrid g(s.run.I, s.run.J);
        s.res = flow::verify_polar_duality_residual(g, s.run.states, curvfn::construct(s.run.f, 2));
        all.push_back(std::move(s));
    }
    std::sort(all.begin(), all.end(), [](const Series& a, const Series& b) { return a.run.J < b.run.J; });
    for (const auto& s : all) {
        std::printf("%s (%dx%d)\n%12s %14s\n", s.run.dir.c_str(), s.run.I, s.run.J, "t", "max |R|");
        for (std::size_t k = 0; k < s.res.t.size(); ++k) std::printf("%12.6f %14.6e\n", s.res.t[k], s.res.max_residual[k]);
    }
    if (all.size() < 2) {
        std::cerr << "warning: a single resolution was given; no convergence order computed\n";
        return kOk;
    }
    bool ok = true;
    for (std::size_t k = 0; k + 1 < all.size(); ++k) {
        const auto& a = all[k].res;
        const auto& b = all[k + 1].res;
        double ra = 0.0, rb = 0.0;
        int common = 0;
        for (std::size_t x = 0; x < a.t.size(); ++x)
            for (std::size_t y = 0; y < b.t.size(); ++y)
                if (std::abs(a.t[x] - b.t[y]) <= 1e-9 * std::max(1.0, std::abs(a.t[x]))) {
                    ra = std::max(ra, a.max_residual[x]);
                    rb = std::max(rb, b.max_residual[y]);
                    ++common;
                }
        if (common == 0) throw ConfigError("runs " + all[k].run.dir + " and " + all[k + 1].run.dir + " share no snapshot times");
        const double ratio = static_cast<double>(all[k + 1].run.J) / all[k].run.J;
        const double order = std::log(ra / rb) / std::log(ratio);
        const bool at_floor = ra <= 1e-8;
        std::printf("order %dx%d -> %dx%d: %.3f (max residual %.3e -> %.3e over %d common times)%s\n", all[k].run.I,
                    all[k].run.J, all[k + 1].run.I, all[k + 1].run.J, order, ra, rb, common, at_floor ? " [at floor]" : "");
        if (!at_floor && !(order >= 1.5)) ok = false;
    }
    return ok ? kOk : kVerdictFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse curvature flows of convex surfaces in space forms"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Integrate a flow and write diagnostics");
    ExperimentConfig flags;
    std::string config_path, grid_text;
    std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> overrides;
    auto bind = [&](CLI::Option* opt, std::function<void(ExperimentConfig&)> apply) { overrides.emplace_back(opt, std::move(apply)); };
    run->add_option("--config", config_path, "key=value config file; flags override it");
    bind(run->add_option("--space", flags.space, "euclidean, hyperbolic or spherical"), [&](auto& c) { c.space = flags.space; });
    bind(run->add_option("--f", flags.f, "curvature function spec"), [&](auto& c) { c.f = flags.f; });
    bind(run->add_option("--alpha", flags.alpha), [&](auto& c) { c.alpha = flags.alpha; });
    bind(run->add_option("--init", flags.init, "sphere:<r> | spheroid:<a>,<b>,<c> | perturbed-sphere:<r>,<eps>,<mode>"),
         [&](auto& c) { c.init = flags.init; });
    bind(run->add_option("--grid", grid_text, "<I>x<J>"), [&](auto& c) { parse_grid(grid_text, c.grid_I, c.grid_J); });
    bind(run->add_option("--t-end", flags.t_end), [&](auto& c) { c.t_end = flags.t_end; });
    bind(run->add_option("--cfl", flags.cfl), [&](auto& c) { c.cfl = flags.cfl; });
    bind(run->add_option("--snap-every", flags.snap_every), [&](auto& c) { c.snap_every = flags.snap_every; });
    bind(run->add_option("--dt", flags.dt_fixed, "fixed time step"), [&](auto& c) { c.dt_fixed = flags.dt_fixed; });
    bind(run->add_option("--step-cap", flags.step_cap), [&](auto& c) { c.step_cap = flags.step_cap; });
    bind(run->add_option("--out", flags.out, "output prefix"), [&](auto& c) { c.out = flags.out; });
    bind(run->add_flag("--normalized", flags.normalized, "rescaled Euclidean flow"), [&](auto& c) { c.normalized = true; });
    bind(run->add_flag("--unsafe-alpha", flags.unsafe_alpha), [&](auto& c) { c.unsafe_alpha = true; });
    bind(run->add_flag("--svg", flags.svg), [&](auto& c) { c.svg = true; });
    bind(run->add_flag("--save-states", flags.save_states), [&](auto& c) { c.save_states = true; });

    // verify
    auto* verify = app.add_subcommand("verify", "Check the structural properties of a curvature function");
    std::string vspec;
    int vn = 2, vsamples = 10000, vpaths = 64;
    std::uint64_t vseed = 1;
    double vC = 4.0;
    verify->add_option("--f", vspec)->required();
    verify->add_option("--n", vn);
    verify->add_option("--samples", vsamples);
    verify->add_option("--seed", vseed);
    verify->add_option("--paths", vpaths, "rays for the boundary decay scan");
    verify->add_option("--C", vC, "constant of the pinching conversion");

    // duality
    auto* duality = app.add_subcommand("duality", "Polar-duality residual of saved spherical runs");
    std::vector<std::string> dirs;
    duality->add_option("dirs", dirs, "state directories written by run --save-states")->required();

    // oracle
    auto* orc = app.add_subcommand("oracle", "Radius of a geodesic sphere under the flow");
    std::string ospace = "euclidean";
    double oalpha = 1.0, or0 = 1.0, ot = 1.0;
    int on = 2;
    orc->add_option("--space", ospace);
    orc->add_option("--alpha", oalpha);
    orc->add_option("--r0", or0, "initial radius (geodesic radius off Euclidean space)");
    orc->add_option("--t", ot);
    orc->add_option("--n", on);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
            for (auto& [opt, apply] : overrides)
                if (opt->count() > 0) apply(c);
            return do_run(c);
        }
        if (*verify) return do_verify(vspec, vn, vsamples, vseed, vpaths, vC);
        if (*duality) return do_duality(dirs);
        if (*orc) {
            const double r = oracle::sphere_radius(hypersurface::parse_ambient(ospace), oalpha, or0, ot, on);
            std::printf("%.17g\n", r);
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConvexityLostError& e) {
        std::cerr << "convexity lost: " << e.what() << "\n";
        return kDegenerate;
    } catch (const StateInvalidError& e) {
        std::cerr << "state left its domain: " << e.what() << "\n";
        return kDegenerate;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kDegenerate;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}

}  // namespace icf::cli
