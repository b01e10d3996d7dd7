#pragma once

// Command-line front end: run, verify, duality and oracle subcommands.

#include "icf/flow.hpp"
#include "icf/hypersurface.hpp"

#include <string>
#include <string_view>

namespace icf::cli {

inline constexpr int kFormatVersion = 1;

enum ExitCode { kOk = 0, kVerdictFailed = 1, kDegenerate = 2, kConfigError = 3 };

/// Everything needed to reproduce one run. Serialized as flat key=value lines.
struct ExperimentConfig {
    std::string space = "euclidean";
    std::string f = "power-mean:1";
    double alpha = 1.0;
    std::string init = "sphere:1";
    int grid_I = 64;
    int grid_J = 32;
    double t_end = 1.0;
    double cfl = 0.2;
    double snap_every = 0.05;
    bool normalized = false;
    bool unsafe_alpha = false;
    double dt_fixed = 0.0;
    double hyperbolic_margin = 1e-4;
    double spherical_max_Y = 50.0;
    long step_cap = 20'000'000;
    std::string out = "run";
    bool svg = false;
    bool save_states = false;

    bool operator==(const ExperimentConfig&) const = default;
};

std::string print_config(const ExperimentConfig& c);
/// Throws ConfigError on unknown keys or malformed values. Blank lines and
/// lines starting with '#' are skipped.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Parses "<I>x<J>".
void parse_grid(std::string_view text, int& I, int& J);

/// sphere:<r>, spheroid:<a>,<b>,<c> or perturbed-sphere:<r>,<eps>,<mode>, as
/// support functions of the chart image. Throws ConfigError.
hypersurface::SupportState initial_state(const sphgrid::SphereGrid& g, hypersurface::Ambient ambient, std::string_view init);

flow::FlowConfig to_flow_config(const ExperimentConfig& c);

/// Writes the meridian profile of each snapshot and the q / pinch curves.
void write_svg(const sphgrid::SphereGrid& g, const flow::FlowRun& run, const std::string& path);

/// Entry point of the `icf` executable; returns the process exit code.
int main(int argc, char** argv);

}  // namespace icf::cli
