#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "magpack/flow.hpp"
#include "magpack/phasespace.hpp"
#include "magpack/propagate.hpp"
#include "magpack/refsolve.hpp"

namespace magpack {

// Flat "key = value" text with [section] headers; '#' starts a comment.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

ConfigSections parse_config_text(const std::string& text, const std::string& origin = "<config>");
ConfigSections load_config_file(const std::string& path);

struct ExperimentConfig {
    // [scenario]
    std::string scenario = "harmonic";
    std::string field = "zero";  // zero | constant | bump | timemod | timemod-bump
    double b = 0.0;
    double bump_amp = 0.0, bump_width = 1.0;
    Point bump_center{};
    double rate = 0.0, bump_rate = 0.0;
    std::string potential = "harmonic";  // zero | harmonic | anharmonic
    double omega = 32.0;
    double alpha = 0.0;
    bool half_kinetic = false;  // h = |eta|^2/2 + V
    Point q{0.5, 0.0, 0.0}, p{0.0, 4.0, 0.0};
    double width = 0.25;
    double T = 0.5;
    int n_out = 32;
    double tolerance = 0.1;  // pass threshold of the run pipelines
    // [grid]
    int n = 128;
    double L = 5.0;
    int reference_n = 256;  // Crank-Nicolson reference grid
    double reference_dt = 1e-3;
    // [frame]
    double lambda = 4.0;
    double a = 1.0;  // dx = a / lambda, dxi = a * lambda
    Point x_center{0.25, 0.0, 0.0};
    double x_extent = 2.0;
    double xi_extent = 0.0;  // 0 picks |p| + 6 lambda
    double drop_tol = 1e-4;
    double stamp_factor = 8.0;
    // [flow]
    double dt = 1e-3;
    FlowSigns signs = FlowSigns::consistent;
    // [volterra]
    bool volterra = true;
    VolterraOptions vo{16, 1e-6, 150};
    // [run]
    unsigned seed = 1;
    int workers = 1;
    std::string out_dir = "magpack_out";

    void validate() const;
    // Canonical "section.key=value" lines, sorted; the hash input.
    std::string canonical() const;
    std::string hash() const;  // 16 hex digits, FNV-1a 64 of canonical()

    GaugeData gauge() const;
    SymbolH symbol() const;
    GaussianState initial() const;
    SpatialGrid grid() const;
    WavepacketFrame frame() const;  // calibrated
    FlowIntegrator integrator() const;
    bool time_dependent() const { return field == "timemod" || field == "timemod-bump"; }
    // Closed-form oracle when one exists for this scenario.
    bool has_exact() const;
    GridFunction exact(double t, const SpatialGrid& g) const;
};

// Shipped presets: free, harmonic, constant-b, landau-harmonic, bump, timedep.
ExperimentConfig scenario_preset(const std::string& name);
// Preset named by [scenario] name (default harmonic), then every key in the sections.
// Unknown sections or keys and missing frame.lambda are ConfigErrors.
ExperimentConfig config_from_sections(const ConfigSections& s);
void apply_setting(ExperimentConfig& c, const std::string& section, const std::string& key,
                   const std::string& value);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace magpack
