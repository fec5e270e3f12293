#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "magpack/harness.hpp"
#include "magpack/simd.hpp"

using namespace magpack;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

std::string output_dir(const std::string& flag, const std::string& fallback) {
    if (const char* env = std::getenv("MAGPACK_OUT"); env && *env) return env;
    return flag.empty() ? fallback : flag;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magnetic wavepacket propagator toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    std::string config_path, out_flag;
    int workers = 1;
    std::optional<unsigned> seed;
    app.add_option("--config", config_path, "Config file (flat [section] key = value)");
    app.add_option("--out", out_flag, "Output directory (MAGPACK_OUT overrides)");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "RNG seed");

    auto* run = app.add_subcommand("run", "Run one pipeline");
    std::string pipeline, scenario;
    std::optional<double> lambda, T;
    std::vector<std::string> settings;
    run->add_option("pipeline", pipeline, "Pipeline name")->required()->check(CLI::IsMember(pipeline_names()));
    run->add_option("--scenario", scenario, "Scenario preset");
    run->add_option("--lambda", lambda, "Frame parameter lambda");
    run->add_option("--T", T, "Final time");
    run->add_option("--set", settings, "Override, section.key=value (repeatable)");

    auto* cmp = app.add_subcommand("compare", "Compare two .gfd files");
    std::string file_a, file_b;
    std::optional<double> tol;
    cmp->add_option("a", file_a)->required()->check(CLI::ExistingFile);
    cmp->add_option("b", file_b)->required()->check(CLI::ExistingFile);
    cmp->add_option("--tol", tol, "Fail (exit 1) when the relative L2 error exceeds this");

    auto* self = app.add_subcommand("selftest", "Run the acceptance suite");
    std::vector<std::string> only;
    self->add_option("--only", only, "Criteria to run, e.g. AC-4");

    // Global flags are accepted after the subcommand as well.
    for (auto* sub : {run, cmp, self}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (*run) {
            ExperimentConfig cfg;
            if (!config_path.empty()) {
                ConfigSections sec = load_config_file(config_path);
                if (!scenario.empty()) sec["scenario"]["name"] = scenario;
                cfg = config_from_sections(sec);
            } else {
                cfg = scenario_preset(scenario.empty() ? "harmonic" : scenario);
            }
            if (lambda) cfg.lambda = *lambda;
            if (T) cfg.T = *T;
            for (const auto& s : settings) {
                const auto eq = s.find('='), dot = s.find('.');
                if (eq == std::string::npos || dot == std::string::npos || dot > eq)
                    throw ConfigError("--set expects section.key=value, got '" + s + "'");
                apply_setting(cfg, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
            }
            cfg.workers = workers;
            if (seed) cfg.seed = *seed;
            cfg.out_dir = output_dir(out_flag, cfg.out_dir);
            cfg.validate();
            const PipelineResult r = run_pipeline(pipeline, cfg, cfg.out_dir);
            std::cout << r.summary.dump(2) << '\n';
            std::cout << (r.pass ? "PASS" : "FAIL") << ' ' << pipeline << '\n';
            return r.pass ? kPass : kFail;
        }
        if (*cmp) {
            const CompareResult r = compare_files(file_a, file_b);
            std::printf("relative_l2 %.10e\nmax_abs %.10e\n", r.relative_l2, r.max_abs);
            return tol && r.relative_l2 > *tol ? kFail : kPass;
        }
        if (*self) {
            AcceptanceOptions opt;
            opt.only = only;
            opt.workers = workers;
            if (seed) opt.seed = *seed;
            opt.out_dir = output_dir(out_flag, "");
            std::printf("simd: %s\n", simd::isa_name(simd::active().isa));
            const auto results = run_acceptance(opt);
            int failed = 0;
            for (const auto& r : results) failed += r.pass ? 0 : 1;
            std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
            return failed == 0 ? kPass : kFail;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
