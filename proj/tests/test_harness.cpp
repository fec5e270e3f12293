#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "magpack/harness.hpp"

using namespace magpack;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("magpack_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    const auto s = parse_config_text("[scenario]\nname = harmonic # comment\n\n[frame]\nlambda = 4\n");
    CHECK(s.at("scenario").at("name") == "harmonic");
    const ExperimentConfig c = config_from_sections(s);
    CHECK(c.lambda == 4.0);
    CHECK_THROWS_AS(parse_config_text("[nope]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[grid]\nn = 1\nn = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("n = 1\n"), ConfigError);
    CHECK_THROWS_AS(config_from_sections(parse_config_text("[grid]\nn = 128\n")), ConfigError);
    CHECK_THROWS_AS(config_from_sections(parse_config_text("[frame]\nlambda = 4\nbogus = 1\n")), ConfigError);
    CHECK_THROWS_AS(config_from_sections(parse_config_text("[frame]\nlambda = 0.5\n")), ConfigError);
    CHECK_THROWS_AS(scenario_preset("unknown"), ConfigError);
}

TEST_CASE("config hash is canonical") {
    ExperimentConfig a = scenario_preset("landau-harmonic"), b = a;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    apply_setting(b, "frame", "lambda", "8");
    CHECK(a.hash() != b.hash());
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("gfd round trip and compare") {
    const fs::path dir = scratch("gfd");
    const SpatialGrid g(2, 3.0, 32);
    const GridFunction u = gaussian_state(g, GaussianState{Point{0.1, 0.0, 0.0}, Point{1.0, 2.0, 0.0}, 0.6});
    write_gfd((dir / "a.gfd").string(), u, GfdMeta{"constant", 2.0, 0.25});
    GfdMeta m;
    const GridFunction r = read_gfd((dir / "a.gfd").string(), &m);
    CHECK(r.grid == g);
    CHECK(max_abs_diff(r, u) == 0.0);
    CHECK(m.field == "constant");
    CHECK(m.t == 0.25);
    const std::string text = slurp(dir / "a.gfd");
    CHECK(text.substr(0, text.find('\n')).front() == '{');

    CHECK(compare_files((dir / "a.gfd").string(), (dir / "a.gfd").string()).relative_l2 == 0.0);
    write_gfd((dir / "b.gfd").string(), cplx(2.0) * u);
    CHECK(compare_files((dir / "b.gfd").string(), (dir / "a.gfd").string()).relative_l2 == doctest::Approx(1.0).epsilon(1e-14));
    write_gfd((dir / "c.gfd").string(), GridFunction(SpatialGrid(2, 3.0, 64)));
    CHECK_THROWS_AS(compare_files((dir / "a.gfd").string(), (dir / "c.gfd").string()), ConfigError);
}

TEST_CASE("pipelines are deterministic and stamped") {
    ExperimentConfig c = config_from_sections(load_config_file(MAGPACK_TEST_DATA "/flow_small.cfg"));
    const fs::path d1 = scratch("run1"), d2 = scratch("run2");
    const PipelineResult r1 = run_pipeline("flow-ensemble", c, d1.string());
    const PipelineResult r2 = run_pipeline("flow-ensemble", c, d2.string());
    CHECK(r1.pass);
    CHECK(r1.summary.at("config_hash") == c.hash());
    CHECK(r1.summary.at("version") == version_string());
    REQUIRE_FALSE(r1.files.empty());
    for (const auto& f : r1.files) {
        if (fs::path(f).extension() != ".csv") continue;
        const fs::path rel = fs::relative(f, d1);
        CHECK(slurp(f) == slurp(d2 / rel));
    }
    CHECK(fs::exists(d1 / "flow-ensemble" / "summary.json"));
    CHECK_THROWS_AS(run_pipeline("nope", c, d1.string()), ConfigError);
}
