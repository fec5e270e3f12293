#include "magpack/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace magpack {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& section, const std::string& key) { return section + "." + key; }

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* b = v.data();
    const auto [ptr, ec] = std::from_chars(b, b + v.size(), out);
    if (ec != std::errc() || ptr != b + v.size() || !std::isfinite(out))
        throw ConfigError("config: " + where(section, key) + " = '" + v + "' is not a finite number");
    return out;
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
    int out = 0;
    const char* b = v.data();
    const auto [ptr, ec] = std::from_chars(b, b + v.size(), out);
    if (ec != std::errc() || ptr != b + v.size())
        throw ConfigError("config: " + where(section, key) + " = '" + v + "' is not an integer");
    return out;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: " + where(section, key) + " = '" + v + "' is not a boolean");
}

// "x, y" (a third component is accepted and must be 0 in d = 2)
Point to_point(const std::string& section, const std::string& key, const std::string& v) {
    Point p{};
    std::stringstream ss(v);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= kMaxDim) throw ConfigError("config: " + where(section, key) + " has too many components");
        p[i++] = to_double(section, key, trim(item));
    }
    if (i < 2) throw ConfigError("config: " + where(section, key) + " needs two comma separated components");
    return p;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_point(const Point& p) { return fmt_double(p[0]) + "," + fmt_double(p[1]); }

}  // namespace

ConfigSections parse_config_text(const std::string& text, const std::string& origin) {
    static const std::set<std::string> known = {"scenario", "grid", "frame", "flow", "volterra", "run"};
    ConfigSections out;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string at = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!known.count(section))
                throw ConfigError(at + ": unknown section [" + section +
                                  "] (expected scenario, grid, frame, flow, volterra, run)");
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
        if (section.empty()) throw ConfigError(at + ": key outside of a [section]");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError(at + ": empty key or value");
        if (out[section].count(key)) throw ConfigError(at + ": duplicate key " + where(section, key));
        out[section][key] = value;
    }
    return out;
}

ConfigSections load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void apply_setting(ExperimentConfig& c, const std::string& sec, const std::string& key, const std::string& v) {
    auto D = [&] { return to_double(sec, key, v); };
    auto I = [&] { return to_int(sec, key, v); };
    auto P = [&] { return to_point(sec, key, v); };
    auto B = [&] { return to_bool(sec, key, v); };
    bool ok = true;
    if (sec == "scenario") {
        if (key == "name") c.scenario = v;
        else if (key == "field") c.field = v;
        else if (key == "b") c.b = D();
        else if (key == "bump_amp") c.bump_amp = D();
        else if (key == "bump_width") c.bump_width = D();
        else if (key == "bump_center") c.bump_center = P();
        else if (key == "rate") c.rate = D();
        else if (key == "bump_rate") c.bump_rate = D();
        else if (key == "potential") c.potential = v;
        else if (key == "omega") c.omega = D();
        else if (key == "alpha") c.alpha = D();
        else if (key == "half_kinetic") c.half_kinetic = B();
        else if (key == "q") c.q = P();
        else if (key == "p") c.p = P();
        else if (key == "width") c.width = D();
        else if (key == "T") c.T = D();
        else if (key == "n_out") c.n_out = I();
        else if (key == "tolerance") c.tolerance = D();
        else ok = false;
    } else if (sec == "grid") {
        if (key == "n") c.n = I();
        else if (key == "L") c.L = D();
        else if (key == "reference_n") c.reference_n = I();
        else if (key == "reference_dt") c.reference_dt = D();
        else ok = false;
    } else if (sec == "frame") {
        if (key == "lambda") c.lambda = D();
        else if (key == "a") c.a = D();
        else if (key == "x_center") c.x_center = P();
        else if (key == "x_extent") c.x_extent = D();
        else if (key == "xi_extent") c.xi_extent = D();
        else if (key == "drop_tol") c.drop_tol = D();
        else if (key == "stamp_factor") c.stamp_factor = D();
        else ok = false;
    } else if (sec == "flow") {
        if (key == "dt") c.dt = D();
        else if (key == "signs") {
            if (v == "consistent") c.signs = FlowSigns::consistent;
            else if (v == "paper") c.signs = FlowSigns::paper;
            else throw ConfigError("config: flow.signs must be consistent or paper");
        } else ok = false;
    } else if (sec == "volterra") {
        if (key == "enabled") c.volterra = B();
        else if (key == "n_t") c.vo.n_t = I();
        else if (key == "tol") c.vo.tol = D();
        else if (key == "max_iter") c.vo.max_iter = I();
        else ok = false;
    } else if (sec == "run") {
        if (key == "seed") c.seed = static_cast<unsigned>(I());
        else if (key == "workers") c.workers = I();
        else if (key == "out") c.out_dir = v;
        else ok = false;
    } else {
        throw ConfigError("config: unknown section [" + sec + "]");
    }
    if (!ok) throw ConfigError("config: unknown key " + where(sec, key));
}

ExperimentConfig scenario_preset(const std::string& name) {
    ExperimentConfig c;
    c.scenario = name;
    if (name == "harmonic") {
        // defaults: A = 0, omega = 2 lambda^2 keeps the flowed lattice a tight frame
    } else if (name == "landau-harmonic") {
        c.field = "constant";
        c.b = 0.2;
    } else if (name == "timedep") {
        c.field = "timemod";
        c.b = 1.0;
        c.rate = 1.0;
    } else if (name == "free") {
        c.potential = "zero";
        c.omega = 0.0;
        c.q = Point{0.0, 0.0, 0.0};
        c.p = Point{0.0, 2.0, 0.0};
        c.width = 0.5;
        c.T = 0.25;
        c.n_out = 16;
        c.L = 6.0;
        c.x_center = Point{0.0, 0.25, 0.0};
        c.x_extent = 2.0;
    } else if (name == "constant-b") {
        c.field = "constant";
        c.b = 1.0;
        c.potential = "zero";
        c.omega = 0.0;
        c.q = Point{0.0, 0.0, 0.0};
        c.p = Point{1.0, 0.0, 0.0};
        c.width = 0.7;
        c.L = 8.0;
        c.x_center = Point{};
        c.x_extent = 3.0;
        c.lambda = 1.0;
    } else if (name == "bump") {
        c.field = "bump";
        c.b = 1.0;
        c.bump_amp = 0.5;
        c.bump_width = 1.0;
        c.bump_center = Point{1.0, 0.0, 0.0};
        c.potential = "zero";
        c.omega = 0.0;
        c.q = Point{0.0, 0.0, 0.0};
        c.p = Point{1.0, 0.0, 0.0};
        c.width = 0.7;
        c.L = 8.0;
        c.x_center = Point{};
        c.x_extent = 3.0;
        c.lambda = 1.0;
    } else {
        throw ConfigError("unknown scenario '" + name +
                          "' (free, harmonic, constant-b, landau-harmonic, bump, timedep)");
    }
    return c;
}

ExperimentConfig config_from_sections(const ConfigSections& s) {
    std::string name = "harmonic";
    if (auto it = s.find("scenario"); it != s.end())
        if (auto k = it->second.find("name"); k != it->second.end()) name = k->second;
    ExperimentConfig c = scenario_preset(name);
    auto fr = s.find("frame");
    if (fr == s.end() || !fr->second.count("lambda"))
        throw ConfigError("config: missing required key frame.lambda");
    for (const auto& [sec, kv] : s)
        for (const auto& [k, v] : kv) apply_setting(c, sec, k, v);
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> fields = {"zero", "constant", "bump", "timemod", "timemod-bump"};
    static const std::set<std::string> pots = {"zero", "harmonic", "anharmonic"};
    if (!fields.count(field)) throw ConfigError("config: scenario.field '" + field + "' is not a shipped field");
    if (!pots.count(potential)) throw ConfigError("config: scenario.potential must be zero, harmonic or anharmonic");
    if (!(lambda >= 1.0)) throw ConfigError("config: frame.lambda must be >= 1");
    if (!(a > 0.0) || a * a > kPi / 2.0)
        throw ConfigError("config: frame.a must satisfy dx*dxi = a^2 <= pi/2 (4x oversampling)");
    if (!(stamp_factor >= 8.0)) throw ConfigError("config: frame.stamp_factor must be >= 8");
    if (!(drop_tol >= 0.0 && drop_tol < 1.0)) throw ConfigError("config: frame.drop_tol must be in [0, 1)");
    if (!(x_extent > 0.0)) throw ConfigError("config: frame.x_extent must be positive");
    if (x_extent + std::max(std::abs(x_center[0]), std::abs(x_center[1])) + stamp_factor / lambda >= L)
        throw ConfigError("config: x lattice plus stamp radius exceeds grid.L; enlarge L or reduce frame.x_extent");
    if (!(L > 0.0)) throw ConfigError("config: grid.L must be positive");
    if (n < 16) throw ConfigError("config: grid.n must be >= 16");
    if (!(dt > 0.0 && dt <= 1e-2)) throw ConfigError("config: flow.dt must be in (0, 1e-2]");
    if (!(T >= 0.0)) throw ConfigError("config: scenario.T must be >= 0");
    if (n_out < 1) throw ConfigError("config: scenario.n_out must be >= 1");
    if (!(width > 0.0)) throw ConfigError("config: scenario.width must be positive");
    if (vo.n_t < 8) throw ConfigError("config: volterra.n_t must be >= 8");
    if (n_out % vo.n_t != 0) throw ConfigError("config: volterra.n_t must divide scenario.n_out");
    if (!(vo.tol > 0.0)) throw ConfigError("config: volterra.tol must be positive");
    if (vo.max_iter < 1) throw ConfigError("config: volterra.max_iter must be >= 1");
    if (workers < 1) throw ConfigError("config: run.workers must be >= 1");
    if (!(reference_dt > 0.0)) throw ConfigError("config: grid.reference_dt must be positive");
    if (reference_n < n || reference_n % n != 0)
        throw ConfigError("config: grid.reference_n must be a multiple of grid.n");
    (void)grid();  // n = 2^a 3^b
}

std::string ExperimentConfig::canonical() const {
    std::vector<std::string> lines = {
        "scenario.name=" + scenario,
        "scenario.field=" + field,
        "scenario.b=" + fmt_double(b),
        "scenario.bump_amp=" + fmt_double(bump_amp),
        "scenario.bump_width=" + fmt_double(bump_width),
        "scenario.bump_center=" + fmt_point(bump_center),
        "scenario.rate=" + fmt_double(rate),
        "scenario.bump_rate=" + fmt_double(bump_rate),
        "scenario.potential=" + potential,
        "scenario.omega=" + fmt_double(omega),
        "scenario.alpha=" + fmt_double(alpha),
        std::string("scenario.half_kinetic=") + (half_kinetic ? "true" : "false"),
        "scenario.q=" + fmt_point(q),
        "scenario.p=" + fmt_point(p),
        "scenario.width=" + fmt_double(width),
        "scenario.T=" + fmt_double(T),
        "scenario.n_out=" + std::to_string(n_out),
        "scenario.tolerance=" + fmt_double(tolerance),
        "grid.n=" + std::to_string(n),
        "grid.L=" + fmt_double(L),
        "grid.reference_n=" + std::to_string(reference_n),
        "grid.reference_dt=" + fmt_double(reference_dt),
        "frame.lambda=" + fmt_double(lambda),
        "frame.a=" + fmt_double(a),
        "frame.x_center=" + fmt_point(x_center),
        "frame.x_extent=" + fmt_double(x_extent),
        "frame.xi_extent=" + fmt_double(xi_extent),
        "frame.drop_tol=" + fmt_double(drop_tol),
        "frame.stamp_factor=" + fmt_double(stamp_factor),
        "flow.dt=" + fmt_double(dt),
        std::string("flow.signs=") + (signs == FlowSigns::paper ? "paper" : "consistent"),
        std::string("volterra.enabled=") + (volterra ? "true" : "false"),
        "volterra.n_t=" + std::to_string(vo.n_t),
        "volterra.tol=" + fmt_double(vo.tol),
        "volterra.max_iter=" + std::to_string(vo.max_iter),
        "run.seed=" + std::to_string(seed),
    };
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

GaugeData ExperimentConfig::gauge() const {
    FieldPtr f;
    if (field == "zero") f = zero_field();
    else if (field == "constant") f = constant_field(b);
    else if (field == "bump") f = bump_field(b, bump_amp, bump_width, bump_center);
    else if (field == "timemod") f = timemod_field(b, rate);
    else f = timemod_bump_field(b, rate, bump_amp, bump_width, bump_center, bump_rate);
    return make_gauge(f);
}

SymbolH ExperimentConfig::symbol() const {
    Potential V = potential == "zero"        ? zero_potential()
                  : potential == "harmonic" ? harmonic_potential(omega)
                                            : anharmonic_potential(omega, alpha);
    return kinetic_symbol(V, half_kinetic ? 0.5 : 1.0);
}

GaussianState ExperimentConfig::initial() const { return GaussianState{q, p, width}; }

SpatialGrid ExperimentConfig::grid() const { return SpatialGrid(2, L, n); }

WavepacketFrame ExperimentConfig::frame() const {
    FrameOptions fo;
    fo.a = a;
    fo.x_center = x_center;
    fo.x_extent = x_extent;
    fo.xi_center = Point{};
    fo.xi_extent = xi_extent > 0.0 ? xi_extent : norm(p, 2) + 6.0 * lambda;
    fo.stamp_factor = stamp_factor;
    fo.drop_tol = 1e-12;
    WavepacketFrame fr = make_frame(gauge(), lambda, grid(), fo);
    calibrate(fr, 0.0, workers);
    return fr;
}

FlowIntegrator ExperimentConfig::integrator() const {
    FlowIntegrator in;
    in.dt = dt;
    in.gauge = gauge();
    in.symbol = symbol();
    in.time_dependent = time_dependent();
    in.signs = signs;
    return in;
}

bool ExperimentConfig::has_exact() const {
    if (potential == "anharmonic") return false;
    return field == "zero" || field == "constant" || field == "timemod";
}

GridFunction ExperimentConfig::exact(double t, const SpatialGrid& g) const {
    if (!has_exact()) throw CapabilityError("scenario " + scenario + " has no closed-form solution");
    ExactParams ep;
    ep.kappa = half_kinetic ? 0.5 : 1.0;
    ep.omega = potential == "harmonic" ? omega : 0.0;
    ep.b = field == "zero" ? 0.0 : b;
    ep.rate = field == "timemod" ? rate : 0.0;
    ExactKind kind = ep.b != 0.0 ? ExactKind::landau : (ep.omega != 0.0 ? ExactKind::harmonic : ExactKind::free);
    return exact_solution(kind, ep, initial(), t, g);
}

}  // namespace magpack
