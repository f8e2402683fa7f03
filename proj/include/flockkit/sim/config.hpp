#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "flockkit/alignment.hpp"
#include "flockkit/errors.hpp"
#include "flockkit/kinetic.hpp"
#include "flockkit/mcu_flux.hpp"
#include "flockkit/sim/csv.hpp"

namespace flockkit::sim {

enum class TestKind { test1, test2, test3, crosscheck, custom };
enum class OracleKind { off, direct, homogeneous };
enum class InitKind { gaussian, box };

/// Everything a run needs. Defaults depend on the test (see defaults_for).
struct RunConfig {
    TestKind test = TestKind::custom;
    Model model = Model::mt;
    FluxFamily flux_family = FluxFamily::mcu;
    ThetaPolicy theta_policy = ThetaPolicy::sign_of_c;
    double theta_mcu = 0.0;
    F5Variant f5_variant = F5Variant::improved;
    ForceScheme force_scheme = ForceScheme::unsplit;
    MacroScheme macro_scheme = MacroScheme::muscl;

    std::size_t nx = 75;
    std::size_t nxi = 101;
    double x_min = -0.5;
    double x_max = 0.5;
    double xi_min = -15.0;
    double xi_max = 15.0;
    BoundaryKind bc_x = BoundaryKind::periodic;

    double dt = 1.0 / 5000.0; ///< 0 selects the adaptive step from cfl
    double cfl = 0.9;
    double t_end = 5.0;
    std::vector<double> snapshot_times{0.0, 0.5, 2.5, 5.0};
    std::string output_dir = "out";
    OracleKind oracle = OracleKind::off;
    CflPolicy cfl_policy = CflPolicy::warn;
    std::size_t diag_every = 15;
    double support_threshold = 1e-4;

    InfluenceKind phi = InfluenceKind::indicator;
    double phi_radius = 0.1;

    InitKind init = InitKind::gaussian;
    double rho_floor = 0.01;
    double rho_temp = 0.01;
    double u_mean = 5.0;
    double u_amp = 1.0;
    double v_temp = 1.0;
    double box_x = 0.25;
    double box_v = 2.0;
    std::size_t nv_quad = 2001;
    double v_quad_min = -5.0;
    double v_quad_max = 15.0;

    // Test 1 (anti-drift toy model).
    double drift_c = 1.0;
    double gauss_temp = 0.01;
    double gauss_c1 = 0.9375;
    double gauss_c2 = -0.3125;
    double table_t_end = 0.2;
    std::vector<double> table_nxi{101, 201, 401};
    std::size_t ref_nxi = 2000;
    double ref_dt = 1.0 / 1500.0;

    // Cross-check.
    std::vector<double> cross_nx{6, 12, 24};
    std::vector<double> cross_nxi{11, 23, 47};
};

inline const char* test_name(TestKind t) {
    switch (t) {
    case TestKind::test1: return "test1";
    case TestKind::test2: return "test2";
    case TestKind::test3: return "test3";
    case TestKind::crosscheck: return "crosscheck";
    case TestKind::custom: return "custom";
    }
    return "?";
}

inline RunConfig defaults_for(TestKind t) {
    RunConfig c;
    c.test = t;
    switch (t) {
    case TestKind::test1:
        c.nx = 1;
        c.nxi = 101;
        c.xi_min = -3.5;
        c.xi_max = 3.5;
        c.dt = 1.0 / 300.0;
        c.t_end = 0.3;
        c.snapshot_times = {0.3};
        c.diag_every = 1;
        c.cfl_policy = CflPolicy::error;
        break;
    case TestKind::test2:
        c.dt = 1.0 / 5000.0;
        break;
    case TestKind::test3:
        c.model = Model::cs;
        c.nxi = 75;
        c.xi_min = -10.0;
        c.xi_max = 10.0;
        c.dt = 0.0;
        c.force_scheme = ForceScheme::split_remap;
        c.macro_scheme = MacroScheme::kinetic;
        c.t_end = 15.0;
        c.snapshot_times = {0.0, 1.0, 2.0, 15.0};
        c.diag_every = 30;
        c.phi = InfluenceKind::inverse_sqrt;
        c.init = InitKind::box;
        c.nv_quad = 500;
        c.v_quad_min = -2.5;
        c.v_quad_max = 2.5;
        break;
    case TestKind::crosscheck:
        c.nx = 12;
        c.nxi = 23;
        c.xi_min = -6.0;
        c.xi_max = 6.0;
        c.dt = 0.0;
        c.cfl = 0.5;
        c.t_end = 0.25;
        c.snapshot_times = {};
        c.phi = InfluenceKind::inverse_sqrt;
        c.u_mean = 0.0;
        c.u_amp = 0.5;
        c.rho_floor = 1.0;
        c.rho_temp = 0.0;
        c.v_quad_min = -8.0;
        c.v_quad_max = 8.0;
        c.cfl_policy = CflPolicy::error;
        break;
    case TestKind::custom:
        break;
    }
    return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& val, const char* expect) {
    throw ConfigError("config: key '" + key + "' has invalid value '" + val + "' (expected " + expect + ")");
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) bad_value(key, v, "a finite number");
        return d;
    } catch (const std::logic_error&) {
        bad_value(key, v, "a finite number");
    }
}

/// Accepts "1/1500" as well as plain numbers.
inline double to_number(const std::string& key, const std::string& v) {
    const auto slash = v.find('/');
    if (slash == std::string::npos) return to_double(key, v);
    const double den = to_double(key, trim(v.substr(slash + 1)));
    if (den == 0.0) bad_value(key, v, "a nonzero denominator");
    return to_double(key, trim(v.substr(0, slash))) / den;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d < 0.0 || d != std::floor(d)) bad_value(key, v, "a nonnegative integer");
    return static_cast<std::size_t>(d);
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_number(key, item));
    }
    return out;
}

inline std::string list_str(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt17(v[k]);
    return s;
}

template <class E>
struct EnumName {
    E value;
    const char* name;
};

template <class E, std::size_t K>
E to_enum(const std::string& key, const std::string& v, const EnumName<E> (&table)[K], const char* expect) {
    for (const auto& e : table) {
        if (v == e.name) return e.value;
    }
    bad_value(key, v, expect);
}

template <class E, std::size_t K>
std::string enum_str(E v, const EnumName<E> (&table)[K]) {
    for (const auto& e : table) {
        if (v == e.value) return e.name;
    }
    return "?";
}

inline constexpr EnumName<Model> kModels[] = {{Model::mt, "mt"}, {Model::cs, "cs"}, {Model::free_transport, "free"}};
inline constexpr EnumName<FluxFamily> kFamilies[] = {{FluxFamily::upwind, "upwind"}, {FluxFamily::mcu, "mcu"}};
inline constexpr EnumName<F5Variant> kF5[] = {{F5Variant::improved, "improved"}, {F5Variant::simple, "simple"}};
inline constexpr EnumName<ForceScheme> kForce[] = {{ForceScheme::unsplit, "unsplit"}, {ForceScheme::split_remap, "split_remap"}};
inline constexpr EnumName<MacroScheme> kMacro[] = {{MacroScheme::muscl, "muscl"}, {MacroScheme::kinetic, "kinetic"}};
inline constexpr EnumName<BoundaryKind> kBc[] = {{BoundaryKind::periodic, "periodic"}, {BoundaryKind::outflow, "outflow"}};
inline constexpr EnumName<OracleKind> kOracle[] = {{OracleKind::off, "off"}, {OracleKind::direct, "direct"}, {OracleKind::homogeneous, "homogeneous"}};
inline constexpr EnumName<CflPolicy> kCfl[] = {{CflPolicy::error, "error"}, {CflPolicy::warn, "warn"}, {CflPolicy::ignore, "ignore"}};
inline constexpr EnumName<InfluenceKind> kPhi[] = {{InfluenceKind::indicator, "indicator"}, {InfluenceKind::inverse_sqrt, "inverse_sqrt"}, {InfluenceKind::sqrt_growth, "sqrt_growth"}};
inline constexpr EnumName<InitKind> kInit[] = {{InitKind::gaussian, "gaussian"}, {InitKind::box, "box"}};
inline constexpr EnumName<TestKind> kTests[] = {{TestKind::test1, "test1"}, {TestKind::test2, "test2"}, {TestKind::test3, "test3"}, {TestKind::crosscheck, "crosscheck"}, {TestKind::custom, "custom"}};

struct KeySpec {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define FK_NUM(name)                                                                         \
    KeySpec{#name, [](RunConfig& c, const std::string& v) { c.name = to_number(#name, v); }, \
            [](const RunConfig& c) { return fmt17(c.name); }}
#define FK_CNT(name)                                                                        \
    KeySpec{#name, [](RunConfig& c, const std::string& v) { c.name = to_count(#name, v); }, \
            [](const RunConfig& c) { return std::to_string(c.name); }}
#define FK_LIST(name)                                                                      \
    KeySpec{#name, [](RunConfig& c, const std::string& v) { c.name = to_list(#name, v); }, \
            [](const RunConfig& c) { return list_str(c.name); }}
#define FK_ENUM(name, table, expect)                                                                   \
    KeySpec{#name, [](RunConfig& c, const std::string& v) { c.name = to_enum(#name, v, table, expect); }, \
            [](const RunConfig& c) { return enum_str(c.name, table); }}

inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        FK_ENUM(test, kTests, "test1|test2|test3|crosscheck|custom"),
        FK_ENUM(model, kModels, "mt|cs|free"),
        FK_ENUM(flux_family, kFamilies, "upwind|mcu"),
        KeySpec{"theta_mcu",
                [](RunConfig& c, const std::string& v) {
                    if (v == "sign") {
                        c.theta_policy = ThetaPolicy::sign_of_c;
                        return;
                    }
                    const double th = to_number("theta_mcu", v);
                    if (th < -1.0 || th > 1.0) bad_value("theta_mcu", v, "a number in [-1, 1] or 'sign'");
                    c.theta_policy = ThetaPolicy::fixed;
                    c.theta_mcu = th;
                },
                [](const RunConfig& c) {
                    return c.theta_policy == ThetaPolicy::sign_of_c ? std::string("sign") : fmt17(c.theta_mcu);
                }},
        FK_ENUM(f5_variant, kF5, "improved|simple"),
        FK_ENUM(force_scheme, kForce, "unsplit|split_remap"),
        FK_ENUM(macro_scheme, kMacro, "muscl|kinetic"),
        FK_CNT(nx), FK_CNT(nxi),
        FK_NUM(x_min), FK_NUM(x_max), FK_NUM(xi_min), FK_NUM(xi_max),
        FK_ENUM(bc_x, kBc, "periodic|outflow"),
        FK_NUM(dt), FK_NUM(cfl), FK_NUM(t_end),
        FK_LIST(snapshot_times),
        KeySpec{"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                [](const RunConfig& c) { return c.output_dir; }},
        FK_ENUM(oracle, kOracle, "off|direct|homogeneous"),
        FK_ENUM(cfl_policy, kCfl, "error|warn|ignore"),
        FK_CNT(diag_every), FK_NUM(support_threshold),
        FK_ENUM(phi, kPhi, "indicator|inverse_sqrt|sqrt_growth"),
        FK_NUM(phi_radius),
        FK_ENUM(init, kInit, "gaussian|box"),
        FK_NUM(rho_floor), FK_NUM(rho_temp), FK_NUM(u_mean), FK_NUM(u_amp), FK_NUM(v_temp),
        FK_NUM(box_x), FK_NUM(box_v), FK_CNT(nv_quad), FK_NUM(v_quad_min), FK_NUM(v_quad_max),
        FK_NUM(drift_c), FK_NUM(gauss_temp), FK_NUM(gauss_c1), FK_NUM(gauss_c2),
        FK_NUM(table_t_end), FK_LIST(table_nxi), FK_CNT(ref_nxi), FK_NUM(ref_dt),
        FK_LIST(cross_nx), FK_LIST(cross_nxi),
    };
    return table;
}

#undef FK_NUM
#undef FK_CNT
#undef FK_LIST
#undef FK_ENUM

} // namespace detail

/// Applies one key=value pair. Unknown keys are errors.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    for (const auto& k : detail::key_table()) {
        if (key == k.key) {
            k.set(c, value);
            return;
        }
    }
    throw ConfigError("config: unknown key '" + key + "'");
}

inline void apply_assignment(RunConfig& c, const std::string& line, const std::string& where) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    for (char ch : key) {
        if (!(std::islower(static_cast<unsigned char>(ch)) || std::isdigit(static_cast<unsigned char>(ch)) || ch == '_')) {
            throw ConfigError(where + ": key '" + key + "' is not lower_snake_case");
        }
    }
    apply_setting(c, key, val);
}

/// Flat key=value text; '#' starts a comment.
inline void parse_config_text(RunConfig& c, const std::string& text, const std::string& origin = "config") {
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        apply_assignment(c, line, origin + ":" + std::to_string(lineno));
    }
}

inline void parse_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    parse_config_text(c, buf.str(), path);
}

/// Canonical text form: every key, one per line, in table order.
inline std::string to_text(const RunConfig& c) {
    std::string out;
    for (const auto& k : detail::key_table()) out += std::string(k.key) + "=" + k.get(c) + "\n";
    return out;
}

inline void validate(const RunConfig& c) {
    const auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (c.nx < 1 || c.nxi < 3) fail("nx must be >= 1 and nxi >= 3");
    if (!(c.x_min < c.x_max)) fail("x_min must be < x_max");
    if (!(c.xi_min < c.xi_max)) fail("xi_min must be < xi_max");
    if (c.dt < 0.0) fail("dt must be >= 0 (0 selects the adaptive step)");
    if (!(c.cfl > 0.0 && c.cfl <= 1.0)) fail("cfl must lie in (0, 1]");
    if (!(c.t_end > 0.0)) fail("t_end must be > 0");
    for (double t : c.snapshot_times) {
        if (t < 0.0 || t > c.t_end * (1.0 + 1e-12)) fail("snapshot_times must lie in [0, t_end]");
    }
    if (c.diag_every < 1) fail("diag_every must be >= 1");
    if (!(c.support_threshold > 0.0 && c.support_threshold < 1.0)) fail("support_threshold must lie in (0, 1)");
    if (c.phi_radius < 0.0) fail("phi_radius must be >= 0");
    if (c.nv_quad < 2 || !(c.v_quad_min < c.v_quad_max)) fail("v quadrature needs nv_quad >= 2 and ordered bounds");
    if (c.v_temp <= 0.0 || c.rho_floor < 0.0 || c.rho_temp < 0.0) fail("initial-data parameters out of range");
    if (c.table_t_end <= 0.0 || c.ref_dt <= 0.0 || c.ref_nxi < 3) fail("test1 table/reference parameters out of range");
    if (c.cross_nx.size() != c.cross_nxi.size() || c.cross_nx.size() < 2) fail("cross_nx and cross_nxi need the same length >= 2");
}

inline InfluenceFunction make_influence(const RunConfig& c) {
    switch (c.phi) {
    case InfluenceKind::indicator: return InfluenceFunction::indicator(c.phi_radius);
    case InfluenceKind::inverse_sqrt: return InfluenceFunction::inverse_sqrt();
    case InfluenceKind::sqrt_growth: return InfluenceFunction::sqrt_growth();
    case InfluenceKind::custom: break;
    }
    throw ConfigError("config: custom influence functions are not available from a config file");
}

inline SolverOptions make_solver_options(const RunConfig& c) {
    SolverOptions o;
    o.theta_policy = c.theta_policy;
    o.theta = c.theta_mcu;
    o.f5 = c.f5_variant;
    o.force = c.force_scheme;
    o.macro = c.macro_scheme;
    o.cfl_policy = c.cfl_policy;
    o.cfl = c.cfl;
    return o;
}

} // namespace flockkit::sim
