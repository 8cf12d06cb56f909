#pragma once

// Run configuration: one INI file (sections of key = value) read with
// boost::property_tree, overridable per key with "section.key=value".
//
//   [grid]        dim L nx H nn T nt normal_spacing time_spacing grading
//   [exponents]   p q alpha
//   [model]       family mu0 mu1 d
//   [data]        kind amplitude u0_file g_file F_file
//   [gate]        delta0 M delta c override modulus_pairs
//   [iteration]   m_max stop_tol diverge_after convection
//   [stokes]      check
//   [verify]      nx nn nt L H T cases slack rescale slope_tol modulus_delta modulus_pairs
//   [convergence] L H T nx spatial_nn spatial_nt temporal_nt temporal_nn
//   [run]         seed reproducible threads

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "hsf/field_io.hpp"
#include "hsf/picard.hpp"
#include "hsf/scenarios.hpp"
#include "hsf/verify.hpp"

namespace hsf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataConfig {
    std::string kind = "boundary_wave";  // boundary_wave, manufactured, files
    double amplitude = 0.005;
    std::string u0_file, g_file, F_file;
};

struct RunConfig {
    GridSpec grid{2, 2.0 * M_PI, 16, 8.0, 32, 1.0, 16};
    NormExponents exponents;
    StressModel model{StressFamily::S3, 0.5, 1.0, 3.0};
    DataConfig data;
    GateConfig gate;
    bool gate_override = false;
    IterationOptions iteration;
    VerifyConfig verify;
    double modulus_delta = 0.1;
    std::size_t modulus_pairs = 10'000;
    ConvergenceConfig convergence;
    std::uint64_t seed = 1;
    bool reproducible = true;
    int threads = 1;
    std::map<std::string, std::string> effective;  // every key after defaults and overrides
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"grid", {"dim", "L", "nx", "H", "nn", "T", "nt", "normal_spacing", "time_spacing", "grading"}},
        {"exponents", {"p", "q", "alpha"}},
        {"model", {"family", "mu0", "mu1", "d"}},
        {"data", {"kind", "amplitude", "u0_file", "g_file", "F_file"}},
        {"gate", {"delta0", "M", "delta", "c", "override", "modulus_pairs"}},
        {"iteration", {"m_max", "stop_tol", "diverge_after", "convection"}},
        {"stokes", {"check"}},
        {"verify", {"nx", "nn", "nt", "L", "H", "T", "cases", "slack", "rescale", "slope_tol", "modulus_delta", "modulus_pairs"}},
        {"convergence", {"L", "H", "T", "nx", "spatial_nn", "spatial_nt", "temporal_nt", "temporal_nn"}},
        {"run", {"seed", "reproducible", "threads"}},
    };
    return s;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected a list of integers, got '" + v + "'");
        }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline Spacing parse_spacing(const std::string& key, const std::string& v) {
    if (v == "uniform") return Spacing::uniform;
    if (v == "graded") return Spacing::graded;
    throw ConfigError(key + ": expected uniform or graded, got '" + v + "'");
}

}  // namespace detail

/// Applies one "section.key=value" override.
inline void apply_override(boost::property_tree::ptree& pt, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not section.key=value");
    const std::string key = kv.substr(0, eq);
    if (key.find('.') == std::string::npos) throw ConfigError("override key '" + key + "' needs a section");
    pt.put(key, kv.substr(eq + 1));
}

/// Parses a property tree into a validated RunConfig. Unknown sections or keys are errors.
inline RunConfig config_from_tree(const boost::property_tree::ptree& pt) {
    const auto& schema = detail::config_schema();
    for (const auto& [sec, sub] : pt) {
        auto it = schema.find(sec);
        if (it == schema.end()) throw ConfigError("unknown section [" + sec + "]");
        if (sub.empty() && !sub.data().empty()) throw ConfigError("key '" + sec + "' outside a section");
        for (const auto& [k, v] : sub)
            if (!it->second.count(k)) throw ConfigError("unknown key " + sec + "." + k);
    }
    RunConfig c;
    auto get = [&](const std::string& key, auto fallback) {
        using Tv = decltype(fallback);
        auto node = pt.get_optional<std::string>(key);
        Tv v = fallback;
        if (node) {
            auto t = pt.get_optional<Tv>(key);
            if (!t) throw ConfigError(key + ": cannot parse '" + *node + "'");
            v = *t;
        }
        if constexpr (std::is_floating_point_v<Tv>) {
            char buf[32];
            c.effective[key] = std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
        } else {
            std::ostringstream os;
            os << std::boolalpha << v;
            c.effective[key] = os.str();
        }
        return v;
    };
    auto get_str = [&](const std::string& key, const std::string& fallback) {
        std::string v = pt.get<std::string>(key, fallback);
        c.effective[key] = v;
        return v;
    };
    auto positive = [](const std::string& key, double v) {
        if (!(v > 0.0)) throw ConfigError(key + " must be > 0");
        return v;
    };

    auto& g = c.grid;
    g.dim = get("grid.dim", g.dim);
    g.L = get("grid.L", g.L);
    g.nx = get("grid.nx", g.nx);
    g.H = get("grid.H", g.H);
    g.nn = get("grid.nn", g.nn);
    g.T = get("grid.T", g.T);
    g.nt = get("grid.nt", g.nt);
    g.normal_spacing = detail::parse_spacing("grid.normal_spacing", get_str("grid.normal_spacing", "uniform"));
    g.time_spacing = detail::parse_spacing("grid.time_spacing", get_str("grid.time_spacing", "uniform"));
    g.grading = get("grid.grading", g.grading);
    try {
        Grid check(g);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }

    auto& e = c.exponents;
    e.p = get("exponents.p", e.p);
    e.q = get("exponents.q", e.q);
    e.alpha = get("exponents.alpha", e.alpha);
    const int n = g.dim;
    if (!(e.p > n + 2)) throw ConfigError("exponents.p must exceed n + 2");
    if (!(e.q >= 1)) throw ConfigError("exponents.q must be >= 1");
    if (!(e.alpha > 1.0 + (n + 2) / e.p && e.alpha < 2.0))
        throw ConfigError("exponents.alpha must lie in (1 + (n+2)/p, 2)");

    try {
        const auto fam = parse_stress_family(get_str("model.family", to_string(c.model.family)));
        c.model = StressModel(fam, get("model.mu0", c.model.mu0), get("model.mu1", c.model.mu1), get("model.d", c.model.d));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("model: ") + ex.what());
    }

    auto& d = c.data;
    d.kind = get_str("data.kind", d.kind);
    if (d.kind != "boundary_wave" && d.kind != "manufactured" && d.kind != "files")
        throw ConfigError("data.kind must be boundary_wave, manufactured or files");
    d.amplitude = get("data.amplitude", d.amplitude);
    d.u0_file = get_str("data.u0_file", "");
    d.g_file = get_str("data.g_file", "");
    d.F_file = get_str("data.F_file", "");
    if (d.kind == "files" && (d.u0_file.empty() || d.g_file.empty()))
        throw ConfigError("data.kind = files needs data.u0_file and data.g_file");

    c.gate.delta0 = get("gate.delta0", c.gate.delta0);
    c.gate.M = get("gate.M", c.gate.M);
    c.gate.delta = positive("gate.delta", get("gate.delta", c.gate.delta));
    c.gate.c = get("gate.c", c.gate.c);
    c.gate.modulus_pairs = get("gate.modulus_pairs", c.gate.modulus_pairs);
    c.gate_override = get("gate.override", c.gate_override);

    auto& it = c.iteration;
    it.m_max = get("iteration.m_max", it.m_max);
    it.stop_tol = positive("iteration.stop_tol", get("iteration.stop_tol", it.stop_tol));
    it.diverge_after = get("iteration.diverge_after", it.diverge_after);
    it.convection = get("iteration.convection", it.convection);
    if (it.m_max < 1 || it.diverge_after < 1) throw ConfigError("iteration.m_max and diverge_after must be >= 1");
    it.delta = c.gate.delta;
    it.norms = e;
    it.stokes.check = get("stokes.check", true);

    GridSpec vs = c.verify.grid.spec();
    vs.dim = g.dim;
    vs.nx = get("verify.nx", vs.nx);
    vs.nn = get("verify.nn", vs.nn);
    vs.nt = get("verify.nt", vs.nt);
    vs.L = get("verify.L", vs.L);
    vs.H = get("verify.H", vs.H);
    vs.T = get("verify.T", vs.T);
    try {
        c.verify.grid = Grid(vs);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("verify grid: ") + ex.what());
    }
    c.verify.cases = get("verify.cases", c.verify.cases);
    c.verify.slack = positive("verify.slack", get("verify.slack", c.verify.slack));
    c.verify.rescale = positive("verify.rescale", get("verify.rescale", c.verify.rescale));
    c.verify.slope_tol = positive("verify.slope_tol", get("verify.slope_tol", c.verify.slope_tol));
    c.verify.p = e.p;
    c.verify.q = e.q;
    c.verify.alpha = e.alpha;
    c.modulus_delta = positive("verify.modulus_delta", get("verify.modulus_delta", c.modulus_delta));
    c.modulus_pairs = get("verify.modulus_pairs", c.modulus_pairs);
    if (c.verify.cases < 1) throw ConfigError("verify.cases must be >= 1");

    auto& cv = c.convergence;
    cv.L = get("convergence.L", cv.L);
    cv.H = get("convergence.H", cv.H);
    cv.T = get("convergence.T", cv.T);
    cv.nx = get("convergence.nx", cv.nx);
    auto list = [&](const std::string& key, const std::vector<int>& fallback) {
        std::ostringstream os;
        for (std::size_t i = 0; i < fallback.size(); ++i) os << (i ? " " : "") << fallback[i];
        return detail::parse_int_list(key, get_str(key, os.str()));
    };
    cv.spatial_nn = list("convergence.spatial_nn", cv.spatial_nn);
    cv.spatial_nt = get("convergence.spatial_nt", cv.spatial_nt);
    cv.temporal_nt = list("convergence.temporal_nt", cv.temporal_nt);
    cv.temporal_nn = get("convergence.temporal_nn", cv.temporal_nn);
    if (cv.spatial_nn.size() < 2 || cv.temporal_nt.size() < 2)
        throw ConfigError("convergence: at least two levels per study");

    c.seed = get("run.seed", c.seed);
    c.verify.seed = c.seed;
    c.reproducible = get("run.reproducible", c.reproducible);
    c.threads = get("run.threads", c.threads);
    if (c.threads < 1) throw ConfigError("run.threads must be >= 1");
    return c;
}

/// Reads `path` (empty: built-in defaults), applies overrides, validates.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    boost::property_tree::ptree pt;
    if (!path.empty()) {
        if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
        try {
            boost::property_tree::read_ini(path, pt);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
    }
    for (const auto& o : overrides) apply_override(pt, o);
    return config_from_tree(pt);
}

/// The problem named by the data section on the configured grid.
inline StokesProblem make_problem(const RunConfig& c) {
    const Grid g(c.grid);
    StokesProblem pb;
    if (c.data.kind != "files") {
        pb = named_problem(c.data.kind, g, c.data.amplitude);
    } else {
        pb.u0 = read_snapshot(c.data.u0_file);
        pb.g = read_snapshot(c.data.g_file);
        if (!c.data.F_file.empty()) pb.F = read_snapshot(c.data.F_file);
        if (!(pb.u0.grid() == g) || !(pb.g.grid() == g)) throw ConfigError("data files: grid differs from [grid]");
    }
    pb.p = c.exponents.p;
    pb.q = c.exponents.q;
    pb.alpha = c.exponents.alpha;
    return pb;
}

}  // namespace hsf
