#pragma once

// The hsf command-line front end, callable in-process:
//
//   hsf --config run.ini [--set section.key=value]... [--out dir] [--seed n] [--reproducible]
//       <solve-stokes | iterate | verify <suite> | norms <field> | manufactured>
//
// Exit codes: 0 success, 1 a verification did not pass, 2 invalid invocation or
// configuration, 3 precondition violated, 4 numerical abort.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hsf/config.hpp"

namespace hsf::cli {

inline constexpr const char* kVersion = "0.1.0";

enum Exit : int { ok = 0, failed = 1, invalid = 2, precondition = 3, numerical = 4 };

using json = nlohmann::ordered_json;

/// Thrown by subcommands to leave with a code and a message.
struct Abort : std::runtime_error {
    int code;
    Abort(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

/// Output directory of one run: run.log, certificates.jsonl, metadata.json, CSVs, snapshots.
class RunDir {
public:
    RunDir(std::filesystem::path dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
        std::filesystem::create_directories(dir_);
        log_.open(dir_ / "run.log");
        certs_.open(dir_ / "certificates.jsonl");
        if (!log_ || !certs_) throw IoError("cannot write to run directory " + dir_.string());
    }

    std::string file(const std::string& name) const { return (dir_ / name).string(); }
    const std::filesystem::path& path() const { return dir_; }

    void log(const std::string& line) {
        out_ << line << '\n';
        log_ << line << '\n';
        log_.flush();
    }

    void certificate(const json& j) {
        certs_ << j.dump() << '\n';
        certs_.flush();
    }

private:
    std::filesystem::path dir_;
    std::ostream& out_;
    std::ofstream log_, certs_;
};

namespace detail {

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json grid_json(const GridSpec& s) {
    return {{"dim", s.dim}, {"L", s.L}, {"nx", s.nx}, {"H", s.H}, {"nn", s.nn}, {"T", s.T}, {"nt", s.nt}};
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

inline json tracked_json(const TrackedNorms& t) { return {{"w", num(t.w)}, {"b_crit", num(t.b_crit)}, {"b_alpha", num(t.b_alpha)}}; }

inline json data_json(const DataNorm& d) {
    return {{"u0", num(d.u0)}, {"g", num(d.g)}, {"gn_a", num(d.gn_a)}, {"F", num(d.F)}, {"total", num(d.total())}};
}

inline json suite_json(const SuiteReport& r) {
    json j{{"kind", "suite"}, {"suite", r.name}, {"passed", r.passed()}, {"cases", r.case_count()},
           {"violations", r.violations}, {"stable", r.stable}, {"slack", r.slack}};
    json runs = json::array();
    for (const auto& run : r.runs) {
        json c = json::object();
        for (const auto& [g, v] : run.constants) c[g] = num(v);
        runs.push_back({{"label", run.label}, {"constants", c}});
    }
    j["runs"] = runs;
    json d = json::object();
    for (const auto& [k, v] : r.drift) d[k] = num(v);
    j["drift"] = d;
    json s = json::array();
    for (const auto& c : r.slopes)
        s.push_back({{"label", c.label}, {"lhs_slope", num(c.lhs_slope)}, {"rhs_slope", num(c.rhs_slope)},
                     {"mismatch", num(c.mismatch)}, {"ok", c.ok}});
    j["slopes"] = s;
    j["notes"] = r.notes;
    return j;
}

inline std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == ' ') ch = '_';
    return s;
}

inline void write_modulus_csv(const ModulusSuite& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path);
    os << "case_id,lhs,rhs,ratio\n" << std::setprecision(17);
    for (const auto& r : m.rows) {
        const std::string id = csv_safe(r.model);
        os << id << "/pointwise," << r.pointwise.max_ratio << ',' << r.epsilon << ','
           << r.pointwise.max_ratio / r.epsilon << '\n';
        os << id << "/norm," << r.norm.lhs << ',' << r.norm.rhs << ',' << r.norm.ratio << '\n';
    }
}

inline void snapshot(RunDir& rd, const Field& f, const std::string& name) {
    if (!f.values().empty()) write_snapshot(f, rd.file(name + ".bin"));
}

inline bool finite(const Field& f) {
    for (double v : f.values())
        if (!std::isfinite(v)) return false;
    return true;
}

// ---------------------------------------------------------------- subcommands

inline int solve_stokes_cmd(const RunConfig& c, RunDir& rd) {
    const auto pb = make_problem(c);
    const auto& e = c.exponents;
    const auto sol = solve_stokes(pb, c.iteration.stokes);
    if (!finite(sol.w)) throw Abort(numerical, "solve-stokes: non-finite velocity");
    const auto& L = sol.ledger;
    rd.certificate({{"kind", "stokes_ledger"},
                    {"div_w1_spectral", num(L.div_w1_spectral)},
                    {"div_w2_spectral", num(L.div_w2_spectral)},
                    {"div_w3", num(L.div_w3)},
                    {"div_w4", num(L.div_w4)},
                    {"div_w", num(L.div_w)},
                    {"boundary_residual", num(L.boundary_residual)},
                    {"initial_residual", num(L.initial_residual)},
                    {"w4_normal_trace", num(L.w4_normal_trace)},
                    {"G_initial_removed", num(L.G_initial_removed)},
                    {"u0_projection_defect", num(L.u0_projection_defect)}});
    const std::vector<std::pair<std::string, const Field*>> parts = {
        {"w1", &sol.w1}, {"w2", &sol.w2}, {"w3", &sol.w3}, {"w4", &sol.w4}, {"w", &sol.w}};
    BesovProfile total;
    for (const auto& [name, f] : parts) {
        auto b = besov_norm(*f, e.alpha, e.p, e.q, BesovDomain::half, e.k_space, e.k_time);
        rd.certificate({{"kind", "part_norm"}, {"part", name}, {"s", e.alpha}, {"p", e.p}, {"q", e.q},
                        {"norm", num(b.norm)}, {"truncated", b.truncated()}});
        if (name == "w") total = b;
        snapshot(rd, *f, name);
    }
    snapshot(rd, sol.pi3, "pi3");
    write_profile_csv(total, rd.file("blocks.csv"));
    const auto d = data_norm(pb, e.alpha, e.p, e.q, e);
    const double cst = d.total() > 0.0 ? total.norm / d.total() : 0.0;
    rd.certificate({{"kind", "solution_estimate"}, {"w_norm", num(total.norm)}, {"data", data_json(d)}, {"c", num(cst)}});
    rd.log("solve-stokes: |w| = " + fmt(total.norm) + ", data = " + fmt(d.total()) + ", c = " + fmt(cst) +
           ", div w = " + fmt(L.div_w) + ", boundary residual = " + fmt(L.boundary_residual));
    return ok;
}

inline int iterate_cmd(const RunConfig& c, RunDir& rd) {
    const auto pb = make_problem(c);
    const auto gate = smallness_gate(pb, c.model, c.exponents, c.gate, c.iteration.stokes);
    rd.certificate({{"kind", "gate"}, {"model", c.model.describe()}, {"passed", gate.passed}, {"failed", gate.failed},
                    {"c", num(gate.c)}, {"c_fitted", gate.c_fitted}, {"epsilon", num(gate.epsilon)},
                    {"delta", c.gate.delta}, {"delta0", num(gate.delta0)}, {"delta0_max", num(gate.delta0_max)},
                    {"M", num(gate.M)}, {"du_lin", num(gate.du_lin)}, {"M01", data_json(gate.M01)},
                    {"M02", data_json(gate.M02)}, {"M03", data_json(gate.M03)}, {"lin", tracked_json(gate.lin)},
                    {"override", c.gate_override}});
    rd.log("gate: " + std::string(gate.passed ? "passed" : "failed (" + gate.failed + ")") + ", c = " + fmt(gate.c) +
           ", eps = " + fmt(gate.epsilon) + ", delta0 = " + fmt(gate.delta0) + ", M = " + fmt(gate.M));
    if (!gate.passed && !c.gate_override) throw Abort(precondition, "smallness gate: " + gate.failed);

    auto res = iterate(pb, c.model, c.iteration, std::nullopt, &gate.u_lin);
    res.trace.delta0 = gate.delta0;
    res.trace.M = gate.M;
    res.trace.epsilon = gate.epsilon;
    write_trace_csv(res.trace, rd.file("trace.csv"));
    const auto cs = contraction_ratios(res.trace);
    const auto bounds = check_uniform_bounds(res.trace, gate.delta0, gate.M);
    rd.certificate({{"kind", "contraction"}, {"status", to_string(res.status)}, {"solves", res.solves},
                    {"iterates", int(res.trace.rows.size()) - 1}, {"max_ratio", num(cs.max_ratio)},
                    {"max_ratio_from2", num(cs.max_ratio_from2)}, {"geometric_rate", num(cs.geometric_rate)},
                    {"below_half", cs.below_half}});
    rd.certificate({{"kind", "uniform_bounds"}, {"held", bounds.held}, {"worst_w", num(bounds.worst_w)},
                    {"worst_crit", num(bounds.worst_crit)}, {"worst_alpha", num(bounds.worst_alpha)}});
    snapshot(rd, res.u, "u");
    snapshot(rd, res.u_lin, "u_lin");
    rd.log("iterate: " + std::string(to_string(res.status)) + " after " + std::to_string(res.solves) +
           " solves, max rho = " + fmt(cs.max_ratio) + ", bounds " + (bounds.held ? "held" : "exceeded"));
    if (res.status != IterationStatus::converged || !finite(res.u))
        throw Abort(numerical, std::string("iteration ") + to_string(res.status) + "; trace in " + rd.file("trace.csv"));
    return ok;
}

inline int verify_cmd(const RunConfig& c, RunDir& rd, const std::string& suite) {
    bool all_ok = true;
    auto run = [&](const std::string& name, auto&& fn) {
        if (suite != name && suite != "all") return;
        const SuiteReport r = fn();
        write_suite_csv(r, rd.file(name + ".csv"));
        rd.certificate(suite_json(r));
        rd.log(r.verdict());
        all_ok = all_ok && r.passed();
    };
    run("product", [&] { return check_product_inequality(c.verify); });
    run("gn", [&] { return check_gn_inequality(c.verify); });
    run("inclusion", [&] { return check_inclusion(c.verify); });
    run("embedding", [&] { return check_embedding_Cb(c.verify); });
    if (suite == "modulus" || suite == "all") {
        const auto m = check_stress_modulus(c.modulus_delta, c.modulus_pairs, c.seed);
        write_modulus_csv(m, rd.file("modulus.csv"));
        for (const auto& r : m.rows)
            rd.certificate({{"kind", "modulus"}, {"model", r.model}, {"delta", m.delta}, {"epsilon", num(r.epsilon)},
                            {"pairs", r.pointwise.pairs}, {"violations", r.pointwise.violations},
                            {"max_ratio", num(r.pointwise.max_ratio)}, {"norm_ratio", num(r.norm.ratio)},
                            {"norm_passed", r.norm.passed}});
        rd.log(std::string("modulus: ") + (m.passed() ? "PASS" : "FAIL") + " pairs=" + std::to_string(c.modulus_pairs));
        all_ok = all_ok && m.passed();
    }
    return all_ok ? ok : failed;
}

struct NormsRequest {
    std::string file;
    std::optional<double> s, p, q;
    std::string domain = "auto";
    int sobolev = -1;
};

inline int norms_cmd(const RunConfig& c, RunDir& rd, const NormsRequest& req) {
    const Field f = read_snapshot(req.file);
    const double s = req.s.value_or(c.exponents.alpha);
    const double p = req.p.value_or(c.exponents.p);
    const double q = req.q.value_or(c.exponents.q);
    BesovDomain dom = natural_domain(f);
    if (req.domain == "full") dom = BesovDomain::full;
    if (req.domain == "half") dom = BesovDomain::half;
    const auto b = besov_norm(f, s, p, q, dom, c.exponents.k_space, c.exponents.k_time);
    write_profile_csv(b, rd.file("blocks.csv"));
    json j{{"kind", "besov_norm"}, {"file", req.file}, {"s", s}, {"p", p}, {"q", q}, {"domain", b.domain},
           {"family", b.family}, {"norm", num(b.norm)}, {"j_min", b.j_min}, {"j_max", b.j_max},
           {"truncated_low", b.truncated_low}, {"truncated_high", b.truncated_high}};
    rd.certificate(j);
    rd.log("norms: B^{" + fmt(s) + "}_{" + fmt(p) + "," + fmt(q) + "} = " + fmt(b.norm) + " (" + b.domain + ")");
    if (req.sobolev >= 0) {
        const double w = sobolev_aniso_norm(f, req.sobolev, p);
        rd.certificate({{"kind", "sobolev_norm"}, {"file", req.file}, {"k", req.sobolev}, {"p", p}, {"norm", num(w)}});
        rd.log("norms: W^{" + std::to_string(req.sobolev) + "}_" + fmt(p) + " = " + fmt(w));
    }
    return ok;
}

inline int manufactured_cmd(const RunConfig& c, RunDir& rd) {
    const auto r = manufactured_convergence(c.convergence);
    std::ofstream os(rd.file("convergence.csv"));
    write_convergence_csv(r, os);
    rd.certificate({{"kind", "convergence"}, {"spatial_order", num(r.spatial_order)},
                    {"temporal_order", num(r.temporal_order)}, {"heat_part_error", num(r.heat_part_error)},
                    {"forcing_part_error", num(r.forcing_part_error)}, {"passed", r.passed()}});
    rd.log(std::string("manufactured: ") + (r.passed() ? "PASS" : "FAIL") + " spatial order " + fmt(r.spatial_order) +
           ", temporal order " + fmt(r.temporal_order) + ", spectral parts " + fmt(r.spectral_error()));
    return r.passed() ? ok : failed;
}

inline std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Half-space Stokes solver, Picard iteration and inequality verification", "hsf"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    bool reproducible = false;
    app.add_option("--config", config_path, "INI configuration file")->required();
    app.add_option("--set", overrides, "override one key: section.key=value")->take_all();
    app.add_option("--out", out_dir, "run directory");
    app.add_option("--seed", seed, "seed for sampled cases");
    app.add_flag("--reproducible", reproducible, "deterministic artifacts, no timestamps");

    auto* solve = app.add_subcommand("solve-stokes", "solve the linear problem and certify its parts");
    auto* iter = app.add_subcommand("iterate", "gate the data and run the Picard iteration");
    auto* verify = app.add_subcommand("verify", "run an inequality suite");
    std::string suite;
    verify->add_option("suite", suite, "product, gn, inclusion, embedding, modulus or all")
        ->required()
        ->check(CLI::IsMember({"product", "gn", "inclusion", "embedding", "modulus", "all"}));
    auto* norms = app.add_subcommand("norms", "Besov (and Sobolev) norm of a field snapshot");
    detail::NormsRequest nreq;
    norms->add_option("field", nreq.file, "snapshot file")->required();
    norms->add_option("--s", nreq.s, "smoothness (default exponents.alpha)");
    norms->add_option("--p", nreq.p, "integrability (default exponents.p)");
    norms->add_option("--q", nreq.q, "summability (default exponents.q)");
    norms->add_option("--domain", nreq.domain)->check(CLI::IsMember({"auto", "full", "half"}));
    norms->add_option("--sobolev", nreq.sobolev, "also report the order-k anisotropic Sobolev norm");
    auto* manu = app.add_subcommand("manufactured", "convergence study on the manufactured solution");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "hsf: " << e.what() << '\n';
        return invalid;
    }

    std::string sub = app.get_subcommands().front()->get_name();
    RunConfig cfg;
    try {
        if (seed) overrides.push_back("run.seed=" + std::to_string(*seed));
        if (reproducible) overrides.push_back("run.reproducible=true");
        cfg = load_config(config_path, overrides);
    } catch (const ConfigError& e) {
        err << "hsf: " << e.what() << '\n';
        return invalid;
    }

    const std::string label = sub == "verify" ? "verify-" + suite : sub;
    std::optional<RunDir> rd;
    try {
        rd.emplace(out_dir.empty() ? std::filesystem::path("runs") / label : std::filesystem::path(out_dir), out);
    } catch (const std::exception& e) {
        err << "hsf: " << e.what() << '\n';
        return invalid;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int code = ok;
    std::string message;
    try {
        if (solve->parsed()) code = detail::solve_stokes_cmd(cfg, *rd);
        else if (iter->parsed()) code = detail::iterate_cmd(cfg, *rd);
        else if (verify->parsed()) code = detail::verify_cmd(cfg, *rd, suite);
        else if (norms->parsed()) code = detail::norms_cmd(cfg, *rd, nreq);
        else if (manu->parsed()) code = detail::manufactured_cmd(cfg, *rd);
    } catch (const Abort& e) {
        code = e.code;
        message = e.what();
    } catch (const ConfigError& e) {
        code = invalid;
        message = e.what();
    } catch (const IoError& e) {
        code = invalid;
        message = e.what();
    } catch (const PreconditionError& e) {
        code = precondition;
        message = e.what();
    } catch (const ShapeError& e) {
        code = precondition;
        message = e.what();
    } catch (const std::exception& e) {
        code = numerical;
        message = std::string("numerical abort: ") + e.what();
    }
    if (code == failed && message.empty()) message = "verification failed";
    if (!message.empty()) {
        err << "hsf: " << message << '\n';
        rd->log("error: " + message);
    }

    json meta{{"tool", "hsf"}, {"version", kVersion}, {"subcommand", sub}};
    if (sub == "verify") meta["suite"] = suite;
    if (sub == "norms") meta["field"] = nreq.file;
    meta["seed"] = cfg.seed;
    meta["reproducible"] = cfg.reproducible;
    meta["threads"] = cfg.threads;
    meta["grid"] = detail::grid_json(cfg.grid);
    meta["config"] = cfg.effective;
    meta["exit_code"] = code;
    meta["message"] = message;
    if (!cfg.reproducible) {
        meta["finished"] = detail::timestamp();
        meta["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    std::ofstream(rd->file("metadata.json")) << meta.dump(2) << '\n';
    return code;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, out, err);
}

}  // namespace hsf::cli
