// cavity-herald: command-line front end for the repeated spin-photon
// phase-encoding simulator. Subcommands: reflect, herald, sweep,
// optimize-rate, disorder, phase-noise, three-level, reproduce.
//
// Exit codes: 0 success, 2 usage/config error, 3 infeasible configuration,
// 4 numeric failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinphoton/imperfections.hpp"
#include "spinphoton/io.hpp"
#include "spinphoton/parallel.hpp"
#include "spinphoton/protocol.hpp"
#include "spinphoton/rate.hpp"
#include "spinphoton/rng.hpp"
#include "spinphoton/three_level.hpp"
#include "spinphoton/version.hpp"

using namespace spinphoton;
using nlohmann::json;

namespace {

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// output plumbing
// ---------------------------------------------------------------------------

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

json base_manifest(const std::string& command) {
    json m;
    m["tool"] = kToolName;
    m["version"] = kVersion;
    m["command"] = command;
    m["rng"] = CounterRng::kName;
    return m;
}

void emit_table(std::ostream& os, const std::string& format, const json& manifest,
                const std::vector<std::string>& columns,
                const std::vector<std::vector<std::string>>& rows) {
    if (format == "json") {
        json doc;
        doc["manifest"] = manifest;
        doc["columns"] = columns;
        doc["rows"] = rows;
        os << doc.dump(2) << "\n";
        return;
    }
    TableWriter w(os);
    w.manifest(manifest);
    w.header(columns);
    for (const auto& r : rows) w.row(r);
}

// ---------------------------------------------------------------------------
// config-file merge: strict JSON whose keys mirror the long flags; explicit
// command-line flags override file values
// ---------------------------------------------------------------------------

std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [key, value] : cfg.items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) tokens.push_back("--" + key);
            continue;
        }
        tokens.push_back("--" + key);
        if (value.is_string()) {
            tokens.push_back(value.get<std::string>());
        } else {
            tokens.push_back(value.dump());
        }
    }
    return tokens;
}

std::vector<std::string> merge_config_into_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            const std::vector<std::string> injected = config_tokens(args[i + 1]);
            // config tokens go right after the subcommand so explicit flags win
            std::vector<std::string> merged(args.begin(), args.begin() + 1);
            merged.insert(merged.end(), injected.begin(), injected.end());
            for (std::size_t j = 1; j < args.size(); ++j) merged.push_back(args[j]);
            return merged;
        }
    }
    return args;
}

// ---------------------------------------------------------------------------
// shared flag bundles
// ---------------------------------------------------------------------------

struct RegisterFlags {
    double cooperativity = 1.0;
    double kappa = 200.0;
    double gamma_se = 1.0;
    double gamma_phi = 0.0;
    double eta_i_exact = 1.0;  // builds kappa_i into the cavity when < 1
    bool two_sided = false;
};

void add_register_flags(CLI::App* cmd, RegisterFlags& f) {
    cmd->add_option("--C", f.cooperativity, "cooperativity of the symmetric transitions");
    cmd->add_option("--kappa", f.kappa, "total cavity decay rate (units of gamma)");
    cmd->add_option("--gamma-se", f.gamma_se, "spontaneous emission rate");
    cmd->add_option("--gamma-phi", f.gamma_phi, "pure dephasing rate");
    cmd->add_option("--exact-eta-i", f.eta_i_exact,
                    "model this cavity efficiency exactly via kappa_i (default 1)");
    cmd->add_flag("--two-sided", f.two_sided, "symmetric two-sided cavity (transmission mode)");
}

RegisterParams build_register(const RegisterFlags& f, double delta) {
    CavityParams cav = f.two_sided ? symmetric_cavity(f.kappa, (1.0 - f.eta_i_exact) * f.kappa)
                                   : single_sided_cavity(f.kappa, f.eta_i_exact);
    RegisterParams reg = symmetric_register(f.cooperativity, delta, cav);
    reg.transition0.gamma_se = f.gamma_se;
    reg.transition0.gamma_phi = f.gamma_phi;
    reg.transition1.gamma_se = f.gamma_se;
    reg.transition1.gamma_phi = f.gamma_phi;
    // re-derive g so the requested cooperativity holds for the total gamma
    const double g = std::sqrt(f.cooperativity * cav.kappa() * reg.transition0.gamma() / 4.0);
    reg.transition0.g = g;
    reg.transition1.g = g;
    return reg;
}

struct ImperfectionFlags {
    double eta_i = 1.0;
    double eta_r = 1.0;
    double eta_m = 1.0;
    std::string strategy = "identity";
};

void add_imperfection_flags(CLI::App* cmd, ImperfectionFlags& f) {
    cmd->add_option("--eta-i", f.eta_i, "multiplicative cavity efficiency per round");
    cmd->add_option("--eta-r", f.eta_r, "optical-circuit efficiency per round");
    cmd->add_option("--eta-m", f.eta_m, "fiber-cavity mode overlap");
    cmd->add_option("--strategy", f.strategy, "mismatch handling: identity|separate|selective-pi")
        ->check(CLI::IsMember({"identity", "separate", "selective-pi"}));
}

ImperfectionModel build_imperfections(const ImperfectionFlags& f) {
    ImperfectionModel imp;
    imp.eta_i = f.eta_i;
    imp.eta_r = f.eta_r;
    imp.eta_m = f.eta_m;
    imp.strategy = f.strategy == "separate"
                       ? MismatchStrategy::Separate
                       : (f.strategy == "selective-pi" ? MismatchStrategy::SelectivePi
                                                       : MismatchStrategy::Identity);
    return imp;
}

int auto_rounds(double cooperativity) {
    for (int n = 1; n <= 500; ++n) {
        if (solve_detuning(cooperativity, n).status == DetuningSolution::Status::TwoRoots) return n;
    }
    throw InfeasibleError("no feasible repetition number for C = " + format_double(cooperativity));
}

double require_feasible_delta(double cooperativity, int n, bool minus_root = false) {
    const DetuningSolution sol = solve_detuning(cooperativity, n);
    if (sol.status != DetuningSolution::Status::TwoRoots) {
        std::ostringstream os;
        os << "infeasible configuration: the entangling condition requires C >= sin(pi/(2N)); "
           << "C = " << format_double(cooperativity) << ", N = " << n
           << ", bound = " << format_double(cooperativity_bound(n));
        throw InfeasibleError(os.str());
    }
    return minus_root ? sol.delta_minus : sol.delta_plus;
}

// herald with the grid-doubling convergence check applied before emission
HeraldOutcome herald_checked(ProtocolConfig cfg) {
    const HeraldOutcome coarse = herald(cfg);
    cfg.grid.n_points = 2 * cfg.grid.n_points - 1;
    const HeraldOutcome fine = herald(cfg);
    const auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    };
    if (rel(coarse.p_a, fine.p_a) > 1e-6 || rel(coarse.p_b, fine.p_b) > 1e-6
        || rel(coarse.f_a, fine.f_a) > 1e-6) {
        throw std::runtime_error("herald: grid-doubling convergence check failed");
    }
    return fine;
}

std::vector<std::string> outcome_cells(const HeraldOutcome& h) {
    return {format_double(h.p_a), format_double(h.p_b), format_double(h.p_total),
            format_double(h.f_a), format_double(h.f_b)};
}

// ---------------------------------------------------------------------------
// reflect
// ---------------------------------------------------------------------------

struct ReflectArgs {
    RegisterFlags reg;
    double delta = 0.0;
    double sigma_omega = 0.2;
    double grid_span = 10.0;
    int grid_points = 4001;
    std::string transitions = "0,1";
    std::string mode = "reflection";
    std::string out, format = "csv", config;
};

int run_reflect(const ReflectArgs& a) {
    const RegisterParams reg = build_register(a.reg, a.delta);
    SpectralPulse pulse{a.sigma_omega};
    const QuadratureGrid grid = make_grid(pulse, a.grid_span, a.grid_points);

    std::vector<int> spins;
    for (char c : a.transitions) {
        if (c == '0') spins.push_back(0);
        if (c == '1') spins.push_back(1);
    }
    if (spins.empty()) throw std::invalid_argument("no transitions selected");

    std::vector<std::string> columns{"omega"};
    for (int s : spins) {
        const std::string tag = std::to_string(s);
        columns.push_back("re_r" + tag);
        columns.push_back("im_r" + tag);
        columns.push_back("abs2_r" + tag);
        columns.push_back("arg_r" + tag);
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.nodes[i];
        std::vector<std::string> row{format_double(w)};
        for (int s : spins) {
            const cxd r = a.mode == "transmission" ? transmission(reg, s, w) : reflection(reg, s, w);
            row.push_back(format_double(r.real()));
            row.push_back(format_double(r.imag()));
            row.push_back(format_double(std::norm(r)));
            row.push_back(format_double(std::arg(r)));
        }
        rows.push_back(std::move(row));
    }

    json m = base_manifest("reflect");
    m["config"] = {{"C", a.reg.cooperativity}, {"kappa", a.reg.kappa},    {"delta", a.delta},
                   {"sigma_omega", a.sigma_omega}, {"grid_span", a.grid_span},
                   {"grid_points", a.grid_points}, {"mode", a.mode},
                   {"exact_eta_i", a.reg.eta_i_exact}};
    Output outp(a.out);
    emit_table(outp.stream(), a.format, m, columns, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// herald
// ---------------------------------------------------------------------------

struct HeraldArgs {
    RegisterFlags reg;
    ImperfectionFlags imp;
    int rounds = 0;       // 0: smallest feasible
    double delta = 0.0;   // 0: closed form Delta+
    bool delta_minus = false;
    double sigma_omega = 0.2;
    double n_t = 10.0;
    double grid_span = 10.0;
    int grid_points = 4001;
    std::string mode = "reflection";
    std::string optimize = "none";  // none|fidelity|pt-floor
    double fidelity_floor = 0.99;
    std::uint64_t seed = 0;
    std::string out, format = "csv", config;
};

ProtocolConfig herald_config(const HeraldArgs& a, int rounds, double delta) {
    ProtocolConfig cfg;
    cfg.rounds = rounds;
    cfg.mode = a.mode == "transmission" ? ProtocolMode::Transmission : ProtocolMode::Reflection;
    cfg.pulse = SpectralPulse{a.sigma_omega, 0.0, a.n_t};
    cfg.grid = GridParams{a.grid_span, a.grid_points};
    RegisterFlags rf = a.reg;
    rf.two_sided = rf.two_sided || cfg.mode == ProtocolMode::Transmission;
    cfg.register_a = build_register(rf, delta);
    cfg.register_b = cfg.register_a;
    cfg.imperfections = build_imperfections(a.imp);
    return cfg;
}

int run_herald(const HeraldArgs& a) {
    const int rounds = a.rounds > 0 ? a.rounds : auto_rounds(a.reg.cooperativity);
    double delta = a.delta;
    ProtocolConfig cfg = herald_config(a, rounds, delta);

    if (a.optimize == "fidelity" || a.optimize == "pt-floor") {
        require_feasible_delta(a.reg.cooperativity, rounds);
        const OptimizeResult res = optimize_detuning(
            cfg,
            a.optimize == "fidelity" ? DetuningObjective::MaxFidelityA
                                     : DetuningObjective::MaxPtAtFidelityFloor,
            a.fidelity_floor);
        if (!res.feasible) throw InfeasibleError("detuning optimization infeasible");
        delta = res.delta;
    } else if (delta == 0.0) {
        delta = require_feasible_delta(a.reg.cooperativity, rounds, a.delta_minus);
    }
    cfg = herald_config(a, rounds, delta);
    const HeraldOutcome h = herald_checked(cfg);

    json m = base_manifest("herald");
    m["seed"] = a.seed;
    m["config"] = {{"C", a.reg.cooperativity},
                   {"kappa", a.reg.kappa},
                   {"N", rounds},
                   {"delta", delta},
                   {"sigma_omega", a.sigma_omega},
                   {"n_t", a.n_t},
                   {"mode", a.mode},
                   {"optimize", a.optimize},
                   {"eta_i", a.imp.eta_i},
                   {"eta_r", a.imp.eta_r},
                   {"eta_m", a.imp.eta_m},
                   {"strategy", a.imp.strategy},
                   {"exact_eta_i", a.reg.eta_i_exact},
                   {"grid_span", a.grid_span},
                   {"grid_points", a.grid_points}};
    std::vector<std::string> row{format_double(a.reg.cooperativity), std::to_string(rounds),
                                 format_double(delta), format_double(a.sigma_omega)};
    const auto cells = outcome_cells(h);
    row.insert(row.end(), cells.begin(), cells.end());
    Output outp(a.out);
    emit_table(outp.stream(), a.format, m,
               {"C", "N", "delta", "sigma_omega", "p_a", "p_b", "p_total", "f_a", "f_b"}, {row});
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
    HeraldArgs base;
    std::vector<std::string> axis_specs;
};

struct Axis {
    std::string name;
    std::vector<double> values;
};

Axis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad axis spec: " + spec);
    Axis axis;
    axis.name = spec.substr(0, eq);
    static const std::vector<std::string> known{"C", "N", "Delta", "eta_i", "eta_r", "eta_m", "N_omega"};
    if (std::find(known.begin(), known.end(), axis.name) == known.end()) {
        throw std::invalid_argument("unknown sweep axis: " + axis.name);
    }
    const std::string body = spec.substr(eq + 1);
    if (body.find(':') != std::string::npos) {
        double start, stop;
        int count;
        char c1, c2;
        std::istringstream is(body);
        if (!(is >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1) {
            throw std::invalid_argument("bad axis range: " + spec);
        }
        for (int i = 0; i < count; ++i) {
            axis.values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
        }
    } else {
        std::istringstream is(body);
        std::string item;
        while (std::getline(is, item, ',')) axis.values.push_back(std::stod(item));
    }
    if (axis.values.empty()) throw std::invalid_argument("empty axis: " + spec);
    return axis;
}

int run_sweep(const SweepArgs& a) {
    std::vector<Axis> axes;
    for (const auto& spec : a.axis_specs) axes.push_back(parse_axis(spec));
    if (axes.empty()) throw std::invalid_argument("sweep requires at least one --axis");

    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.values.size();
    if (total > 2'000'000) throw std::invalid_argument("sweep too large");

    std::vector<std::string> columns;
    for (const auto& ax : axes) columns.push_back(ax.name);
    columns.insert(columns.end(),
                   {"delta", "sigma_omega", "p_a", "p_b", "p_total", "f_a", "f_b", "status"});

    std::vector<std::vector<std::string>> rows(total);
    parallel_for(total, [&](std::size_t flat) {
        std::size_t rem = flat;
        std::map<std::string, double> point;
        std::vector<std::string> cells;
        for (std::size_t k = axes.size(); k-- > 0;) {
            const Axis& ax = axes[k];
            point[ax.name] = ax.values[rem % ax.values.size()];
            rem /= ax.values.size();
        }
        for (const auto& ax : axes) cells.push_back(format_double(point[ax.name]));
        try {
            HeraldArgs local = a.base;
            if (point.count("C")) local.reg.cooperativity = point["C"];
            if (point.count("eta_i")) local.imp.eta_i = point["eta_i"];
            if (point.count("eta_r")) local.imp.eta_r = point["eta_r"];
            if (point.count("eta_m")) local.imp.eta_m = point["eta_m"];
            const int rounds = point.count("N") ? static_cast<int>(std::lround(point["N"]))
                                                : (local.rounds > 0
                                                       ? local.rounds
                                                       : auto_rounds(local.reg.cooperativity));
            double delta = point.count("Delta") ? point["Delta"] : local.delta;
            std::optional<double> n_omega;
            if (point.count("N_omega")) n_omega = point["N_omega"];

            ProtocolConfig cfg = herald_config(local, rounds, delta);
            if (local.optimize == "fidelity" || local.optimize == "pt-floor") {
                const OptimizeResult res = optimize_detuning(
                    cfg,
                    local.optimize == "fidelity" ? DetuningObjective::MaxFidelityA
                                                 : DetuningObjective::MaxPtAtFidelityFloor,
                    local.fidelity_floor, n_omega);
                if (!res.feasible) {
                    cells.insert(cells.end(), {"nan", "nan", "0", "0", "0", "0", "0", "infeasible"});
                    rows[flat] = std::move(cells);
                    return;
                }
                delta = res.delta;
            } else if (delta == 0.0) {
                delta = require_feasible_delta(local.reg.cooperativity, rounds);
            }
            cfg = herald_config(local, rounds, delta);
            if (n_omega) cfg.pulse.sigma_omega = delta / *n_omega;
            const HeraldOutcome h = herald_checked(cfg);
            const double sigma = n_omega ? delta / *n_omega : local.sigma_omega;
            cells.push_back(format_double(delta));
            cells.push_back(format_double(sigma));
            const auto oc = outcome_cells(h);
            cells.insert(cells.end(), oc.begin(), oc.end());
            cells.push_back("ok");
        } catch (const InfeasibleError&) {
            cells.insert(cells.end(), {"nan", "nan", "0", "0", "0", "0", "0", "infeasible"});
        } catch (const std::exception& e) {
            cells.insert(cells.end(), {"nan", "nan", "0", "0", "0", "0", "0",
                                       std::string("error:") + e.what()});
        }
        rows[flat] = std::move(cells);
    });

    json m = base_manifest("sweep");
    m["seed"] = a.base.seed;
    m["axes"] = a.axis_specs;
    m["config"] = {{"C", a.base.reg.cooperativity}, {"N", a.base.rounds},
                   {"sigma_omega", a.base.sigma_omega}, {"optimize", a.base.optimize},
                   {"fidelity_floor", a.base.fidelity_floor}, {"eta_i", a.base.imp.eta_i},
                   {"eta_r", a.base.imp.eta_r}, {"eta_m", a.base.imp.eta_m},
                   {"strategy", a.base.imp.strategy}};
    Output outp(a.base.out);
    emit_table(outp.stream(), a.base.format, m, columns, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// optimize-rate
// ---------------------------------------------------------------------------

struct RateArgs {
    RegisterFlags reg;
    int n_min = 2, n_max = 10;
    double n_t = 10.0;
    double threshold = 0.99;
    std::string out, format = "csv", config;
};

int run_optimize_rate(const RateArgs& a) {
    std::vector<std::vector<std::string>> rows;
    for (int n = a.n_min; n <= a.n_max; ++n) {
        ProtocolConfig cfg;
        cfg.rounds = n;
        cfg.pulse.n_t = a.n_t;
        cfg.register_a = build_register(a.reg, 1.0);
        cfg.register_b = cfg.register_a;
        if (solve_detuning(a.reg.cooperativity, n).status != DetuningSolution::Status::TwoRoots) {
            rows.push_back({format_double(a.reg.cooperativity), std::to_string(n), "nan", "nan",
                            "0", "0", "0", "0"});
            continue;
        }
        const RateResult r = max_rate_at_fidelity(cfg, a.threshold);
        rows.push_back({format_double(a.reg.cooperativity), std::to_string(n),
                        r.feasible ? format_double(r.n_omega_star) : "nan",
                        r.feasible ? format_double(r.delta_star) : "nan",
                        format_double(r.outcome.p_total), format_double(r.outcome.f_a),
                        format_double(r.rate), r.feasible ? "1" : "0"});
    }
    json m = base_manifest("optimize-rate");
    m["config"] = {{"C", a.reg.cooperativity}, {"n_min", a.n_min}, {"n_max", a.n_max},
                   {"n_t", a.n_t},             {"threshold", a.threshold}};
    Output outp(a.out);
    emit_table(outp.stream(), a.format, m,
               {"C", "N", "N_omega", "Delta", "P_t", "F_A", "R_pe", "feasible"}, rows);
    return 0;
}

// ---------------------------------------------------------------------------
// disorder
// ---------------------------------------------------------------------------

struct DisorderArgs {
    RegisterFlags reg;
    double sigma = 0.2;
    int samples = 1000;
    std::uint64_t seed = 0;
    std::string n_list = "2,4,6,8,10";
    std::string modes = "u1,u2,u3";
    double sigma_omega = 0.2;
    std::string out, format = "csv", stats_out, config;
};

int run_disorder(const DisorderArgs& a) {
    DisorderSpec spec;
    spec.sigma_rel = a.sigma;
    spec.n_samples = a.samples;
    spec.seed = a.seed;
    spec.reference = build_register(a.reg, 0.0);

    std::vector<int> n_values;
    {
        std::istringstream is(a.n_list);
        std::string item;
        while (std::getline(is, item, ',')) n_values.push_back(std::stoi(item));
    }
    std::vector<CorrectionMode> modes;
    {
        std::istringstream is(a.modes);
        std::string item;
        while (std::getline(is, item, ',')) {
            if (item == "u1") modes.push_back(CorrectionMode::U1_none);
            else if (item == "u2") modes.push_back(CorrectionMode::U2_phase_only);
            else if (item == "u3") modes.push_back(CorrectionMode::U3_amp_and_phase);
            else throw std::invalid_argument("unknown correction mode: " + item);
        }
    }

    const DisorderStudyResult res =
        disorder_study(spec, n_values, modes, SpectralPulse{a.sigma_omega});

    json m = base_manifest("disorder");
    m["seed"] = a.seed;
    m["config"] = {{"C0", a.reg.cooperativity}, {"kappa", a.reg.kappa}, {"sigma", a.sigma},
                   {"samples", a.samples},      {"n_list", a.n_list},   {"modes", a.modes},
                   {"sigma_omega", a.sigma_omega}};

    std::vector<std::vector<std::string>> rows;
    rows.reserve(res.rows.size());
    for (const auto& r : res.rows) {
        rows.push_back({std::to_string(r.sample_id), std::to_string(r.rounds), to_string(r.mode),
                        format_double(r.p_t), format_double(r.f_a), format_double(r.f_b),
                        format_double(r.c_0a), format_double(r.c_1a), format_double(r.c_0b),
                        format_double(r.c_1b), r.tuned ? "ok" : "tuning_failed"});
    }
    Output outp(a.out);
    emit_table(outp.stream(), a.format, m,
               {"sample_id", "N", "correction_mode", "P_t", "F_A", "F_B", "C_0A", "C_1A", "C_0B",
                "C_1B", "status"},
               rows);

    if (!a.stats_out.empty()) {
        std::vector<std::vector<std::string>> stat_rows;
        for (const auto& s : res.stats) {
            stat_rows.push_back(
                {std::to_string(s.rounds), to_string(s.mode), format_double(s.p_t.mean),
                 format_double(s.p_t.p16), format_double(s.p_t.p50), format_double(s.p_t.p84),
                 format_double(s.infidelity_a.mean), format_double(s.infidelity_a.p16),
                 format_double(s.infidelity_a.p50), format_double(s.infidelity_a.p84),
                 format_double(s.infidelity_b.mean), format_double(s.infidelity_b.p16),
                 format_double(s.infidelity_b.p50), format_double(s.infidelity_b.p84),
                 std::to_string(s.n_used), std::to_string(s.n_failed)});
        }
        Output stats(a.stats_out);
        emit_table(stats.stream(), a.format, m,
                   {"N", "mode", "mean_pt", "p16_pt", "p50_pt", "p84_pt", "mean_infa", "p16_infa",
                    "p50_infa", "p84_infa", "mean_infb", "p16_infb", "p50_infb", "p84_infb",
                    "n_used", "n_failed"},
                   stat_rows);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// phase-noise
// ---------------------------------------------------------------------------

struct PhaseNoiseArgs {
    double delta0 = 0.0;
    double sigma_delta = 0.0;
    int mc_samples = 0;
    std::uint64_t seed = 0;
    double ref_length = 0.0, ref_rms = 0.0, target_length = 0.0;
    std::string out, format = "csv", config;
};

int run_phase_noise(const PhaseNoiseArgs& a) {
    PhaseNoiseModel model{a.delta0, a.sigma_delta};
    if (a.target_length > 0.0) {
        if (!(a.ref_length > 0.0)) {
            throw std::invalid_argument("--target-length requires --ref-length and --ref-rms");
        }
        const double projected = rms_length_scaling(a.ref_length, a.ref_rms, a.target_length);
        model = PhaseNoiseModel{projected, 0.0, a.target_length};
    }
    const double exact = averaged_phase_noise_fidelity(model);
    const double small = small_noise_phase_fidelity(model);

    std::string mc = "nan", mc_se = "nan";
    if (a.mc_samples > 0) {
        CounterRng rng(a.seed, 0);
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < a.mc_samples; ++i) {
            const double d = model.delta_0 + model.sigma_delta * rng.normal();
            const double f = phase_noise_outcome(cxd(0.0, 0.0), cxd(1.0, 0.0), d).f_a;
            acc += f;
            acc2 += f * f;
        }
        const double mean = acc / a.mc_samples;
        mc = format_double(mean);
        mc_se = format_double(
            std::sqrt(std::max(acc2 / a.mc_samples - mean * mean, 0.0) / a.mc_samples));
    }

    json m = base_manifest("phase-noise");
    m["seed"] = a.seed;
    m["config"] = {{"delta0", model.delta_0},       {"sigma_delta", model.sigma_delta},
                   {"mc_samples", a.mc_samples},    {"ref_length", a.ref_length},
                   {"ref_rms", a.ref_rms},          {"target_length", a.target_length}};
    Output outp(a.out);
    emit_table(outp.stream(), a.format, m,
               {"delta0", "sigma_delta", "rms", "f_exact", "f_small_noise", "f_mc", "mc_stderr"},
               {{format_double(model.delta_0), format_double(model.sigma_delta),
                 format_double(model.rms()), format_double(exact), format_double(small), mc,
                 mc_se}});
    return 0;
}

// ---------------------------------------------------------------------------
// three-level
// ---------------------------------------------------------------------------

struct ThreeLevelArgs {
    RegisterFlags reg;
    int rounds = 4;
    double sigma_omega = 0.2;
    double n_t = 10.0;
    std::string modulation = "step";
    double amplitude = 0.0;  // 0: closed form (step) or formula seed (sin)
    bool refine = false;
    std::string dump_envelopes;
    std::string out, format = "csv", config;
};

int run_three_level_cmd(const ThreeLevelArgs& a) {
    RegisterParams reg = build_register(a.reg, 0.0);
    reg.mode = RegisterMode::ThreeLevel;
    const double delta = require_feasible_delta(a.reg.cooperativity, a.rounds);
    reg.transition0.delta = delta;

    SpectralPulse pulse{a.sigma_omega, 0.0, a.n_t};
    const bool sinusoid = a.modulation == "sin";
    double amplitude = a.amplitude;
    if (amplitude == 0.0) {
        amplitude = sinusoid ? effective_sinusoid_amplitude(delta, a.n_t) : delta;
    }
    if (sinusoid && a.refine) {
        amplitude = refine_sinusoid_amplitude(pulse, reg, a.rounds, amplitude);
    }
    const DDSchedule sched = make_dd_schedule(
        pulse, a.rounds, sinusoid ? DetuningModulation::Sinusoid : DetuningModulation::Stepwise,
        amplitude);
    const ThreeLevelRun run = run_three_level(pulse, sched, reg);
    const HeraldOutcome h = temporal_herald(run.u0, run.u1);

    double lost = 0.0;
    for (const auto& r : run.records0) lost += r.residual;

    json m = base_manifest("three-level");
    m["config"] = {{"C", a.reg.cooperativity}, {"rounds", a.rounds},
                   {"sigma_omega", a.sigma_omega}, {"n_t", a.n_t}, {"modulation", a.modulation},
                   {"amplitude", amplitude}, {"delta", delta}, {"refine", a.refine}};
    std::vector<std::string> row{std::to_string(a.rounds), format_double(a.n_t), a.modulation,
                                 format_double(amplitude)};
    const auto oc = outcome_cells(h);
    row.insert(row.end(), oc.begin(), oc.end());
    row.push_back(format_double(lost));
    Output outp(a.out);
    emit_table(outp.stream(), a.format, m,
               {"N", "n_t", "modulation", "amplitude", "p_a", "p_b", "p_total", "f_a", "f_b",
                "residual_norm"},
               {row});

    if (!a.dump_envelopes.empty()) {
        Output dump(a.dump_envelopes);
        TableWriter w(dump.stream());
        w.manifest(m);
        w.header({"t", "re_u0", "im_u0", "re_u1", "im_u1"});
        for (std::size_t i = 0; i < run.u0.values.size(); i += 32) {
            w.row({format_double(run.u0.t0 + i * run.u0.dt), format_double(run.u0.values[i].real()),
                   format_double(run.u0.values[i].imag()), format_double(run.u1.values[i].real()),
                   format_double(run.u1.values[i].imag())});
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

struct Recipe {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    json params;
};

ProtocolConfig simple_config(double c, int rounds, double delta = 1.0, double sigma = 0.2) {
    ProtocolConfig cfg;
    cfg.rounds = rounds;
    cfg.pulse.sigma_omega = sigma;
    cfg.register_a = symmetric_register(c, delta);
    cfg.register_b = cfg.register_a;
    return cfg;
}

Recipe recipe_fig2b() {
    Recipe r;
    r.columns = {"delta", "N", "inf_mono", "inf_gauss", "is_optimum"};
    for (int i = 0; i <= 100; ++i) {
        const double delta = 2.0 + 10.0 * i / 100.0;
        const int n = std::max(1, static_cast<int>(std::lround(required_rounds(delta, 1.0))));
        const cxd r0 = reflection(symmetric_register(1.0, delta), 0, 0.0);
        const HeraldOutcome mono = monochromatic_outcome(std::abs(r0), std::arg(-r0), n);
        const HeraldOutcome gauss = herald(simple_config(1.0, n, delta));
        r.rows.push_back({format_double(delta), std::to_string(n), format_double(1.0 - mono.f_a),
                          format_double(1.0 - gauss.f_a), "0"});
    }
    for (int n = 2; n <= 12; ++n) {
        const OptimizeResult opt =
            optimize_detuning(simple_config(1.0, n), DetuningObjective::MaxFidelityA);
        if (!opt.feasible) continue;
        const cxd r0 = reflection(symmetric_register(1.0, opt.delta), 0, 0.0);
        const HeraldOutcome mono = monochromatic_outcome(std::abs(r0), std::arg(-r0), n);
        r.rows.push_back({format_double(opt.delta), std::to_string(n),
                          format_double(1.0 - mono.f_a), format_double(1.0 - opt.outcome.f_a),
                          "1"});
    }
    r.params = {{"C", 1.0}, {"sigma_omega", 0.2}};
    return r;
}

Recipe recipe_fig2c() {
    Recipe r;
    r.columns = {"C", "N", "delta_opt", "delta_mono"};
    for (double c : {0.5, 1.0, 2.0}) {
        for (int n = 2; n <= 20; ++n) {
            if (solve_detuning(c, n).status != DetuningSolution::Status::TwoRoots) continue;
            const OptimizeResult opt =
                optimize_detuning(simple_config(c, n), DetuningObjective::MaxFidelityA);
            if (!opt.feasible) continue;
            r.rows.push_back({format_double(c), std::to_string(n), format_double(opt.delta),
                              format_double(2.0 * n * c / kPi)});
        }
    }
    r.params = {{"sigma_omega", 0.2}};
    return r;
}

Recipe recipe_fig2de(bool probabilities) {
    Recipe r;
    r.columns = probabilities ? std::vector<std::string>{"C", "N", "delta", "p_t", "p_t_mono"}
                              : std::vector<std::string>{"C", "N", "delta", "inf_a"};
    for (double c : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        for (int n = 1; n <= 12; ++n) {
            if (solve_detuning(c, n).status != DetuningSolution::Status::TwoRoots) continue;
            const OptimizeResult opt =
                optimize_detuning(simple_config(c, n), DetuningObjective::MaxFidelityA);
            if (!opt.feasible) continue;
            if (probabilities) {
                const cxd r0 = reflection(symmetric_register(c, opt.delta), 0, 0.0);
                r.rows.push_back({format_double(c), std::to_string(n), format_double(opt.delta),
                                  format_double(opt.outcome.p_total),
                                  format_double(std::pow(std::norm(r0), n))});
            } else {
                r.rows.push_back({format_double(c), std::to_string(n), format_double(opt.delta),
                                  format_double(1.0 - opt.outcome.f_a)});
            }
        }
    }
    r.params = {{"sigma_omega", 0.2}};
    return r;
}

Recipe recipe_fig3a() {
    Recipe r;
    r.columns = {"N", "N_omega", "delta", "inf_a", "p_t"};
    for (int n = 2; n <= 10; ++n) {
        for (double n_omega = 2.0; n_omega <= 20.0; n_omega += 1.0) {
            const OptimizeResult opt = optimize_detuning(
                simple_config(2.0, n), DetuningObjective::MaxFidelityA, 0.0, n_omega);
            if (!opt.feasible) continue;
            r.rows.push_back({std::to_string(n), format_double(n_omega), format_double(opt.delta),
                              format_double(1.0 - opt.outcome.f_a),
                              format_double(opt.outcome.p_total)});
        }
    }
    r.params = {{"C", 2.0}, {"n_t", 10.0}};
    return r;
}

Recipe recipe_fig3b() {
    Recipe r;
    r.columns = {"scheme", "threshold", "N", "N_omega", "delta", "p_t", "f_a", "r_pe", "feasible"};
    for (double th : {0.99, 0.995, 0.999}) {
        for (int n = 2; n <= 10; ++n) {
            ProtocolConfig cfg = simple_config(2.0, n);
            cfg.pulse.n_t = 10.0;
            const RateResult res = max_rate_at_fidelity(cfg, th);
            r.rows.push_back({"scaled", format_double(th), std::to_string(n),
                              res.feasible ? format_double(res.n_omega_star) : "nan",
                              res.feasible ? format_double(res.delta_star) : "nan",
                              format_double(res.outcome.p_total), format_double(res.outcome.f_a),
                              format_double(res.rate), res.feasible ? "1" : "0"});
        }
    }
    for (int n = 2; n <= 10; ++n) {
        ProtocolConfig cfg = simple_config(2.0, n);
        const OptimizeResult opt = optimize_detuning(cfg, DetuningObjective::MaxFidelityA);
        if (!opt.feasible) continue;
        const double rate = opt.outcome.p_total / encoding_duration(n, 10.0, 0.2);
        r.rows.push_back({"fixed", "nan", std::to_string(n), "nan", format_double(opt.delta),
                          format_double(opt.outcome.p_total), format_double(opt.outcome.f_a),
                          format_double(rate), "1"});
    }
    r.params = {{"C", 2.0}, {"n_t", 10.0}, {"n_omega_fixed", 5.0}};
    return r;
}

Recipe recipe_fig4a() {
    Recipe r;
    r.columns = {"N", "inf_a_unc", "inf_b_unc", "inf_a_cor", "inf_b_cor", "inf_a_ideal"};
    RegisterParams ra = symmetric_register(2.0, 0.0);
    RegisterParams rb = ra;
    auto set_c = [](TransitionParams& t, double c) { t.g = std::sqrt(c * 200.0 * t.gamma() / 4.0); };
    set_c(ra.transition0, 1.5);
    set_c(ra.transition1, 2.0);
    set_c(rb.transition0, 2.5);
    set_c(rb.transition1, 3.0);
    for (int n = 2; n <= 10; ++n) {
        RegisterParams ta = ra, tb = rb;
        const RegisterTuning tune_a = tune_register(ta, n);
        const RegisterTuning tune_b = tune_register(tb, n);
        if (!tune_a.ok || !tune_b.ok) continue;
        ta.transition0.delta = tune_a.delta0;
        ta.transition1.delta = tune_a.delta1;
        tb.transition0.delta = tune_b.delta0;
        tb.transition1.delta = tune_b.delta1;
        ProtocolConfig cfg;
        cfg.rounds = n;
        cfg.register_a = ta;
        cfg.register_b = tb;
        const HeraldOutcome unc = herald(cfg);
        cfg.corrections = {
            register_correction(reflection(ta, 0, 0.0), reflection(tb, 0, 0.0), n)};
        const HeraldOutcome cor = herald(cfg);
        const OptimizeResult ideal =
            optimize_detuning(simple_config(2.0, n), DetuningObjective::MaxFidelityA);
        r.rows.push_back({std::to_string(n), format_double(1.0 - unc.f_a),
                          format_double(1.0 - unc.f_b), format_double(1.0 - cor.f_a),
                          format_double(1.0 - cor.f_b), format_double(1.0 - ideal.outcome.f_a)});
    }
    r.params = {{"cooperativities", {1.5, 2.0, 2.5, 3.0}}};
    return r;
}

Recipe recipe_fig4b() {
    Recipe r;
    r.columns = {"C", "N", "delta", "p_t", "f_a", "feasible"};
    for (double c = 1.0; c <= 3.01; c += 0.25) {
        for (int n = 1; n <= 12; ++n) {
            if (solve_detuning(c, n).status != DetuningSolution::Status::TwoRoots) continue;
            ProtocolConfig cfg = simple_config(c, n);
            cfg.imperfections.eta_i = 0.99;
            cfg.imperfections.eta_r = 0.9886;
            const OptimizeResult opt =
                optimize_detuning(cfg, DetuningObjective::MaxPtAtFidelityFloor, 0.99);
            r.rows.push_back({format_double(c), std::to_string(n),
                              opt.feasible ? format_double(opt.delta) : "nan",
                              format_double(opt.outcome.p_total), format_double(opt.outcome.f_a),
                              opt.feasible ? "1" : "0"});
        }
    }
    r.params = {{"eta_i", 0.99}, {"eta_r", 0.9886}, {"fidelity_floor", 0.99}};
    return r;
}

Recipe recipe_fig4c() {
    Recipe r;
    r.columns = {"eta_m", "N", "delta", "p_t", "f_a", "feasible"};
    for (double eta_m : {0.85, 0.9, 0.95, 1.0}) {
        for (int n = 1; n <= 12; ++n) {
            if (solve_detuning(2.0, n).status != DetuningSolution::Status::TwoRoots) continue;
            ProtocolConfig cfg = simple_config(2.0, n);
            cfg.imperfections.eta_i = 0.99;
            cfg.imperfections.eta_r = 0.9886;
            cfg.imperfections.eta_m = eta_m;
            cfg.imperfections.strategy = MismatchStrategy::SelectivePi;
            const OptimizeResult opt =
                optimize_detuning(cfg, DetuningObjective::MaxPtAtFidelityFloor, 0.99);
            r.rows.push_back({format_double(eta_m), std::to_string(n),
                              opt.feasible ? format_double(opt.delta) : "nan",
                              format_double(opt.outcome.p_total), format_double(opt.outcome.f_a),
                              opt.feasible ? "1" : "0"});
        }
    }
    r.params = {{"C", 2.0}, {"eta_i", 0.99}, {"eta_r", 0.9886}, {"strategy", "selective-pi"}};
    return r;
}

Recipe recipe_fig5c() {
    Recipe r;
    r.columns = {"n_t", "N", "modulation", "amplitude", "inf_a"};
    for (int n : {3, 4, 5}) {
        const double delta = solve_detuning(2.0, n).delta_plus;
        RegisterParams reg = symmetric_register(2.0, delta);
        reg.mode = RegisterMode::ThreeLevel;
        SpectralPulse p10{0.2, 0.0, 10.0};
        const DDSchedule step = make_dd_schedule(p10, n, DetuningModulation::Stepwise, delta);
        const ThreeLevelRun srun = run_three_level(p10, step, reg);
        r.rows.push_back({"10", std::to_string(n), "step", format_double(delta),
                          format_double(1.0 - temporal_herald(srun.u0, srun.u1).f_a)});
        for (double n_t : {12.0, 16.0, 20.0}) {
            SpectralPulse pulse{0.2, 0.0, n_t};
            const double seed = effective_sinusoid_amplitude(delta, n_t);
            const double amp = refine_sinusoid_amplitude(pulse, reg, n, seed);
            const DDSchedule s = make_dd_schedule(pulse, n, DetuningModulation::Sinusoid, amp);
            const ThreeLevelRun run = run_three_level(pulse, s, reg);
            r.rows.push_back({format_double(n_t), std::to_string(n), "sin", format_double(amp),
                              format_double(1.0 - temporal_herald(run.u0, run.u1).f_a)});
        }
    }
    r.params = {{"C", 2.0}};
    return r;
}

Recipe recipe_s1() {
    Recipe r;
    r.columns = {"omega", "abs_r0", "abs_r1", "abs_r0_pow4", "abs_r1_pow4", "phase_accum",
                 "re_f0", "im_f0", "re_f1", "im_f1", "u"};
    const RegisterParams reg = symmetric_register(2.0, 4.9873);
    SpectralPulse pulse{0.2};
    for (int i = 0; i <= 600; ++i) {
        const double w = -3.0 + 6.0 * i / 600.0;
        const cxd r0 = reflection(reg, 0, w);
        const cxd r1 = reflection(reg, 1, w);
        const cxd f0 = pow_n(r0, 4) * spectrum(pulse, w);
        const cxd f1 = pow_n(r1, 4) * spectrum(pulse, w);
        r.rows.push_back({format_double(w), format_double(std::abs(r0)),
                          format_double(std::abs(r1)), format_double(std::pow(std::abs(r0), 4)),
                          format_double(std::pow(std::abs(r1), 4)),
                          format_double(4.0 * (std::arg(-r0) - std::arg(-r1))),
                          format_double(f0.real()), format_double(f0.imag()),
                          format_double(f1.real()), format_double(f1.imag()),
                          format_double(spectrum(pulse, w))});
    }
    r.params = {{"C", 2.0}, {"delta", 4.9873}, {"N", 4}, {"sigma_omega", 0.2}};
    return r;
}

Recipe recipe_s2() {
    Recipe r;
    r.columns = {"part", "n_omega_or_n_t", "inf_a", "p_t"};
    for (double n_omega = 1.0; n_omega <= 10.0; n_omega += 1.0) {
        const OptimizeResult opt = optimize_detuning(simple_config(1.0, 5, 1.0, 1.0 / n_omega),
                                                     DetuningObjective::MaxFidelityA);
        if (!opt.feasible) continue;
        r.rows.push_back({"width", format_double(n_omega), format_double(1.0 - opt.outcome.f_a),
                          format_double(opt.outcome.p_total)});
    }
    // time-domain window convergence: stepwise three-level vs N_t
    const int n = 2;
    const double delta = solve_detuning(2.0, n).delta_plus;
    RegisterParams reg = symmetric_register(2.0, delta);
    for (double n_t : {4.0, 6.0, 8.0, 10.0, 12.0}) {
        SpectralPulse pulse{0.2, 0.0, n_t};
        const DDSchedule s = make_dd_schedule(pulse, n, DetuningModulation::Stepwise, delta);
        const ThreeLevelRun run = run_three_level(pulse, s, reg);
        r.rows.push_back({"window", format_double(n_t),
                          format_double(1.0 - temporal_herald(run.u0, run.u1).f_a), "nan"});
    }
    r.params = {{"C_width_part", 1.0}, {"C_window_part", 2.0}};
    return r;
}

Recipe recipe_s3(std::uint64_t seed) {
    Recipe r;
    r.columns = {"N", "mode", "mean_pt", "p16_pt", "p50_pt", "p84_pt", "mean_infa", "p16_infa",
                 "p50_infa", "p84_infa", "mean_infb", "p16_infb", "p50_infb", "p84_infb",
                 "n_used", "n_failed"};
    DisorderSpec spec;
    spec.sigma_rel = 0.2;
    spec.n_samples = 1000;
    spec.seed = seed;
    spec.reference = symmetric_register(2.0, 0.0);
    const DisorderStudyResult res = disorder_study(
        spec, {2, 4, 6, 8, 10},
        {CorrectionMode::U1_none, CorrectionMode::U2_phase_only, CorrectionMode::U3_amp_and_phase});
    for (const auto& s : res.stats) {
        r.rows.push_back({std::to_string(s.rounds), to_string(s.mode), format_double(s.p_t.mean),
                          format_double(s.p_t.p16), format_double(s.p_t.p50),
                          format_double(s.p_t.p84), format_double(s.infidelity_a.mean),
                          format_double(s.infidelity_a.p16), format_double(s.infidelity_a.p50),
                          format_double(s.infidelity_a.p84), format_double(s.infidelity_b.mean),
                          format_double(s.infidelity_b.p16), format_double(s.infidelity_b.p50),
                          format_double(s.infidelity_b.p84), std::to_string(s.n_used),
                          std::to_string(s.n_failed)});
    }
    r.params = {{"sigma", 0.2}, {"samples", 1000}, {"C0", 2.0}, {"seed", seed}};
    return r;
}

Recipe recipe_s4() {
    Recipe r;
    r.columns = {"eta_i", "delta", "ratio_exact", "eta_i_pow4"};
    for (double eta_i : {0.98, 0.99}) {
        for (int i = 0; i <= 50; ++i) {
            const double delta = 2.0 + 10.0 * i / 50.0;
            const RegisterParams ideal = symmetric_register(2.0, delta);
            const RegisterParams lossy =
                symmetric_register(2.0, delta, single_sided_cavity(200.0, eta_i));
            const double ratio =
                std::norm(reflection(lossy, 0, 0.0)) / std::norm(reflection(ideal, 0, 0.0));
            r.rows.push_back({format_double(eta_i), format_double(delta), format_double(ratio),
                              format_double(std::pow(eta_i, 4))});
        }
    }
    r.params = {{"C", 2.0}};
    return r;
}

Recipe recipe_s5() {
    Recipe r;
    r.columns = {"eta_i", "C", "n_star", "delta", "p_t", "f_a", "feasible"};
    for (double eta_i : {1.0, 0.995, 0.99, 0.98}) {
        for (double c = 0.5; c <= 3.01; c += 0.25) {
            ProtocolConfig cfg = simple_config(c, 1);
            cfg.imperfections.eta_i = eta_i;
            cfg.imperfections.eta_r = 0.9773;
            const LossOptimalResult res = loss_optimal_rounds(cfg, 0.99, 20);
            r.rows.push_back({format_double(eta_i), format_double(c),
                              std::to_string(res.n_star),
                              res.feasible ? format_double(res.delta_star) : "nan",
                              format_double(res.outcome.p_total), format_double(res.outcome.f_a),
                              res.feasible ? "1" : "0"});
        }
    }
    r.params = {{"eta_r", 0.9773}, {"fidelity_floor", 0.99}};
    return r;
}

Recipe recipe_s6() {
    Recipe r;
    r.columns = {"strategy", "eta_m", "delta", "abs_r_tilde", "arg_r_tilde"};
    const std::vector<std::pair<std::string, MismatchStrategy>> strategies{
        {"identity", MismatchStrategy::Identity},
        {"separate", MismatchStrategy::Separate},
        {"selective-pi", MismatchStrategy::SelectivePi}};
    for (const auto& [name, strat] : strategies) {
        for (double eta_m : {0.85, 0.9, 0.95}) {
            for (int i = 0; i <= 50; ++i) {
                const double delta = 2.0 + 10.0 * i / 50.0;
                const cxd refl = reflection(symmetric_register(2.0, delta), 0, 0.0);
                const cxd rt = mismatched_reflection(refl, eta_m, strat);
                r.rows.push_back({name, format_double(eta_m), format_double(delta),
                                  format_double(std::abs(rt)), format_double(std::arg(rt))});
            }
        }
    }
    r.params = {{"C", 2.0}};
    return r;
}

Recipe recipe_s7(std::uint64_t seed) {
    Recipe r;
    r.columns = {"delta0", "sigma_delta", "f_exact", "f_small", "f_mc", "mc_stderr"};
    const std::vector<std::pair<double, double>> points = {
        {0.0, 0.02}, {0.0, 0.3}, {0.05, 0.1}, {0.085, 0.0}, {0.1, 0.2},
        {0.3, 0.05}, {0.3, 0.4}, {0.6, 0.1},  {1.0, 0.3},   {1.5, 0.5}};
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto [d0, sd] = points[k];
        CounterRng rng(seed, k);
        const int m = 100000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < m; ++i) {
            const double f =
                phase_noise_outcome(cxd(0.0, 0.0), cxd(1.0, 0.0), d0 + sd * rng.normal()).f_a;
            acc += f;
            acc2 += f * f;
        }
        const double mean = acc / m;
        r.rows.push_back({format_double(d0), format_double(sd),
                          format_double(averaged_phase_noise_fidelity({d0, sd})),
                          format_double(small_noise_phase_fidelity({d0, sd})), format_double(mean),
                          format_double(std::sqrt(std::max(acc2 / m - mean * mean, 0.0) / m))});
    }
    // length-scaling projection rows
    const double projected = rms_length_scaling(2.1, 0.085, 2.2);
    r.rows.push_back({format_double(projected), "0",
                      format_double(averaged_phase_noise_fidelity({projected, 0.0})),
                      format_double(small_noise_phase_fidelity({projected, 0.0})), "nan", "nan"});
    r.params = {{"mc_samples", 100000}, {"seed", seed}};
    return r;
}

Recipe recipe_s8() {
    Recipe r;
    r.columns = {"part", "x", "value", "reference"};
    // (c) stepwise infidelity vs N against the four-level frequency result
    for (int n = 2; n <= 6; ++n) {
        const double delta = solve_detuning(2.0, n).delta_plus;
        RegisterParams reg = symmetric_register(2.0, delta);
        reg.mode = RegisterMode::ThreeLevel;
        SpectralPulse pulse{0.2, 0.0, 10.0};
        const DDSchedule s = make_dd_schedule(pulse, n, DetuningModulation::Stepwise, delta);
        const ThreeLevelRun run = run_three_level(pulse, s, reg);
        const HeraldOutcome four = herald(simple_config(2.0, n, delta));
        r.rows.push_back({"stepwise_inf", std::to_string(n),
                          format_double(1.0 - temporal_herald(run.u0, run.u1).f_a),
                          format_double(1.0 - four.f_a)});
    }
    // (d) refined sinusoid amplitude ratio vs the curvature formula
    const int n = 4;
    const double delta = solve_detuning(2.0, n).delta_plus;
    RegisterParams reg = symmetric_register(2.0, delta);
    reg.mode = RegisterMode::ThreeLevel;
    for (double n_t : {12.0, 16.0, 20.0, 24.0}) {
        SpectralPulse pulse{0.2, 0.0, n_t};
        const double amp =
            refine_sinusoid_amplitude(pulse, reg, n, effective_sinusoid_amplitude(delta, n_t));
        r.rows.push_back({"amplitude_ratio", format_double(n_t), format_double(amp / delta),
                          format_double(1.0 + kPi * kPi / (4.0 * n_t * n_t))});
    }
    r.params = {{"C", 2.0}};
    return r;
}

struct ReproduceArgs {
    std::string figure;
    std::string out_dir;
    std::uint64_t seed = 0;
};

int run_reproduce(const ReproduceArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    Recipe recipe;
    if (a.figure == "fig2b") recipe = recipe_fig2b();
    else if (a.figure == "fig2c") recipe = recipe_fig2c();
    else if (a.figure == "fig2d") recipe = recipe_fig2de(false);
    else if (a.figure == "fig2e") recipe = recipe_fig2de(true);
    else if (a.figure == "fig3a") recipe = recipe_fig3a();
    else if (a.figure == "fig3b") recipe = recipe_fig3b();
    else if (a.figure == "fig4a") recipe = recipe_fig4a();
    else if (a.figure == "fig4b") recipe = recipe_fig4b();
    else if (a.figure == "fig4c") recipe = recipe_fig4c();
    else if (a.figure == "fig5c") recipe = recipe_fig5c();
    else if (a.figure == "s1") recipe = recipe_s1();
    else if (a.figure == "s2") recipe = recipe_s2();
    else if (a.figure == "s3") recipe = recipe_s3(a.seed);
    else if (a.figure == "s4") recipe = recipe_s4();
    else if (a.figure == "s5") recipe = recipe_s5();
    else if (a.figure == "s6") recipe = recipe_s6();
    else if (a.figure == "s7") recipe = recipe_s7(a.seed);
    else if (a.figure == "s8") recipe = recipe_s8();
    else throw std::invalid_argument("unknown figure id: " + a.figure);

    json manifest = base_manifest("reproduce");
    manifest["figure"] = a.figure;
    manifest["seed"] = a.seed;
    manifest["params"] = recipe.params;

    const std::string csv_path = a.out_dir + "/" + a.figure + ".csv";
    Output data(csv_path);
    emit_table(data.stream(), "csv", manifest, recipe.columns, recipe.rows);

    manifest["runtime_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["rows"] = recipe.rows.size();
    manifest["data_file"] = a.figure + ".csv";
    std::ofstream mf(a.out_dir + "/" + a.figure + "_manifest.json");
    if (!mf) throw std::runtime_error("cannot write manifest in " + a.out_dir);
    mf << manifest.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repeated spin-photon phase-encoding simulator"};
    app.option_defaults()->take_last();
    app.require_subcommand(1);

    ReflectArgs reflect_args;
    CLI::App* reflect_cmd = app.add_subcommand("reflect", "spin-conditioned spectral response");
    add_register_flags(reflect_cmd, reflect_args.reg);
    reflect_cmd->add_option("--delta", reflect_args.delta, "transition detuning");
    reflect_cmd->add_option("--sigma-omega", reflect_args.sigma_omega, "grid width scale");
    reflect_cmd->add_option("--grid-span", reflect_args.grid_span, "grid half-width in sigmas");
    reflect_cmd->add_option("--grid-points", reflect_args.grid_points, "grid points (odd)");
    reflect_cmd->add_option("--transitions", reflect_args.transitions, "subset of {0,1}");
    reflect_cmd->add_option("--mode", reflect_args.mode)
        ->check(CLI::IsMember({"reflection", "transmission"}));
    reflect_cmd->add_option("--out", reflect_args.out, "output file (default stdout)");
    reflect_cmd->add_option("--format", reflect_args.format)->check(CLI::IsMember({"csv", "json"}));
    reflect_cmd->add_option("--config", reflect_args.config, "strict JSON config file");

    HeraldArgs herald_args;
    CLI::App* herald_cmd = app.add_subcommand("herald", "single protocol evaluation");
    add_register_flags(herald_cmd, herald_args.reg);
    add_imperfection_flags(herald_cmd, herald_args.imp);
    herald_cmd->add_option("--N", herald_args.rounds, "encoding rounds (0: smallest feasible)");
    herald_cmd->add_option("--delta", herald_args.delta, "detuning (0: closed form)");
    herald_cmd->add_flag("--delta-minus", herald_args.delta_minus,
                         "pick the smaller closed-form root instead of Delta+");
    herald_cmd->add_option("--sigma-omega", herald_args.sigma_omega, "pulse spectral width");
    herald_cmd->add_option("--n-t", herald_args.n_t, "temporal widths per window");
    herald_cmd->add_option("--grid-span", herald_args.grid_span);
    herald_cmd->add_option("--grid-points", herald_args.grid_points);
    herald_cmd->add_option("--mode", herald_args.mode)
        ->check(CLI::IsMember({"reflection", "transmission"}));
    herald_cmd->add_option("--optimize", herald_args.optimize)
        ->check(CLI::IsMember({"none", "fidelity", "pt-floor"}));
    herald_cmd->add_option("--fidelity-floor", herald_args.fidelity_floor);
    herald_cmd->add_option("--seed", herald_args.seed);
    herald_cmd->add_option("--out", herald_args.out);
    herald_cmd->add_option("--format", herald_args.format)->check(CLI::IsMember({"csv", "json"}));
    herald_cmd->add_option("--config", herald_args.config, "strict JSON config file");

    SweepArgs sweep_args;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "cartesian parameter sweep");
    add_register_flags(sweep_cmd, sweep_args.base.reg);
    add_imperfection_flags(sweep_cmd, sweep_args.base.imp);
    sweep_cmd->add_option("--axis", sweep_args.axis_specs,
                          "axis spec name=start:stop:count or name=v1,v2,...")
        ->take_all();
    sweep_cmd->add_option("--N", sweep_args.base.rounds);
    sweep_cmd->add_option("--delta", sweep_args.base.delta);
    sweep_cmd->add_option("--sigma-omega", sweep_args.base.sigma_omega);
    sweep_cmd->add_option("--n-t", sweep_args.base.n_t);
    sweep_cmd->add_option("--grid-span", sweep_args.base.grid_span);
    sweep_cmd->add_option("--grid-points", sweep_args.base.grid_points);
    sweep_cmd->add_option("--optimize", sweep_args.base.optimize)
        ->check(CLI::IsMember({"none", "fidelity", "pt-floor"}));
    sweep_cmd->add_option("--fidelity-floor", sweep_args.base.fidelity_floor);
    sweep_cmd->add_option("--seed", sweep_args.base.seed);
    sweep_cmd->add_option("--out", sweep_args.base.out);
    sweep_cmd->add_option("--format", sweep_args.base.format)
        ->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--config", sweep_args.base.config, "strict JSON config file");

    RateArgs rate_args;
    CLI::App* rate_cmd = app.add_subcommand("optimize-rate", "fidelity-constrained rate maximum");
    add_register_flags(rate_cmd, rate_args.reg);
    rate_cmd->add_option("--n-min", rate_args.n_min);
    rate_cmd->add_option("--n-max", rate_args.n_max);
    rate_cmd->add_option("--n-t", rate_args.n_t);
    rate_cmd->add_option("--threshold", rate_args.threshold);
    rate_cmd->add_option("--out", rate_args.out);
    rate_cmd->add_option("--format", rate_args.format)->check(CLI::IsMember({"csv", "json"}));
    rate_cmd->add_option("--config", rate_args.config, "strict JSON config file");

    DisorderArgs disorder_args;
    CLI::App* disorder_cmd = app.add_subcommand("disorder", "Monte Carlo disorder study");
    add_register_flags(disorder_cmd, disorder_args.reg);
    disorder_cmd->add_option("--sigma", disorder_args.sigma, "relative disorder std");
    disorder_cmd->add_option("--samples", disorder_args.samples);
    disorder_cmd->add_option("--seed", disorder_args.seed);
    disorder_cmd->add_option("--n-list", disorder_args.n_list, "comma-separated N values");
    disorder_cmd->add_option("--modes", disorder_args.modes, "subset of u1,u2,u3");
    disorder_cmd->add_option("--sigma-omega", disorder_args.sigma_omega);
    disorder_cmd->add_option("--out", disorder_args.out);
    disorder_cmd->add_option("--stats-out", disorder_args.stats_out, "percentile-band summary");
    disorder_cmd->add_option("--format", disorder_args.format)
        ->check(CLI::IsMember({"csv", "json"}));
    disorder_cmd->add_option("--config", disorder_args.config, "strict JSON config file");

    PhaseNoiseArgs pn_args;
    CLI::App* pn_cmd = app.add_subcommand("phase-noise", "interferometric phase-noise model");
    pn_cmd->add_option("--delta0", pn_args.delta0, "static offset (rad)");
    pn_cmd->add_option("--sigma-delta", pn_args.sigma_delta, "fluctuation std (rad)");
    pn_cmd->add_option("--mc-samples", pn_args.mc_samples);
    pn_cmd->add_option("--seed", pn_args.seed);
    pn_cmd->add_option("--ref-length", pn_args.ref_length, "reference link length (km)");
    pn_cmd->add_option("--ref-rms", pn_args.ref_rms, "reference rms phase error (rad)");
    pn_cmd->add_option("--target-length", pn_args.target_length, "projected link length (km)");
    pn_cmd->add_option("--out", pn_args.out);
    pn_cmd->add_option("--format", pn_args.format)->check(CLI::IsMember({"csv", "json"}));
    pn_cmd->add_option("--config", pn_args.config, "strict JSON config file");

    ThreeLevelArgs tl_args;
    CLI::App* tl_cmd = app.add_subcommand("three-level", "time-domain DD-synchronized run");
    add_register_flags(tl_cmd, tl_args.reg);
    tl_cmd->add_option("--rounds", tl_args.rounds, "pi-pulse pairs");
    tl_cmd->add_option("--sigma-omega", tl_args.sigma_omega);
    tl_cmd->add_option("--n-t", tl_args.n_t);
    tl_cmd->add_option("--modulation", tl_args.modulation)->check(CLI::IsMember({"step", "sin"}));
    tl_cmd->add_option("--amplitude", tl_args.amplitude, "detuning amplitude (0: auto)");
    tl_cmd->add_flag("--refine", tl_args.refine, "refine the sinusoid amplitude");
    tl_cmd->add_option("--dump-envelopes", tl_args.dump_envelopes, "per-round envelope CSV");
    tl_cmd->add_option("--out", tl_args.out);
    tl_cmd->add_option("--format", tl_args.format)->check(CLI::IsMember({"csv", "json"}));
    tl_cmd->add_option("--config", tl_args.config, "strict JSON config file");

    ReproduceArgs rep_args;
    CLI::App* rep_cmd = app.add_subcommand("reproduce", "pinned figure-reproduction recipes");
    rep_cmd->add_option("figure", rep_args.figure,
                        "one of fig2b..fig5c, s1..s8")->required();
    rep_cmd->add_option("--out", rep_args.out_dir, "output directory")->required();
    rep_cmd->add_option("--seed", rep_args.seed);

    try {
        const std::vector<std::string> args = merge_config_into_args(argc, argv);
        std::vector<const char*> cargs{argv[0]};
        for (const auto& s : args) cargs.push_back(s.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (reflect_cmd->parsed()) return run_reflect(reflect_args);
        if (herald_cmd->parsed()) return run_herald(herald_args);
        if (sweep_cmd->parsed()) return run_sweep(sweep_args);
        if (rate_cmd->parsed()) return run_optimize_rate(rate_args);
        if (disorder_cmd->parsed()) return run_disorder(disorder_args);
        if (pn_cmd->parsed()) return run_phase_noise(pn_args);
        if (tl_cmd->parsed()) return run_three_level_cmd(tl_args);
        if (rep_cmd->parsed()) return run_reproduce(rep_args);
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
