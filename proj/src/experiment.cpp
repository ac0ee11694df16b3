#include "dfrc/experiment.hpp"

#include "dfrc/majorization.hpp"
#include "dfrc/waveform_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dfrc {

ExperimentConfig ExperimentConfig::full() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::desk() {
    ExperimentConfig c;
    c.n_tx = 4;
    c.n_rx = 4;
    c.block_length = 8;
    c.users = 2;
    c.max_lag = 4;
    return c;
}

std::vector<double> ExperimentConfig::gamma_linear() const {
    std::vector<double> g(users);
    for (int k = 0; k < users; ++k) g[k] = db_to_linear(gamma_db.size() == 1 ? gamma_db[0] : gamma_db.at(k));
    return g;
}

// --------------------------------------------------------------------------
// Parsing
// --------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct RawValue {
    int line = 0;
    bool is_array = false;
    std::vector<std::string> items;  // one item for scalars
};

using Setter = std::function<void(ExperimentConfig&, const RawValue&)>;

double as_real(const RawValue& v) {
    if (v.is_array || v.items.size() != 1) throw std::invalid_argument("expected a scalar number");
    return parse_double(v.items[0]);
}

int as_int(const RawValue& v) {
    const double d = as_real(v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw std::invalid_argument("expected an integer");
    return static_cast<int>(d);
}

std::vector<double> as_reals(const RawValue& v) {
    std::vector<double> out;
    for (const auto& s : v.items) out.push_back(parse_double(s));
    return out;
}

std::string as_word(const RawValue& v) {
    if (v.is_array || v.items.size() != 1) throw std::invalid_argument("expected a single word");
    return v.items[0];
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"n_tx", [](ExperimentConfig& c, const RawValue& v) { c.n_tx = as_int(v); }},
        {"n_rx", [](ExperimentConfig& c, const RawValue& v) { c.n_rx = as_int(v); }},
        {"block_length", [](ExperimentConfig& c, const RawValue& v) { c.block_length = as_int(v); }},
        {"users", [](ExperimentConfig& c, const RawValue& v) { c.users = as_int(v); }},
        {"max_lag", [](ExperimentConfig& c, const RawValue& v) { c.max_lag = as_int(v); }},
        {"p_total", [](ExperimentConfig& c, const RawValue& v) { c.p_total = as_real(v); }},
        {"noise_var", [](ExperimentConfig& c, const RawValue& v) { c.noise_var = as_real(v); }},
        {"gamma_db", [](ExperimentConfig& c, const RawValue& v) { c.gamma_db = as_reals(v); }},
        {"psk_order", [](ExperimentConfig& c, const RawValue& v) { c.psk_order = as_int(v); }},
        {"targets_deg", [](ExperimentConfig& c, const RawValue& v) { c.targets_deg = as_reals(v); }},
        {"beam_width_deg", [](ExperimentConfig& c, const RawValue& v) { c.beam_width_deg = as_real(v); }},
        {"grid_min_deg", [](ExperimentConfig& c, const RawValue& v) { c.grid_min_deg = as_real(v); }},
        {"grid_max_deg", [](ExperimentConfig& c, const RawValue& v) { c.grid_max_deg = as_real(v); }},
        {"grid_step_deg", [](ExperimentConfig& c, const RawValue& v) { c.grid_step_deg = as_real(v); }},
        {"spacing", [](ExperimentConfig& c, const RawValue& v) { c.spacing = as_real(v); }},
        {"w_bp", [](ExperimentConfig& c, const RawValue& v) { c.w_bp = as_real(v); }},
        {"w_ac", [](ExperimentConfig& c, const RawValue& v) { c.w_ac = as_real(v); }},
        {"w_cc", [](ExperimentConfig& c, const RawValue& v) { c.w_cc = as_real(v); }},
        {"weights",
         [](ExperimentConfig& c, const RawValue& v) {
             const auto w = as_reals(v);
             if (!v.is_array || w.size() != 3) throw std::invalid_argument("expected [w_bp, w_ac, w_cc]");
             c.w_bp = w[0];
             c.w_ac = w[1];
             c.w_cc = w[2];
         }},
        {"eps1", [](ExperimentConfig& c, const RawValue& v) { c.solver.eps1 = as_real(v); }},
        {"eps2", [](ExperimentConfig& c, const RawValue& v) { c.solver.eps2 = as_real(v); }},
        {"eps3", [](ExperimentConfig& c, const RawValue& v) { c.solver.eps3 = as_real(v); }},
        {"feas_tol", [](ExperimentConfig& c, const RawValue& v) { c.solver.feas_tol = as_real(v); }},
        {"max_outer_iters", [](ExperimentConfig& c, const RawValue& v) { c.solver.max_outer_iters = as_int(v); }},
        {"max_bisect_iters", [](ExperimentConfig& c, const RawValue& v) { c.solver.max_bisect_iters = as_int(v); }},
        {"max_sweeps", [](ExperimentConfig& c, const RawValue& v) { c.solver.max_sweeps = as_int(v); }},
        {"majorizer",
         [](ExperimentConfig& c, const RawValue& v) { c.solver.majorizer_kind = parse_majorizer_kind(as_word(v)); }},
        {"mode", [](ExperimentConfig& c, const RawValue& v) { c.solver.mode = parse_solve_mode(as_word(v)); }},
        {"seed",
         [](ExperimentConfig& c, const RawValue& v) {
             const std::string s = as_word(v);
             std::size_t pos = 0;
             const unsigned long long seed = std::stoull(s, &pos);
             if (pos != s.size() || s.front() == '-') throw std::invalid_argument("expected an unsigned integer");
             c.solver.seed = seed;
         }},
        {"output_dir", [](ExperimentConfig& c, const RawValue& v) { c.output_dir = as_word(v); }},
    };
    return table;
}

}  // namespace

ConfigParseResult parse_config(std::istream& in, const std::string& source_name) {
    ConfigParseResult result;
    std::vector<std::pair<std::string, RawValue>> entries;
    std::string preset;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto where = source_name + ":" + std::to_string(line_no) + ": ";
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back(where + "expected 'key = value'");
            continue;
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty()) {
            result.errors.push_back(where + "empty key or value");
            continue;
        }
        RawValue raw;
        raw.line = line_no;
        if (value.front() == '[') {
            if (value.back() != ']') {
                result.errors.push_back(where + key + ": unterminated array");
                continue;
            }
            raw.is_array = true;
            const std::string inner = value.substr(1, value.size() - 2);
            std::stringstream ss(inner);
            for (std::string item; std::getline(ss, item, ',');) {
                const std::string t = trim(item);
                if (!t.empty()) raw.items.push_back(t);
            }
        } else {
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
            raw.items.push_back(value);
        }
        if (key == "preset") {
            preset = raw.items.empty() ? "" : raw.items[0];
            if (preset != "full" && preset != "desk")
                result.errors.push_back(where + "preset: expected 'full' or 'desk'");
            continue;
        }
        entries.emplace_back(key, std::move(raw));
    }

    result.config = preset == "desk" ? ExperimentConfig::desk() : ExperimentConfig::full();
    for (const auto& [key, raw] : entries) {
        const auto where = source_name + ":" + std::to_string(raw.line) + ": ";
        const auto it = setters().find(key);
        if (it == setters().end()) {
            result.errors.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        try {
            it->second(result.config, raw);
        } catch (const std::exception& e) {
            result.errors.push_back(where + key + ": " + e.what());
        }
    }
    return result;
}

ConfigParseResult load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
    return parse_config(in, path.string());
}

// --------------------------------------------------------------------------
// Validation
// --------------------------------------------------------------------------

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> v;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };
    need(c.n_tx >= 1, "n_tx >= 1");
    need(c.n_rx >= 1, "n_rx >= 1");
    need(c.block_length >= 1, "block_length >= 1");
    need(c.users >= 1, "users >= 1");
    need(c.users <= c.n_tx, "K <= N_T: " + std::to_string(c.users) + " users cannot be served by " +
                                std::to_string(c.n_tx) + " transmit antennas");
    need(c.max_lag >= 1, "max_lag >= 1");
    need(c.max_lag - 1 <= c.block_length, "P-1 <= L: max_lag " + std::to_string(c.max_lag) +
                                              " exceeds block_length + 1 = " + std::to_string(c.block_length + 1));
    need(c.p_total > 0.0, "p_total > 0");
    need(c.noise_var > 0.0, "noise_var > 0");
    need(c.gamma_db.size() == 1 || static_cast<int>(c.gamma_db.size()) == c.users,
         "gamma_db must hold one value or one value per user");
    for (double g : c.gamma_db) need(std::isfinite(g), "gamma_db values must be finite");
    need(c.psk_order >= 2, "psk_order >= 2");
    need(!c.targets_deg.empty(), "at least one target angle");
    for (double t : c.targets_deg) need(t >= -90.0 && t <= 90.0, "target angles must lie in [-90, 90] degrees");
    need(c.beam_width_deg > 0.0, "beam_width_deg > 0");
    need(c.grid_step_deg > 0.0, "grid_step_deg > 0");
    need(c.grid_max_deg >= c.grid_min_deg, "grid_max_deg >= grid_min_deg");
    need(c.spacing > 0.0, "spacing > 0");
    need(c.w_bp >= 0.0 && c.w_ac >= 0.0 && c.w_cc >= 0.0, "weights must be nonnegative");
    need(c.w_bp > 0.0 || c.w_ac > 0.0 || c.w_cc > 0.0, "weights must not all be zero");
    need(c.solver.eps1 > 0.0 && c.solver.eps2 > 0.0, "eps1 and eps2 must be > 0");
    need(c.solver.eps3 >= 0.0, "eps3 must be >= 0");
    need(c.solver.feas_tol >= 0.0, "feas_tol must be >= 0");
    need(c.solver.max_outer_iters >= 1 && c.solver.max_bisect_iters >= 1 && c.solver.max_sweeps >= 1,
         "iteration caps must be >= 1");
    need(c.n_tx <= kMaxKernelNt, "n_tx <= " + std::to_string(kMaxKernelNt) + " (quartic kernel capacity)");
    need(!c.output_dir.empty(), "output_dir must not be empty");

    if (c.grid_step_deg > 0.0 && c.grid_max_deg >= c.grid_min_deg && c.beam_width_deg > 0.0 &&
        !c.targets_deg.empty()) {
        const AngleGrid grid = AngleGrid::uniform(c.grid_min_deg, c.grid_max_deg, c.grid_step_deg);
        bool any = false;
        const double half = c.beam_width_deg / 2.0;
        for (double th : grid.angles_deg())
            for (double tq : c.targets_deg) any = any || (th >= tq - half - 1e-12 && th <= tq + half + 1e-12);
        need(any, "desired beam pattern is zero on the whole grid (no grid angle inside any beam)");
    }
    return v;
}

std::vector<std::string> validate_config(const std::filesystem::path& path) {
    auto parsed = load_config(path);
    auto v = validate(parsed.config);
    parsed.errors.insert(parsed.errors.end(), v.begin(), v.end());
    return parsed.errors;
}

// --------------------------------------------------------------------------
// Instance construction
// --------------------------------------------------------------------------

Instance build_instance(const ExperimentConfig& c) {
    const auto problems = validate(c);
    if (!problems.empty()) throw std::invalid_argument("invalid config: " + problems.front());

    AngleGrid grid = AngleGrid::uniform(c.grid_min_deg, c.grid_max_deg, c.grid_step_deg);
    DesiredBeamPattern desired = DesiredBeamPattern::rectangular(grid, c.targets_deg, c.beam_width_deg);
    RadarScene scene(ArrayGeometry(c.n_tx, c.spacing), std::move(grid), std::move(desired),
                     TargetSet(c.targets_deg, c.max_lag), c.block_length);
    Instance inst{std::move(scene), Weights(c.w_bp, c.w_ac, c.w_cc), std::nullopt, std::nullopt, CVector()};

    // Channels and symbols are drawn even in radar-only mode so both modes share the instance.
    inst.comm.emplace(draw_channels(c.users, c.n_tx, c.solver.seed),
                      draw_symbols(c.users, c.block_length, c.psk_order, c.solver.seed), c.gamma_linear(),
                      c.noise_var, c.psk_order);
    inst.constraints.emplace(build_ci_constraints(*inst.comm, c.block_length));
    inst.x0 = default_initial_point(inst.scene, c.p_total, c.solver.seed);
    return inst;
}

int iterations_to_within(const std::vector<double>& trace, double fraction) {
    if (trace.empty()) return 0;
    const double target = (1.0 + fraction) * trace.back();
    for (std::size_t t = 0; t < trace.size(); ++t)
        if (trace[t] <= target) return static_cast<int>(t) + 1;
    return static_cast<int>(trace.size());
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.output_dir);
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0')
        return std::filesystem::path(root) / (dir.is_absolute() ? dir.filename() : dir);
    return dir;
}

// --------------------------------------------------------------------------
// Artifacts
// --------------------------------------------------------------------------

namespace {

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    body(out);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

nlohmann::json config_json(const ExperimentConfig& c) {
    return {
        {"n_tx", c.n_tx},
        {"n_rx", c.n_rx},
        {"block_length", c.block_length},
        {"users", c.users},
        {"max_lag", c.max_lag},
        {"p_total", c.p_total},
        {"noise_var", c.noise_var},
        {"gamma_db", c.gamma_db},
        {"psk_order", c.psk_order},
        {"targets_deg", c.targets_deg},
        {"beam_width_deg", c.beam_width_deg},
        {"grid_min_deg", c.grid_min_deg},
        {"grid_max_deg", c.grid_max_deg},
        {"grid_step_deg", c.grid_step_deg},
        {"spacing", c.spacing},
        {"weights", {c.w_bp, c.w_ac, c.w_cc}},
        {"eps1", c.solver.eps1},
        {"eps2", c.solver.eps2},
        {"eps3", c.solver.eps3},
        {"feas_tol", c.solver.feas_tol},
        {"max_outer_iters", c.solver.max_outer_iters},
        {"max_bisect_iters", c.solver.max_bisect_iters},
        {"max_sweeps", c.solver.max_sweeps},
        {"majorizer", std::string(to_string(c.solver.majorizer_kind))},
        {"mode", std::string(to_string(c.solver.mode))},
        {"seed", c.solver.seed},
        {"output_dir", c.output_dir},
    };
}

}  // namespace

void write_beampattern_csv(std::ostream& out, const CVector& x, const RadarScene& scene) {
    const RVector g = pattern_on_grid(x, scene);
    const double alpha = optimal_alpha(x, scene);
    out << "theta_deg,pattern,scaled_desired\n";
    for (int u = 0; u < scene.n_angles(); ++u)
        out << format_double(scene.grid().angles_deg()[u]) << ',' << format_double(g[u]) << ','
            << format_double(alpha * scene.desired().values()[u]) << '\n';
}

void write_autocorr_csv(std::ostream& out, const CVector& x, const RadarScene& scene, int q) {
    const CMatrix X = mat(x, scene.n_tx(), scene.block_length());
    const auto a = scene.target_steering().col(q);
    const double peak = correlation(X, 0, a, a);
    const int L = scene.block_length();
    out << "tau,chi_db\n";
    for (int tau = -L + 1; tau <= L - 1; ++tau)
        out << tau << ',' << format_double(to_db(correlation(X, tau, a, a) / peak)) << '\n';
}

void write_crosscorr_csv(std::ostream& out, const CVector& x, const RadarScene& scene, int q, int qp) {
    const CMatrix X = mat(x, scene.n_tx(), scene.block_length());
    const auto a = scene.target_steering().col(q);
    const auto b = scene.target_steering().col(qp);
    const double norm = std::sqrt(correlation(X, 0, a, a) * correlation(X, 0, b, b));
    const int L = scene.block_length();
    out << "tau,chi_db\n";
    for (int tau = -L + 1; tau <= L - 1; ++tau)
        out << tau << ',' << format_double(to_db(correlation(X, tau, a, b) / norm)) << '\n';
}

void write_convergence_csv(std::ostream& out, const SolverState& state) {
    out << "iteration,objective\n";
    out << 0 << ',' << format_double(state.initial_objective) << '\n';
    for (std::size_t t = 0; t < state.objective_trace.size(); ++t)
        out << t + 1 << ',' << format_double(state.objective_trace[t]) << '\n';
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    const Instance inst = build_instance(cfg);
    const bool dfrc_mode = cfg.solver.mode == SolveMode::dfrc;

    RunOutcome outcome;
    outcome.directory = out_dir;
    outcome.state = mm_solve(inst.scene, dfrc_mode ? &*inst.constraints : nullptr, inst.weights, cfg.solver, inst.x0,
                             cfg.p_total);
    const SolverState& st = outcome.state;
    outcome.terms = objective_terms(st.x, inst.scene);

    std::filesystem::create_directories(out_dir);
    save_waveform(WaveformMatrix::from_vec(st.x, cfg.n_tx, cfg.block_length, cfg.p_total, true),
                  out_dir / "waveform.txt");
    write_file(out_dir / "beampattern.csv", [&](std::ostream& o) { write_beampattern_csv(o, st.x, inst.scene); });
    const int Q = inst.scene.n_targets();
    for (int q = 0; q < Q; ++q) {
        write_file(out_dir / ("autocorr_" + std::to_string(q + 1) + ".csv"),
                   [&](std::ostream& o) { write_autocorr_csv(o, st.x, inst.scene, q); });
        for (int qp = q + 1; qp < Q; ++qp)
            write_file(out_dir / ("crosscorr_" + std::to_string(q + 1) + "_" + std::to_string(qp + 1) + ".csv"),
                       [&](std::ostream& o) { write_crosscorr_csv(o, st.x, inst.scene, q, qp); });
    }
    write_file(out_dir / "convergence.csv", [&](std::ostream& o) { write_convergence_csv(o, st); });

    nlohmann::json summary;
    summary["final_objective"] = st.objective_trace.empty() ? st.initial_objective : st.objective_trace.back();
    summary["initial_objective"] = st.initial_objective;
    summary["terms"] = {{"beampattern", outcome.terms.bp}, {"autocorr_isl", outcome.terms.ac},
                        {"crosscorr_isl", outcome.terms.cc}};
    summary["outer_iterations"] = st.outer_iterations;
    summary["sweeps"] = st.sweeps;
    summary["bisection_evaluations"] = st.bisection_evaluations;
    summary["safeguarded_steps"] = st.safeguarded_steps;
    summary["objective_converged"] = st.objective_converged;
    summary["termination"] = std::string(to_string(st.termination));
    summary["warnings"] = st.warnings;
    summary["seed"] = cfg.solver.seed;
    if (dfrc_mode) {
        const RVector margins = ci_margin(st.x, *inst.constraints);
        const KktReport kkt = kkt_report(st.x, st.nu, *inst.constraints);
        summary["min_ci_margin"] = margins.minCoeff();
        summary["kkt_residual"] = {{"complementarity", kkt.complementarity}, {"max_violation", kkt.max_violation}};
    } else {
        summary["min_ci_margin"] = nullptr;
        summary["kkt_residual"] = nullptr;
    }
    summary["config"] = config_json(cfg);
    write_file(out_dir / "summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });

    if (st.termination == Termination::non_finite)
        outcome.exit_code = ExitCode::runtime_error;
    else if (!st.warnings.empty())
        outcome.exit_code = ExitCode::warnings;
    return outcome;
}

ComparisonOutcome compare_majorizers(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    const Instance inst = build_instance(cfg);
    const bool dfrc_mode = cfg.solver.mode == SolveMode::dfrc;
    const CIConstraintSet* constraints = dfrc_mode ? &*inst.constraints : nullptr;

    SolverConfig solver = cfg.solver;
    solver.eps3 = 0.0;

    ComparisonOutcome out;
    out.directory = out_dir;
    solver.majorizer_kind = MajorizerKind::diagonal;
    out.diagonal = mm_solve(inst.scene, constraints, inst.weights, solver, inst.x0, cfg.p_total);
    solver.majorizer_kind = MajorizerKind::max_eigen;
    out.max_eigen = mm_solve(inst.scene, constraints, inst.weights, solver, inst.x0, cfg.p_total);
    out.diagonal_iters_to_5pct = iterations_to_within(out.diagonal.objective_trace, 0.05);
    out.max_eigen_iters_to_5pct = iterations_to_within(out.max_eigen.objective_trace, 0.05);

    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "convergence_diagonal.csv", [&](std::ostream& o) { write_convergence_csv(o, out.diagonal); });
    write_file(out_dir / "convergence_max_eigen.csv",
               [&](std::ostream& o) { write_convergence_csv(o, out.max_eigen); });

    auto run_json = [](const SolverState& s, int to5) {
        return nlohmann::json{{"final_objective", s.objective_trace.empty() ? s.initial_objective
                                                                            : s.objective_trace.back()},
                              {"outer_iterations", s.outer_iterations},
                              {"iterations_to_within_5pct", to5},
                              {"termination", std::string(to_string(s.termination))},
                              {"warnings", s.warnings}};
    };
    nlohmann::json j;
    j["diagonal"] = run_json(out.diagonal, out.diagonal_iters_to_5pct);
    j["max_eigen"] = run_json(out.max_eigen, out.max_eigen_iters_to_5pct);
    j["initial_objective"] = out.diagonal.initial_objective;
    j["seed"] = cfg.solver.seed;
    j["config"] = config_json(cfg);
    write_file(out_dir / "comparison.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });

    const bool non_finite = out.diagonal.termination == Termination::non_finite ||
                            out.max_eigen.termination == Termination::non_finite;
    if (non_finite)
        out.exit_code = ExitCode::runtime_error;
    else if (!out.diagonal.warnings.empty() || !out.max_eigen.warnings.empty())
        out.exit_code = ExitCode::warnings;
    return out;
}

}  // namespace dfrc
