#pragma once

// Batch experiment front-end: config parsing and validation, instance
// construction from a seed, solver runs and artifact writers.
//
// Config grammar (one setting per line):
//   key = value          scalars: integers, reals, bare words
//   key = [v1, v2, ...]  arrays
//   # ...                comment to end of line
// An optional `preset = full | desk` line selects the base values that the
// remaining keys override, regardless of where it appears.

#include "dfrc/comm_ci.hpp"
#include "dfrc/core.hpp"
#include "dfrc/dual_solver.hpp"
#include "dfrc/radar_metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dfrc {

/// Environment variable that, when set, becomes the root for output directories.
inline constexpr const char* kOutputRootEnv = "DFRC_OUTPUT_ROOT";

struct ExperimentConfig {
    int n_tx = 10;
    int n_rx = 10;  // recorded for completeness; no operation uses it
    int block_length = 64;
    int users = 3;
    int max_lag = 16;
    double p_total = 1.0;
    double noise_var = 0.01;
    std::vector<double> gamma_db{6.0};  // one value broadcast to all users, or one per user
    int psk_order = 4;
    std::vector<double> targets_deg{-30.0, 40.0};
    double beam_width_deg = 20.0;
    double grid_min_deg = -90.0;
    double grid_max_deg = 90.0;
    double grid_step_deg = 1.0;
    double spacing = 0.5;
    double w_bp = 1.0;
    double w_ac = 2.0;
    double w_cc = 2.0;
    SolverConfig solver;
    std::string output_dir = "dfrc_out";

    /// Full-size simulation parameters (K=3, N_T=10, L=64, P=16).
    static ExperimentConfig full();
    /// Small instance for fast runs (N_T=4, L=8, K=2, P=4).
    static ExperimentConfig desk();

    std::vector<double> gamma_linear() const;
};

/// Parse failures are reported as a list of messages (line-numbered).
struct ConfigParseResult {
    ExperimentConfig config;
    std::vector<std::string> errors;
};

ConfigParseResult parse_config(std::istream& in, const std::string& source_name = "<config>");
ConfigParseResult load_config(const std::filesystem::path& path);

/// Every violated precondition; empty when the config is runnable.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// Parse + validate. Throws std::runtime_error if the file cannot be read.
std::vector<std::string> validate_config(const std::filesystem::path& path);

struct Instance {
    RadarScene scene;
    Weights weights;
    std::optional<CommSetup> comm;
    std::optional<CIConstraintSet> constraints;
    CVector x0;
};

/// Builds the scene, seeded channels/symbols and the seeded initial point.
/// The config must validate cleanly.
Instance build_instance(const ExperimentConfig& cfg);

/// Smallest 1-based t with trace[t-1] <= (1 + fraction) * trace.back(), 0 for an empty trace.
int iterations_to_within(const std::vector<double>& trace, double fraction);

enum class ExitCode : int { ok = 0, config_error = 1, runtime_error = 2, warnings = 3 };

struct RunOutcome {
    SolverState state;
    ObjectiveTerms terms;
    std::filesystem::path directory;
    ExitCode exit_code = ExitCode::ok;
};

/// Resolves the artifact directory from the config and kOutputRootEnv.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Solve and write waveform.txt, beampattern.csv, autocorr_<q>.csv,
/// crosscorr_<q>_<q'>.csv, convergence.csv and summary.json into `out_dir`.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct ComparisonOutcome {
    SolverState diagonal;
    SolverState max_eigen;
    int diagonal_iters_to_5pct = 0;
    int max_eigen_iters_to_5pct = 0;
    std::filesystem::path directory;
    ExitCode exit_code = ExitCode::ok;
};

/// Runs both majorizers on the identical instance for the full max_outer_iters
/// budget (the relative-change stop is disabled so both traces share a length)
/// and writes convergence_diagonal.csv, convergence_max_eigen.csv and comparison.json.
ComparisonOutcome compare_majorizers(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Artifact writers, exposed for tests.
void write_beampattern_csv(std::ostream& out, const CVector& x, const RadarScene& scene);
/// chi_{tau,q,q} / chi_{0,q,q} in dB for tau in [-(L-1), L-1].
void write_autocorr_csv(std::ostream& out, const CVector& x, const RadarScene& scene, int q);
/// chi_{tau,q,q'} / sqrt(chi_{0,q,q} chi_{0,q',q'}) in dB for tau in [-(L-1), L-1].
void write_crosscorr_csv(std::ostream& out, const CVector& x, const RadarScene& scene, int q, int qp);
void write_convergence_csv(std::ostream& out, const SolverState& state);

}  // namespace dfrc
