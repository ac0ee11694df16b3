// dfrc: design constant-modulus DFRC waveforms from a config file.
//
//   dfrc run <config> [--out DIR]
//   dfrc validate <config>
//   dfrc compare-majorizers <config> [--out DIR]
//
// Exit codes: 0 success, 1 config error, 2 runtime error, 3 completed with warnings.

#include "dfrc/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using dfrc::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

// Parses and validates; prints every problem. Returns nullopt on failure.
std::optional<dfrc::ExperimentConfig> load_valid(const std::string& path) {
    std::vector<std::string> problems;
    dfrc::ConfigParseResult parsed;
    try {
        parsed = dfrc::load_config(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return std::nullopt;
    }
    problems = parsed.errors;
    const auto v = dfrc::validate(parsed.config);
    problems.insert(problems.end(), v.begin(), v.end());
    if (!problems.empty()) {
        std::cerr << "invalid config '" << path << "':\n";
        for (const auto& p : problems) std::cerr << "  - " << p << '\n';
        return std::nullopt;
    }
    return parsed.config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constant-modulus DFRC waveform design"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Solve one instance and write its artifacts");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", out_dir, "Artifact directory (overrides output_dir and $DFRC_OUTPUT_ROOT)");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Config file")->required();

    auto* compare = app.add_subcommand("compare-majorizers", "Run the diagonal and max-eigenvalue majorizers");
    compare->add_option("config", config_path, "Config file")->required();
    compare->add_option("--out", out_dir, "Artifact directory (overrides output_dir and $DFRC_OUTPUT_ROOT)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : code(ExitCode::config_error);
    }

    if (validate->parsed()) {
        std::vector<std::string> problems;
        try {
            problems = dfrc::validate_config(config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return code(ExitCode::config_error);
        }
        if (problems.empty()) {
            std::cout << "ok\n";
            return code(ExitCode::ok);
        }
        for (const auto& p : problems) std::cout << p << '\n';
        return code(ExitCode::config_error);
    }

    const auto cfg = load_valid(config_path);
    if (!cfg) return code(ExitCode::config_error);
    const std::filesystem::path dir = out_dir.empty() ? dfrc::resolve_output_dir(*cfg) : std::filesystem::path(out_dir);

    try {
        if (run->parsed()) {
            const auto r = dfrc::run_experiment(*cfg, dir);
            const auto& st = r.state;
            std::cout << "termination: " << dfrc::to_string(st.termination) << '\n'
                      << "outer iterations: " << st.outer_iterations << '\n'
                      << "final objective: "
                      << (st.objective_trace.empty() ? st.initial_objective : st.objective_trace.back()) << '\n'
                      << "artifacts: " << r.directory.string() << '\n';
            for (const auto& w : st.warnings) std::cerr << "warning: " << w << '\n';
            return code(r.exit_code);
        }
        const auto c = dfrc::compare_majorizers(*cfg, dir);
        std::cout << "diagonal:  final " << c.diagonal.objective_trace.back() << ", within 5% after "
                  << c.diagonal_iters_to_5pct << " iterations\n"
                  << "max_eigen: final " << c.max_eigen.objective_trace.back() << ", within 5% after "
                  << c.max_eigen_iters_to_5pct << " iterations\n"
                  << "artifacts: " << c.directory.string() << '\n';
        return code(c.exit_code);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return code(ExitCode::runtime_error);
    }
}
