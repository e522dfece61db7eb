#include <iostream>

#include <CLI11.hpp>

#include "marchenko/error.hpp"
#include "marchenko/runner.hpp"

using namespace marchenko;

int main(int argc, char** argv) {
    CLI::App app{"Fredholm-equation solver for matrix NLS / mKdV / KdV families"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    int threads = 1;
    int levels = 3;

    auto* solve = app.add_subcommand("solve", "evaluate the solution field and write output tables");
    solve->add_option("scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
    solve->add_option("--out", out_dir, "output directory")->capture_default_str();
    solve->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    auto* study = app.add_subcommand("study", "refinement study with fitted order");
    study->add_option("scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
    study->add_option("--levels", levels, "refinement levels (>= 3)")->required();
    study->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("verify", "identity and residual checks only");
    check->add_option("scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
    check->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_clean : exit_failure;
    }

    try {
        const Scenario s = parse_scenario(scenario_path);
        if (solve->parsed()) {
            const RunSummary r = run(s, out_dir, threads);
            for (const auto& w : r.result.warnings) std::cerr << "warning: " << w << '\n';
            for (const auto& e : r.result.patch.events)
                std::cerr << "patch: |det2| = " << std::abs(e.det2) << " at x = " << e.x << ", t = " << e.t
                          << (e.located ? " (located between samples)" : " (sample skipped)") << '\n';
            for (const auto& nr : r.residuals)
                if (nr.evaluated)
                    std::cout << "residual " << nr.name << ": max " << nr.report.max_norm << ", l2 "
                              << nr.report.l2_norm << '\n';
            std::cout << "wrote " << r.files.size() << " files to " << out_dir << '\n';
            return r.exit_code;
        }
        if (study->parsed()) {
            const StudyReport r = convergence_study(s, levels, threads);
            print_study(std::cout, r);
            return r.skipped ? exit_patch : exit_clean;
        }
        const VerifyReport r = verify(s, threads);
        print_verify(std::cout, r);
        return r.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
}
