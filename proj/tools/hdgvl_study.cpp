#include "hdgvl/cli.hpp"
#include "hdgvl/hdgvl.hpp"

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    const hdgvl::ParseResult parsed = hdgvl::parse_args(argc, argv);
    if (!parsed.config) {
        (parsed.exit_code == hdgvl::kExitOk ? std::cout : std::cerr) << parsed.message;
        return parsed.exit_code;
    }
    for (const auto& w : parsed.warnings) std::cerr << w << '\n';
    const hdgvl::StudyConfig& cfg = *parsed.config;

    std::vector<hdgvl::ConvergenceRecord> records;
    try {
        records = hdgvl::run_convergence_study(cfg);
    } catch (const hdgvl::ConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << " (final relative residual " << e.final_residual() << ")\n";
        return hdgvl::kExitSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return hdgvl::kExitSolverFailure;
    }

    if (cfg.output_path.empty()) {
        hdgvl::write_table(records, cfg.format, std::cout);
        return hdgvl::kExitOk;
    }
    std::ofstream os(cfg.output_path);
    if (!os) {
        std::cerr << "cannot open " << cfg.output_path << '\n';
        return hdgvl::kExitSolverFailure;
    }
    hdgvl::write_table(records, cfg.format, os);
    return hdgvl::kExitOk;
}
