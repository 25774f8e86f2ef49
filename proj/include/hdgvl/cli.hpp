#pragma once

#include "hdgvl/errors.hpp"
#include "hdgvl/study.hpp"

#include <CLI11.hpp>

#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace hdgvl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitUsage = 2;

struct ParseResult {
    std::optional<StudyConfig> config; // empty when the program should exit right away
    int exit_code = kExitOk;
    std::string message;               // usage/help text or diagnostic
    std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<int> parse_degree_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ParameterError("bad degree '" + item + "' in --k");
        }
        if (used != item.size()) throw ParameterError("bad degree '" + item + "' in --k");
        out.push_back(v);
    }
    if (out.empty()) throw ParameterError("--k needs at least one degree");
    return out;
}

inline std::pair<int, int> parse_level_range(const std::string& text) {
    const auto colon = text.find(':');
    const std::string lo = colon == std::string::npos ? text : text.substr(0, colon);
    const std::string hi = colon == std::string::npos ? text : text.substr(colon + 1);
    try {
        std::size_t u1 = 0, u2 = 0;
        const int a = std::stoi(lo, &u1);
        const int b = std::stoi(hi, &u2);
        if (u1 != lo.size() || u2 != hi.size()) throw ParameterError("");
        return {a, b};
    } catch (const std::exception&) {
        throw ParameterError("bad level range '" + text + "', expected <min:max>");
    }
}

} // namespace detail

inline ParseResult parse_args(int argc, const char* const* argv) {
    CLI::App app{"HDG convergence study for the 2D vector Laplacian"};
    app.name("hdgvl_study");

    int experiment = 1;
    std::string elements = "tri";
    int hybridization = 3;
    std::string degrees = "1";
    std::string levels = "1:4";
    double alpha = 1.0;
    double tau = 1.0;
    std::string solver = "auto";
    double tol = 1e-12;
    std::string format = "csv";
    std::string out;
    std::string dump;
    bool allow_high = false;

    app.add_option("--experiment", experiment, "manufactured case")->check(CLI::IsMember({1, 2, 3}));
    app.add_option("--elements", elements, "element shape")->check(CLI::IsMember({"tri", "quad"}));
    app.add_option("--hybridization", hybridization, "1, 2 or 3")->check(CLI::IsMember({1, 2, 3}));
    app.add_option("--k", degrees, "comma separated polynomial degrees");
    app.add_option("--levels", levels, "refinement levels min:max");
    app.add_option("--alpha", alpha, "tangential stabilization")->check(CLI::PositiveNumber);
    app.add_option("--tau", tau, "normal stabilization")->check(CLI::PositiveNumber);
    app.add_option("--solver", solver, "global solver (auto: cholesky for type 3, lu otherwise)")
        ->check(CLI::IsMember({"auto", "cholesky", "lu", "cg"}));
    app.add_option("--tol", tol, "relative residual tolerance")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "md"}));
    app.add_option("--out", out, "output file (default stdout)");
    app.add_option("--dump-matrix", dump, "write the last global matrix as 'i j value' lines");
    app.add_flag("--allow-high-degree", allow_high, "accept degrees above the soft limit");

    ParseResult result;
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        result.message = app.help();
        result.exit_code = kExitOk;
        return result;
    } catch (const CLI::ParseError& e) {
        result.message = std::string(e.what()) + "\n" + app.help();
        result.exit_code = kExitUsage;
        return result;
    }

    StudyConfig cfg;
    try {
        cfg.experiment = experiment_from_int(experiment);
        cfg.element_kind = elements == "tri" ? ElementKind::Triangle : ElementKind::Square;
        cfg.hybridization = static_cast<Hybridization>(hybridization - 1);
        cfg.degrees = detail::parse_degree_list(degrees);
        std::tie(cfg.level_min, cfg.level_max) = detail::parse_level_range(levels);
        cfg.params.alpha = alpha;
        cfg.params.tau = tau;
        if (solver == "cholesky")
            cfg.solver.choice = SolverChoice::Cholesky;
        else if (solver == "lu")
            cfg.solver.choice = SolverChoice::LU;
        else if (solver == "cg")
            cfg.solver.choice = SolverChoice::ConjugateGradient;
        cfg.solver.tolerance = tol;
        cfg.format = format == "md" ? OutputFormat::Markdown : OutputFormat::Csv;
        cfg.output_path = out;
        cfg.dump_matrix_path = dump;
        cfg.allow_high_degree = allow_high;
        for (int k : cfg.degrees)
            if (k > kDefaultMaxDegree)
                result.warnings.push_back("warning: degree " + std::to_string(k) + " is above the soft limit " +
                                          std::to_string(kDefaultMaxDegree));
        cfg.validate();
    } catch (const ParameterError& e) {
        result.message = std::string("error: ") + e.what() + "\n" + app.help();
        result.exit_code = kExitUsage;
        return result;
    }
    result.config = cfg;
    return result;
}

inline ParseResult parse_args(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"hdgvl_study"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_args(static_cast<int>(argv.size()), argv.data());
}

} // namespace hdgvl
