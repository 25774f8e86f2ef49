#pragma once

#include "hdgvl/errors.hpp"
#include "hdgvl/hybrid_system.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/pipeline.hpp"
#include "hdgvl/verify.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hdgvl {

enum class OutputFormat { Csv, Markdown };

inline constexpr int kDefaultMaxDegree = 3;
inline constexpr int kHardMaxDegree = 12; // keeps 2k+6 within the tabulated Gauss rules

struct StudyConfig {
    ExperimentId experiment = ExperimentId::Exp1Electric;
    ElementKind element_kind = ElementKind::Triangle;
    Hybridization hybridization = Hybridization::TypeIII;
    std::vector<int> degrees{1};
    int level_min = 1;
    int level_max = 4;
    StabilizationParams params;
    SolverOptions solver;
    std::string output_path; // empty: stdout
    OutputFormat format = OutputFormat::Csv;
    std::string dump_matrix_path;
    bool allow_high_degree = false;

    void validate() const {
        params.validate();
        if (degrees.empty()) throw ParameterError("at least one degree is required");
        for (int k : degrees) {
            if (k < 0) throw ParameterError("degree must be nonnegative");
            if (k > kHardMaxDegree)
                throw ParameterError("degree " + std::to_string(k) + " exceeds the supported maximum");
            if (k > kDefaultMaxDegree && !allow_high_degree)
                throw ParameterError("degree " + std::to_string(k) + " is above the soft limit " +
                                     std::to_string(kDefaultMaxDegree) + "; pass --allow-high-degree");
        }
        if (level_min < kMinMeshLevel || level_max > kMaxMeshLevel || level_min > level_max)
            throw ParameterError("levels must satisfy " + std::to_string(kMinMeshLevel) + " <= min <= max <= " +
                                 std::to_string(kMaxMeshLevel));
        if (!(solver.tolerance > 0.0)) throw ParameterError("solver tolerance must be positive");
    }
};

/// One solve of a manufactured case: errors plus the assembled system.
struct CaseResult {
    ErrorReport errors;
    HdgSolution solution;
};

inline CaseResult solve_manufactured(const Mesh& mesh, const ManufacturedSolution& exact, int k,
                                     const StabilizationParams& params, Hybridization hyb,
                                     const SolverOptions& solver = {}) {
    DiscretizationOptions opts;
    opts.degree = k;
    opts.params = params;
    opts.hybridization = hyb;
    opts.boundary = exact.boundary;
    const Discretization disc = discretize(mesh, opts);
    CaseResult r;
    r.solution = solve_hdg(disc, exact.f, solver);
    r.errors = compute_errors(r.solution.fields.elements, exact, mesh, disc.bases, error_exactness(k));
    return r;
}

/// Runs every (k, level) of the study; one record per degree in the given order, levels coarse
/// to fine. If a dump path is set, the system of the last solve is written there.
inline std::vector<ConvergenceRecord> run_convergence_study(const StudyConfig& cfg) {
    cfg.validate();
    const ManufacturedSolution exact = manufactured_case(cfg.experiment);
    std::vector<ConvergenceRecord> records;
    std::optional<GlobalSystem> last_system;
    for (int k : cfg.degrees) {
        ConvergenceRecord rec;
        rec.degree = k;
        for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
            const Mesh mesh = build_structured_mesh(level, cfg.element_kind);
            CaseResult r = solve_manufactured(mesh, exact, k, cfg.params, cfg.hybridization, cfg.solver);
            rec.levels.push_back({level, mesh.h_reported(), r.errors, {}});
            if (!cfg.dump_matrix_path.empty()) last_system = std::move(r.solution.system);
        }
        compute_rates(rec);
        records.push_back(std::move(rec));
    }
    if (last_system) {
        std::ofstream os(cfg.dump_matrix_path);
        if (!os) throw ParameterError("cannot open matrix dump file " + cfg.dump_matrix_path);
        write_matrix_coordinates(*last_system, os);
    }
    return records;
}

namespace detail {

inline std::string format_number(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace detail

inline void write_csv(const std::vector<ConvergenceRecord>& records, std::ostream& os) {
    os << "k,level,h,e_sigma,eoc_sigma,e_u,eoc_u,e_phi,eoc_phi,e_sigma_check,eoc_sigma_check,e_phi_hat,eoc_phi_hat\n";
    for (const auto& rec : records) {
        for (const auto& row : rec.levels) {
            os << rec.degree << ',' << row.level << ',' << detail::format_number("%.17g", row.h);
            const auto errs = row.errors.in_table_order();
            for (std::size_t q = 0; q < errs.size(); ++q) {
                os << ',' << detail::format_number("%.17g", errs[q]) << ',';
                if (row.rates[q]) os << detail::format_number("%.17g", *row.rates[q]);
            }
            os << '\n';
        }
    }
}

inline void write_markdown(const std::vector<ConvergenceRecord>& records, std::ostream& os) {
    bool first = true;
    for (const auto& rec : records) {
        if (!first) os << '\n';
        first = false;
        os << "k = " << rec.degree << "\n\n";
        os << "| h | e_sigma | eoc | e_u | eoc | e_phi | eoc | e_sigma_check | eoc | e_phi_hat | eoc |\n";
        os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& row : rec.levels) {
            os << "| " << detail::format_number("%.2e", row.h);
            const auto errs = row.errors.in_table_order();
            for (std::size_t q = 0; q < errs.size(); ++q) {
                os << " | " << detail::format_number("%.2e", errs[q]) << " | ";
                os << (row.rates[q] ? detail::format_number("%.2f", *row.rates[q]) : std::string("-"));
            }
            os << " |\n";
        }
    }
}

inline void write_table(const std::vector<ConvergenceRecord>& records, OutputFormat format, std::ostream& os) {
    if (format == OutputFormat::Csv)
        write_csv(records, os);
    else
        write_markdown(records, os);
}

} // namespace hdgvl
