#pragma once

#include "hdgvl/basis.hpp"
#include "hdgvl/hybrid_system.hpp"
#include "hdgvl/local_solver.hpp"
#include "hdgvl/mesh.hpp"

#include <vector>

namespace hdgvl {

/// Default quadrature exactness for local assembly and for error/load integrals.
inline constexpr int assembly_exactness(int k) { return 2 * k + 2; }
inline constexpr int error_exactness(int k) { return 2 * k + 6; }

struct DiscretizationOptions {
    int degree = 1;
    StabilizationParams params;
    Hybridization hybridization = Hybridization::TypeIII;
    BoundaryKind boundary = BoundaryKind::Dirichlet;
};

/// Bases, factorized local operators and dof map for one (mesh, k, params, hybridization,
/// boundary kind). Independent of the source term.
struct Discretization {
    const Mesh* mesh = nullptr;
    DiscretizationOptions options;
    std::vector<ElementBasis> bases;
    std::vector<LocalOperators> local;
    DofMap dofmap;
};

inline Discretization discretize(const Mesh& mesh, const DiscretizationOptions& opts) {
    Discretization disc;
    disc.mesh = &mesh;
    disc.options = opts;
    const int exactness = assembly_exactness(opts.degree);
    disc.bases.reserve(static_cast<std::size_t>(mesh.num_elements()));
    disc.local.reserve(static_cast<std::size_t>(mesh.num_elements()));
    for (const Element& e : mesh.elements()) {
        disc.bases.push_back(build_element_basis(mesh, e.id, opts.degree, exactness));
        disc.local.push_back(assemble_local_system(mesh, e.id, disc.bases.back(), opts.params, opts.hybridization));
    }
    disc.dofmap = build_trace_dofmap(mesh, opts.degree, opts.hybridization, opts.boundary);
    return disc;
}

/// (f, z_j)_K on every element, integrated with the error-quadrature exactness.
inline std::vector<Eigen::VectorXd> element_load_moments(const Discretization& disc, const VectorField& f) {
    std::vector<Eigen::VectorXd> loads;
    const Mesh& mesh = *disc.mesh;
    loads.reserve(static_cast<std::size_t>(mesh.num_elements()));
    for (const Element& e : mesh.elements()) {
        const QuadratureRule rule = element_quadrature(e, error_exactness(disc.options.degree));
        loads.push_back(load_moments(disc.bases[static_cast<std::size_t>(e.id)], rule, f));
    }
    return loads;
}

struct HdgSolution {
    GlobalSystem system;
    DenseVector traces;
    SolutionFields fields;
};

inline HdgSolution solve_hdg(const Discretization& disc, const std::vector<Eigen::VectorXd>& loads,
                             const SolverOptions& solver = {}) {
    HdgSolution sol;
    sol.system = assemble_global(*disc.mesh, disc.local, disc.dofmap, loads);
    sol.traces = solve_global(sol.system, solver);
    sol.fields = reconstruct_fields(*disc.mesh, sol.traces, disc.dofmap, disc.local, loads);
    return sol;
}

inline HdgSolution solve_hdg(const Discretization& disc, const VectorField& f, const SolverOptions& solver = {}) {
    return solve_hdg(disc, element_load_moments(disc, f), solver);
}

} // namespace hdgvl
