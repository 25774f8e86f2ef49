#pragma once

#include "hdgvl/errors.hpp"
#include "hdgvl/linalg.hpp"
#include "hdgvl/local_solver.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/types.hpp"

#include <array>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace hdgvl {

/// Trace field 0 is the tangential unknown (u_check . t or sigma_check), field 1 the normal one
/// (u_hat . n or phi_hat), following the active hybridization.
inline constexpr int kTangentialField = 0;
inline constexpr int kNormalField = 1;

/// Whether a boundary face carries an essential zero on the given trace field. A field is
/// constrained when the boundary table prescribes it directly; otherwise the boundary face
/// stays in the weak flux equation and the prescribed complementary trace is imposed weakly.
inline constexpr bool is_essential_on_boundary(int field, Hybridization hyb, BoundaryKind bc) {
    const TraceModes modes = trace_modes(hyb);
    if (field == kTangentialField) {
        // u_check . n_perp = 0 for electric/dirichlet, sigma_check = 0 for magnetic
        return modes.tangential == TraceMode::Displacement ? bc != BoundaryKind::Magnetic
                                                           : bc == BoundaryKind::Magnetic;
    }
    // u_hat . n = 0 for magnetic/dirichlet, phi_hat = 0 for electric
    return modes.normal == TraceMode::Displacement ? bc != BoundaryKind::Electric : bc == BoundaryKind::Electric;
}

/// Global skeleton unknowns for one hybridization and boundary kind. Vector-trace fields are
/// stored in the global face orientation (u_check . t, u_hat . n_F); scalar-flux fields need no
/// orientation.
struct DofMap {
    Hybridization hybridization = Hybridization::TypeIII;
    BoundaryKind boundary = BoundaryKind::Dirichlet;
    int degree = 0;
    int num_dofs = 0;
    /// First global index of each (face, field) block of k+1 moments; -1 when constrained.
    std::vector<std::array<int, 2>> face_offsets;
    /// Constrained (face, field) pairs.
    std::vector<std::pair<int, int>> constrained;
    /// Per element and local trace slot: global dof (-1 if constrained) and orientation sign.
    std::vector<std::vector<int>> element_dofs;
    std::vector<std::vector<double>> element_signs;

    int face_dofs() const { return degree + 1; }
};

inline DofMap build_trace_dofmap(const Mesh& mesh, int k, Hybridization hyb, BoundaryKind bc) {
    if (k < 0) throw ParameterError("polynomial degree must be nonnegative");
    DofMap map;
    map.hybridization = hyb;
    map.boundary = bc;
    map.degree = k;
    const int nd = k + 1;
    const TraceModes modes = trace_modes(hyb);

    map.face_offsets.resize(static_cast<std::size_t>(mesh.num_faces()));
    int next = 0;
    for (const Face& f : mesh.faces()) {
        for (int field = 0; field < 2; ++field) {
            int& offset = map.face_offsets[static_cast<std::size_t>(f.id)][static_cast<std::size_t>(field)];
            if (f.is_boundary && is_essential_on_boundary(field, hyb, bc)) {
                offset = -1;
                map.constrained.emplace_back(f.id, field);
            } else {
                offset = next;
                next += nd;
            }
        }
    }
    map.num_dofs = next;

    const std::array<bool, 2> oriented{modes.tangential == TraceMode::Displacement,
                                       modes.normal == TraceMode::Displacement};
    map.element_dofs.resize(static_cast<std::size_t>(mesh.num_elements()));
    map.element_signs.resize(static_cast<std::size_t>(mesh.num_elements()));
    for (const Element& e : mesh.elements()) {
        auto& dofs = map.element_dofs[static_cast<std::size_t>(e.id)];
        auto& signs = map.element_signs[static_cast<std::size_t>(e.id)];
        dofs.assign(static_cast<std::size_t>(2 * nd * e.num_faces()), -1);
        signs.assign(dofs.size(), 1.0);
        for (int lf = 0; lf < e.num_faces(); ++lf) {
            const int face_sign = mesh.element_face_sign(e.id, lf);
            const auto& offsets = map.face_offsets[static_cast<std::size_t>(e.faces[static_cast<std::size_t>(lf)])];
            for (int field = 0; field < 2; ++field) {
                const int offset = offsets[static_cast<std::size_t>(field)];
                for (int m = 0; m < nd; ++m) {
                    const auto slot = static_cast<std::size_t>((2 * lf + field) * nd + m);
                    dofs[slot] = offset < 0 ? -1 : offset + m;
                    signs[slot] = oriented[static_cast<std::size_t>(field)] ? face_sign : 1.0;
                }
            }
        }
    }
    return map;
}

struct GlobalSystem {
    Hybridization hybridization = Hybridization::TypeIII;
    SymmetricSparse matrix;
    DenseVector load;

    Eigen::Index size() const { return load.size(); }
};

/// A = sum_K P_K^T A_K P_K and b = sum_K P_K^T b_K, with orientation signs in the gather P_K
/// and constrained dofs dropped. Elements are accumulated in id order. A is positive definite
/// for TypeIII and symmetric indefinite for TypeI/TypeII (see jump_element_matrix).
inline GlobalSystem assemble_global(const Mesh& mesh, const std::vector<LocalOperators>& ops, const DofMap& map,
                                    const std::vector<Eigen::VectorXd>& element_loads) {
    if (static_cast<int>(ops.size()) != mesh.num_elements() ||
        static_cast<int>(element_loads.size()) != mesh.num_elements())
        throw InternalError("assemble_global: per-element inputs do not match the mesh");

    std::vector<SymmetricSparse::Triplet> entries;
    GlobalSystem sys;
    sys.hybridization = map.hybridization;
    sys.load = DenseVector::Zero(map.num_dofs);
    for (const Element& e : mesh.elements()) {
        const auto ue = static_cast<std::size_t>(e.id);
        const LocalOperators& op = ops[ue];
        if (op.degree != map.degree || op.hybridization != map.hybridization || op.element_id != e.id)
            throw InternalError("assemble_global: local operators inconsistent with the dof map");
        const auto& dofs = map.element_dofs[ue];
        const auto& signs = map.element_signs[ue];
        if (static_cast<int>(dofs.size()) != op.trace_size())
            throw InternalError("assemble_global: trace size mismatch on element " + std::to_string(e.id));

        const CondensedElementSystem local = condensed_element_system(op, element_loads[ue]);
        const auto nt = dofs.size();
        for (std::size_t j = 0; j < nt; ++j) {
            if (dofs[j] < 0) continue;
            sys.load[dofs[j]] += signs[j] * local.load[static_cast<Eigen::Index>(j)];
            for (std::size_t i = 0; i < nt; ++i) {
                if (dofs[i] < dofs[j]) continue; // lower triangle only
                entries.emplace_back(dofs[i], dofs[j],
                                     signs[i] * signs[j] *
                                         local.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
        }
    }
    sys.matrix = SymmetricSparse::from_triplets(map.num_dofs, entries);
    return sys;
}

/// Auto: Cholesky for TypeIII, LU for the indefinite TypeI/TypeII systems.
enum class SolverChoice { Auto, Cholesky, LU, ConjugateGradient };

struct SolverOptions {
    SolverChoice choice = SolverChoice::Auto;
    double tolerance = 1e-12;
    int max_iterations = 20000;
};

namespace detail {

template <class Factor>
DenseVector refined_solve(const GlobalSystem& sys, const Factor& fact, double tol) {
    DenseVector x = fact.solve(sys.load);
    const double bnorm = sys.load.norm();
    for (int step = 0; step < 3; ++step) {
        const DenseVector r = sys.load - spmv(sys.matrix, x);
        if (r.norm() <= tol * bnorm) break;
        x += fact.solve(r);
    }
    return x;
}

} // namespace detail

/// Solves A x = b so that ||A x - b|| <= tol ||b|| (direct factorization with up to three
/// steps of iterative refinement, or Jacobi-preconditioned CG).
inline DenseVector solve_global(const GlobalSystem& sys, const SolverOptions& opts = {}) {
    if (sys.size() == 0) return DenseVector();
    SolverChoice choice = opts.choice;
    if (choice == SolverChoice::Auto)
        choice = sys.hybridization == Hybridization::TypeIII ? SolverChoice::Cholesky : SolverChoice::LU;
    switch (choice) {
    case SolverChoice::ConjugateGradient:
        return cg_solve(sys.matrix, sys.load, opts.tolerance, opts.max_iterations, true).x;
    case SolverChoice::LU:
        return detail::refined_solve(sys, LuFactor(sys.matrix), opts.tolerance);
    default:
        return detail::refined_solve(sys, CholeskyFactor(sys.matrix), opts.tolerance);
    }
}

/// J_h(x) = 1/2 x^T A x - b^T x
inline double energy_value(const DenseVector& x, const GlobalSystem& sys) {
    if (x.size() != sys.size()) throw ParameterError("energy_value: size mismatch");
    return 0.5 * x.dot(spmv(sys.matrix, x)) - sys.load.dot(x);
}

/// Skeleton values on one face in the global orientation, read from the lower-id element.
struct FaceTraces {
    Eigen::VectorXd u_tangential; // u_check . t
    Eigen::VectorXd u_normal;     // u_hat . n_F
    Eigen::VectorXd sigma_check;
    Eigen::VectorXd phi_hat;
};

struct SolutionFields {
    std::vector<LocalFields> elements;
    std::vector<FaceTraces> faces;
};

/// Element-local trace data gathered from a global trace vector (constrained dofs read zero).
inline Eigen::VectorXd gather_traces(const DofMap& map, int element_id, const DenseVector& x) {
    const auto& dofs = map.element_dofs[static_cast<std::size_t>(element_id)];
    const auto& signs = map.element_signs[static_cast<std::size_t>(element_id)];
    Eigen::VectorXd local(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i)
        local[static_cast<Eigen::Index>(i)] = dofs[i] < 0 ? 0.0 : signs[i] * x[dofs[i]];
    return local;
}

/// Superposes the trace-driven and source-driven local solutions on every element.
inline SolutionFields reconstruct_fields(const Mesh& mesh, const DenseVector& traces, const DofMap& map,
                                         const std::vector<LocalOperators>& ops,
                                         const std::vector<Eigen::VectorXd>& element_loads) {
    if (traces.size() != map.num_dofs) throw ParameterError("reconstruct_fields: trace vector has wrong size");
    SolutionFields out;
    out.elements.reserve(ops.size());
    for (const Element& e : mesh.elements()) {
        const auto ue = static_cast<std::size_t>(e.id);
        out.elements.push_back(solve_local(ops[ue], gather_traces(map, e.id, traces), element_loads[ue]));
    }
    out.faces.resize(static_cast<std::size_t>(mesh.num_faces()));
    for (const Face& f : mesh.faces()) {
        const LocalFields& lf = out.elements[static_cast<std::size_t>(f.elements[0])];
        const int li = f.local_index[0];
        FaceTraces& ft = out.faces[static_cast<std::size_t>(f.id)];
        // lower-id element is oriented with the face, so no sign flip
        ft.u_tangential = lf.u_tangential.col(li);
        ft.u_normal = lf.u_normal.col(li);
        ft.sigma_check = lf.sigma_check.col(li);
        ft.phi_hat = lf.phi_hat.col(li);
    }
    return out;
}

/// Coordinate-format dump ("i j value", zero-based) of the full symmetric matrix.
inline void write_matrix_coordinates(const GlobalSystem& sys, std::ostream& os) {
    const auto old_precision = os.precision(17);
    const auto& a = sys.matrix.lower();
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
        for (SymmetricSparse::Storage::InnerIterator it(a, j); it; ++it) {
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
            if (it.row() != it.col()) os << it.col() << ' ' << it.row() << ' ' << it.value() << '\n';
        }
    }
    os.precision(old_precision);
}

} // namespace hdgvl
