#pragma once

#include "hdgvl/basis.hpp"
#include "hdgvl/errors.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/quadrature.hpp"
#include "hdgvl/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace hdgvl {

struct StabilizationParams {
    double alpha = 1.0; // tangential: (u_check - u).n_perp = alpha (sigma - sigma_check)
    double tau = 1.0;   // normal:     (u_hat - u).n      = tau (phi - phi_hat)

    void validate() const {
        if (!(alpha > 0.0) || !(tau > 0.0)) throw ParameterError("stabilization parameters must be positive");
    }
};

/// Which member of a trace pair is handed to the local problem as data.
///   tangential pair: (u_check . n_perp, sigma_check)
///   normal pair:     (u_hat . n, phi_hat)
/// Displacement means the vector trace is data and the scalar flux is recovered; Flux is the
/// reverse.
enum class TraceMode { Displacement, Flux };

struct TraceModes {
    TraceMode tangential;
    TraceMode normal;
};

inline constexpr TraceModes trace_modes(Hybridization hyb) {
    switch (hyb) {
    case Hybridization::TypeI: return {TraceMode::Displacement, TraceMode::Flux};
    case Hybridization::TypeII: return {TraceMode::Flux, TraceMode::Displacement};
    case Hybridization::TypeIII: return {TraceMode::Displacement, TraceMode::Displacement};
    }
    return {TraceMode::Displacement, TraceMode::Displacement};
}

/// Face integrals of one local face, with the element-outward normal n_K.
struct LocalFaceOperators {
    int sign = 1;                    // n_K = sign * n_F
    Vector2 normal = Vector2::Zero(); // n_K
    Eigen::MatrixXd mass;            // <b_i, b_j>                    d x d
    Eigen::MatrixXd scalar_ut;       // <b_i, z_j . n_perp>           d x 2d
    Eigen::MatrixXd scalar_un;       // <b_i, z_j . n>                d x 2d
    Eigen::MatrixXd ut_ut;           // <z_i . n_perp, z_j . n_perp>  2d x 2d
    Eigen::MatrixXd un_un;           // <z_i . n, z_j . n>            2d x 2d
    Eigen::MatrixXd proj_scalar;     // <q_m, b_i>                    (k+1) x d
    Eigen::MatrixXd proj_ut;         // <q_m, z_j . n_perp>           (k+1) x 2d
    Eigen::MatrixXd proj_un;         // <q_m, z_j . n>                (k+1) x 2d
};

/// Element-local HDG system for one hybridization, factorized once.
///
/// Local unknowns are ordered (sigma, phi, u_1, u_2), each block of size dim P_k. Trace data
/// are face moments against the orthonormal face basis, expressed in the element's outward
/// orientation and laid out face by face as [tangential datum (k+1) | normal datum (k+1)].
struct LocalOperators {
    int element_id = -1;
    int degree = 0;
    int dim = 0;
    int num_faces = 0;
    StabilizationParams params;
    Hybridization hybridization = Hybridization::TypeIII;

    Eigen::MatrixXd mass;          // volume mass matrix (identity up to rounding)
    Eigen::MatrixXd curl_coupling; // (z_j, curl b_i)   d x 2d
    Eigen::MatrixXd grad_coupling; // (z_j, grad b_i)   d x 2d
    std::vector<LocalFaceOperators> faces;

    Eigen::MatrixXd matrix;    // 4d x 4d
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factorization;
    Eigen::MatrixXd trace_rhs; // 4d x trace_size
    Eigen::MatrixXd trace_to_volume;
    Eigen::MatrixXd source_to_volume; // 4d x 2d

    int face_dofs() const { return degree + 1; }
    int trace_size() const { return 2 * face_dofs() * num_faces; }
    int local_size() const { return 4 * dim; }
    int slot(int face, int field, int moment) const { return (2 * face + field) * face_dofs() + moment; }

    TraceModes modes() const { return trace_modes(hybridization); }
};

/// Volume coefficients and face moments of every numerical trace on one element. Traces are
/// in the element's outward orientation; each trace matrix is (k+1) x num_faces.
struct LocalFields {
    Eigen::VectorXd sigma;
    Eigen::VectorXd phi;
    Eigen::VectorXd u; // (u_1 block, u_2 block)
    Eigen::MatrixXd u_tangential; // u_check . n_perp
    Eigen::MatrixXd u_normal;     // u_hat . n
    Eigen::MatrixXd sigma_check;
    Eigen::MatrixXd phi_hat;

    LocalFields& operator+=(const LocalFields& o) {
        sigma += o.sigma;
        phi += o.phi;
        u += o.u;
        u_tangential += o.u_tangential;
        u_normal += o.u_normal;
        sigma_check += o.sigma_check;
        phi_hat += o.phi_hat;
        return *this;
    }

    friend LocalFields operator+(LocalFields a, const LocalFields& b) { return a += b; }
};

namespace detail {

inline Eigen::MatrixXd weighted_product(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b) {
    return a.transpose() * (w.asDiagonal() * b);
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace detail

/// Assembles and factorizes the local problem on one element: the three weak equations with
/// the numerical traces eliminated through the stabilization relations. `basis` must carry face
/// tables for every local face.
inline LocalOperators assemble_local_system(const Mesh& mesh, int element_id, const ElementBasis& basis,
                                            const StabilizationParams& params, Hybridization hyb) {
    params.validate();
    const Element& element = mesh.element(element_id);
    const int nf = element.num_faces();
    if (static_cast<int>(basis.face_tables().size()) != nf)
        throw ParameterError("element basis lacks face tables for element " + std::to_string(element_id));

    LocalOperators ops;
    ops.element_id = element_id;
    ops.degree = basis.degree();
    ops.dim = basis.dim();
    ops.num_faces = nf;
    ops.params = params;
    ops.hybridization = hyb;

    const int d = ops.dim;
    const int nd = ops.face_dofs();
    const TraceModes modes = trace_modes(hyb);
    const bool tangential_flux = modes.tangential == TraceMode::Flux;
    const bool normal_flux = modes.normal == TraceMode::Flux;
    const double alpha = params.alpha;
    const double tau = params.tau;

    const BasisTable& vol = basis.volume_table();
    const Eigen::VectorXd w = detail::to_vector(basis.quadrature().weights);
    const Eigen::MatrixXd zx = vol.vector_x();
    const Eigen::MatrixXd zy = vol.vector_y();
    ops.mass = detail::weighted_product(vol.values, w, vol.values);
    ops.curl_coupling = detail::weighted_product(vol.curl_x(), w, zx) + detail::weighted_product(vol.curl_y(), w, zy);
    ops.grad_coupling = detail::weighted_product(vol.dx, w, zx) + detail::weighted_product(vol.dy, w, zy);

    Eigen::MatrixXd face_mass = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sum_scalar_ut = Eigen::MatrixXd::Zero(d, 2 * d);
    Eigen::MatrixXd sum_scalar_un = Eigen::MatrixXd::Zero(d, 2 * d);
    Eigen::MatrixXd sum_ut_ut = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    Eigen::MatrixXd sum_un_un = Eigen::MatrixXd::Zero(2 * d, 2 * d);

    ops.faces.resize(static_cast<std::size_t>(nf));
    for (int lf = 0; lf < nf; ++lf) {
        const auto ulf = static_cast<std::size_t>(lf);
        const Face& face = mesh.face(element.faces[ulf]);
        const FaceQuadrature& fq = basis.face_quadratures()[ulf];
        const BasisTable& ft = basis.face_tables()[ulf];
        const Eigen::VectorXd fw = detail::to_vector(fq.weights);

        LocalFaceOperators& fo = ops.faces[ulf];
        fo.sign = mesh.element_face_sign(element_id, lf);
        fo.normal = fo.sign * face.normal;
        const Vector2 np = perp(fo.normal);
        const Eigen::MatrixXd fzx = ft.vector_x();
        const Eigen::MatrixXd fzy = ft.vector_y();
        const Eigen::MatrixXd zt = np.x() * fzx + np.y() * fzy;
        const Eigen::MatrixXd zn = fo.normal.x() * fzx + fo.normal.y() * fzy;
        const Eigen::MatrixXd q = FaceBasis(ops.degree, face.length).tabulate(fq);

        fo.mass = detail::weighted_product(ft.values, fw, ft.values);
        fo.scalar_ut = detail::weighted_product(ft.values, fw, zt);
        fo.scalar_un = detail::weighted_product(ft.values, fw, zn);
        fo.ut_ut = detail::weighted_product(zt, fw, zt);
        fo.un_un = detail::weighted_product(zn, fw, zn);
        fo.proj_scalar = detail::weighted_product(q, fw, ft.values);
        fo.proj_ut = detail::weighted_product(q, fw, zt);
        fo.proj_un = detail::weighted_product(q, fw, zn);

        face_mass += fo.mass;
        sum_scalar_ut += fo.scalar_ut;
        sum_scalar_un += fo.scalar_un;
        sum_ut_ut += fo.ut_ut;
        sum_un_un += fo.un_un;
    }

    // Blocks: S = [0, d), P = [d, 2d), U = [2d, 4d)
    const int n = ops.local_size();
    Eigen::MatrixXd& L = ops.matrix;
    L = Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd& bc = ops.curl_coupling;
    const Eigen::MatrixXd& bg = ops.grad_coupling;

    // (sigma, chi) - (u, curl chi) + <u_check . n_perp, chi> = 0
    // (sigma, rot z) + <sigma_check, z . n_perp> + ...
    if (tangential_flux) {
        L.block(0, 0, d, d) = ops.mass + alpha * face_mass;
        L.block(0, 2 * d, d, 2 * d) = -bc + sum_scalar_ut;
        L.block(2 * d, 0, 2 * d, d) = (bc - sum_scalar_ut).transpose();
    } else {
        L.block(0, 0, d, d) = ops.mass;
        L.block(0, 2 * d, d, 2 * d) = -bc;
        L.block(2 * d, 0, 2 * d, d) = bc.transpose();
        L.block(2 * d, 2 * d, 2 * d, 2 * d) += sum_ut_ut / alpha;
    }
    // (phi, varphi) - (u, grad varphi) + <u_hat . n, varphi> = 0
    // ... - (phi, div z) + <phi_hat, z . n>
    if (normal_flux) {
        L.block(d, d, d, d) = ops.mass + tau * face_mass;
        L.block(d, 2 * d, d, 2 * d) = -bg + sum_scalar_un;
        L.block(2 * d, d, 2 * d, d) = (bg - sum_scalar_un).transpose();
    } else {
        L.block(d, d, d, d) = ops.mass;
        L.block(d, 2 * d, d, 2 * d) = -bg;
        L.block(2 * d, d, 2 * d, d) = bg.transpose();
        L.block(2 * d, 2 * d, 2 * d, 2 * d) += sum_un_un / tau;
    }

    ops.trace_rhs = Eigen::MatrixXd::Zero(n, ops.trace_size());
    for (int lf = 0; lf < nf; ++lf) {
        const LocalFaceOperators& fo = ops.faces[static_cast<std::size_t>(lf)];
        const int c1 = ops.slot(lf, 0, 0);
        const int c2 = ops.slot(lf, 1, 0);
        if (tangential_flux) {
            ops.trace_rhs.block(0, c1, d, nd) = alpha * fo.proj_scalar.transpose();
            ops.trace_rhs.block(2 * d, c1, 2 * d, nd) = -fo.proj_ut.transpose();
        } else {
            ops.trace_rhs.block(0, c1, d, nd) = -fo.proj_scalar.transpose();
            ops.trace_rhs.block(2 * d, c1, 2 * d, nd) = fo.proj_ut.transpose() / alpha;
        }
        if (normal_flux) {
            ops.trace_rhs.block(d, c2, d, nd) = tau * fo.proj_scalar.transpose();
            ops.trace_rhs.block(2 * d, c2, 2 * d, nd) = -fo.proj_un.transpose();
        } else {
            ops.trace_rhs.block(d, c2, d, nd) = -fo.proj_scalar.transpose();
            ops.trace_rhs.block(2 * d, c2, 2 * d, nd) = fo.proj_un.transpose() / tau;
        }
    }

    ops.factorization.compute(L);
    if (!ops.factorization.isInvertible())
        throw InternalError("singular local HDG matrix on element " + std::to_string(element_id));

    ops.trace_to_volume = ops.factorization.solve(ops.trace_rhs);
    Eigen::MatrixXd source_rhs = Eigen::MatrixXd::Zero(n, 2 * d);
    source_rhs.bottomRows(2 * d).setIdentity();
    ops.source_to_volume = ops.factorization.solve(source_rhs);
    return ops;
}

namespace detail {

/// Recovers all trace moments from a local coefficient vector and the trace data it was
/// computed from (zero data for the source problem).
inline LocalFields unpack_local(const LocalOperators& ops, const Eigen::VectorXd& x, const Eigen::VectorXd& data) {
    const int d = ops.dim;
    const int nd = ops.face_dofs();
    const TraceModes modes = ops.modes();
    const double alpha = ops.params.alpha;
    const double tau = ops.params.tau;

    LocalFields out;
    out.sigma = x.segment(0, d);
    out.phi = x.segment(d, d);
    out.u = x.segment(2 * d, 2 * d);
    out.u_tangential.resize(nd, ops.num_faces);
    out.u_normal.resize(nd, ops.num_faces);
    out.sigma_check.resize(nd, ops.num_faces);
    out.phi_hat.resize(nd, ops.num_faces);
    for (int lf = 0; lf < ops.num_faces; ++lf) {
        const LocalFaceOperators& fo = ops.faces[static_cast<std::size_t>(lf)];
        const Eigen::VectorXd g1 = data.segment(ops.slot(lf, 0, 0), nd);
        const Eigen::VectorXd g2 = data.segment(ops.slot(lf, 1, 0), nd);
        const Eigen::VectorXd s_f = fo.proj_scalar * out.sigma;
        const Eigen::VectorXd p_f = fo.proj_scalar * out.phi;
        const Eigen::VectorXd ut_f = fo.proj_ut * out.u;
        const Eigen::VectorXd un_f = fo.proj_un * out.u;
        if (modes.tangential == TraceMode::Displacement) {
            out.u_tangential.col(lf) = g1;
            out.sigma_check.col(lf) = s_f + (ut_f - g1) / alpha;
        } else {
            out.sigma_check.col(lf) = g1;
            out.u_tangential.col(lf) = ut_f + alpha * (s_f - g1);
        }
        if (modes.normal == TraceMode::Displacement) {
            out.u_normal.col(lf) = g2;
            out.phi_hat.col(lf) = p_f + (un_f - g2) / tau;
        } else {
            out.phi_hat.col(lf) = g2;
            out.u_normal.col(lf) = un_f + tau * (p_f - g2);
        }
    }
    return out;
}

inline void check_size(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want)
        throw ParameterError(std::string(what) + ": expected size " + std::to_string(want) + ", got " +
                             std::to_string(got));
}

} // namespace detail

/// First local problem: volume fields and recovered traces driven by trace data only.
inline LocalFields solve_local_trace(const LocalOperators& ops, const Eigen::VectorXd& trace_data) {
    detail::check_size(trace_data.size(), ops.trace_size(), "solve_local_trace");
    return detail::unpack_local(ops, ops.trace_to_volume * trace_data, trace_data);
}

/// Same, with the two trace fields given as (k+1) x num_faces moment matrices.
inline LocalFields solve_local_trace(const LocalOperators& ops, const Eigen::MatrixXd& tangential,
                                     const Eigen::MatrixXd& normal) {
    detail::check_size(tangential.rows(), ops.face_dofs(), "solve_local_trace (tangential moments)");
    detail::check_size(tangential.cols(), ops.num_faces, "solve_local_trace (tangential faces)");
    detail::check_size(normal.rows(), ops.face_dofs(), "solve_local_trace (normal moments)");
    detail::check_size(normal.cols(), ops.num_faces, "solve_local_trace (normal faces)");
    Eigen::VectorXd data(ops.trace_size());
    for (int lf = 0; lf < ops.num_faces; ++lf) {
        data.segment(ops.slot(lf, 0, 0), ops.face_dofs()) = tangential.col(lf);
        data.segment(ops.slot(lf, 1, 0), ops.face_dofs()) = normal.col(lf);
    }
    return solve_local_trace(ops, data);
}

/// Second local problem: response to the source moments (f, z_j) with zero trace data.
inline LocalFields solve_local_source(const LocalOperators& ops, const Eigen::VectorXd& f_moments) {
    detail::check_size(f_moments.size(), 2 * ops.dim, "solve_local_source");
    return detail::unpack_local(ops, ops.source_to_volume * f_moments, Eigen::VectorXd::Zero(ops.trace_size()));
}

/// Full local problem with both trace data and source.
inline LocalFields solve_local(const LocalOperators& ops, const Eigen::VectorXd& trace_data,
                               const Eigen::VectorXd& f_moments) {
    detail::check_size(trace_data.size(), ops.trace_size(), "solve_local");
    detail::check_size(f_moments.size(), 2 * ops.dim, "solve_local");
    const Eigen::VectorXd x = ops.trace_to_volume * trace_data + ops.source_to_volume * f_moments;
    return detail::unpack_local(ops, x, trace_data);
}

/// Element contribution to the energy bilinear form
///   (S_eta, S_mu) + (P_eta, P_mu) + tangential mismatch + normal mismatch,
/// evaluated on the element's trace basis so that symmetry holds by construction. The mismatch
/// terms are alpha^-1 |U.n_perp - eta_t|^2 or alpha |S - varsigma|^2 (tangential) and
/// tau^-1 |U.n - eta_n|^2 or tau |P - lambda|^2 (normal), depending on the trace modes.
/// Positive semidefinite for every hybridization, but only a valid condensed operator for
/// TypeIII (see jump_element_matrix).
inline Eigen::MatrixXd energy_element_matrix(const LocalOperators& ops) {
    const int d = ops.dim;
    const int nd = ops.face_dofs();
    const TraceModes modes = ops.modes();
    const Eigen::MatrixXd& x = ops.trace_to_volume;
    const auto xs = x.middleRows(0, d);
    const auto xp = x.middleRows(d, d);
    const auto xu = x.middleRows(2 * d, 2 * d);

    Eigen::MatrixXd a = xs.transpose() * ops.mass * xs + xp.transpose() * ops.mass * xp;
    for (int lf = 0; lf < ops.num_faces; ++lf) {
        const LocalFaceOperators& fo = ops.faces[static_cast<std::size_t>(lf)];
        Eigen::MatrixXd wt, wn;
        double ct, cn;
        if (modes.tangential == TraceMode::Displacement) {
            wt = fo.proj_ut * xu;
            ct = 1.0 / ops.params.alpha;
        } else {
            wt = fo.proj_scalar * xs;
            ct = ops.params.alpha;
        }
        if (modes.normal == TraceMode::Displacement) {
            wn = fo.proj_un * xu;
            cn = 1.0 / ops.params.tau;
        } else {
            wn = fo.proj_scalar * xp;
            cn = ops.params.tau;
        }
        wt.middleCols(ops.slot(lf, 0, 0), nd) -= Eigen::MatrixXd::Identity(nd, nd);
        wn.middleCols(ops.slot(lf, 1, 0), nd) -= Eigen::MatrixXd::Identity(nd, nd);
        a += ct * wt.transpose() * wt + cn * wn.transpose() * wn;
    }
    // symmetric up to rounding in the triple products
    return 0.5 * (a + a.transpose());
}

/// Element contribution to the jump conditions: for each trace slot, the moments of the
/// complementary trace recovered from the local solve with unit data,
///   displacement slot: -sigma_check or -phi_hat,
///   flux slot:         +u_check . n_perp or +u_hat . n.
/// Symmetric for every hybridization and equal to energy_element_matrix for TypeIII. With a
/// flux-type field (TypeI, TypeII) the flux-flux block is negative semidefinite, so the
/// condensed system is symmetric indefinite.
inline Eigen::MatrixXd jump_element_matrix(const LocalOperators& ops) {
    const int d = ops.dim;
    const int nd = ops.face_dofs();
    const TraceModes modes = ops.modes();
    const Eigen::MatrixXd& x = ops.trace_to_volume;
    const auto xs = x.middleRows(0, d);
    const auto xp = x.middleRows(d, d);
    const auto xu = x.middleRows(2 * d, 2 * d);
    const double alpha = ops.params.alpha;
    const double tau = ops.params.tau;

    Eigen::MatrixXd a(ops.trace_size(), ops.trace_size());
    for (int lf = 0; lf < ops.num_faces; ++lf) {
        const LocalFaceOperators& fo = ops.faces[static_cast<std::size_t>(lf)];
        const int r1 = ops.slot(lf, 0, 0);
        const int r2 = ops.slot(lf, 1, 0);
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nd, nd);
        const Eigen::MatrixXd s_f = fo.proj_scalar * xs;
        const Eigen::MatrixXd p_f = fo.proj_scalar * xp;
        const Eigen::MatrixXd ut_f = fo.proj_ut * xu;
        const Eigen::MatrixXd un_f = fo.proj_un * xu;
        if (modes.tangential == TraceMode::Displacement) {
            a.middleRows(r1, nd) = -(s_f + ut_f / alpha);
            a.block(r1, r1, nd, nd) += id / alpha;
        } else {
            a.middleRows(r1, nd) = ut_f + alpha * s_f;
            a.block(r1, r1, nd, nd) -= alpha * id;
        }
        if (modes.normal == TraceMode::Displacement) {
            a.middleRows(r2, nd) = -(p_f + un_f / tau);
            a.block(r2, r2, nd, nd) += id / tau;
        } else {
            a.middleRows(r2, nd) = un_f + tau * p_f;
            a.block(r2, r2, nd, nd) -= tau * id;
        }
    }
    return 0.5 * (a + a.transpose());
}

/// Condensed element matrix of the global trace system: the energy form for TypeIII, the jump
/// form otherwise.
inline Eigen::MatrixXd condensed_element_matrix(const LocalOperators& ops) {
    return ops.hybridization == Hybridization::TypeIII ? energy_element_matrix(ops) : jump_element_matrix(ops);
}

/// Element load (f, U_mu) for every trace basis function mu.
inline Eigen::VectorXd condensed_element_load(const LocalOperators& ops, const Eigen::VectorXd& f_moments) {
    detail::check_size(f_moments.size(), 2 * ops.dim, "condensed_element_load");
    return ops.trace_to_volume.middleRows(2 * ops.dim, 2 * ops.dim).transpose() * f_moments;
}

struct CondensedElementSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd load;
};

inline CondensedElementSystem condensed_element_system(const LocalOperators& ops, const Eigen::VectorXd& f_moments) {
    return {condensed_element_matrix(ops), condensed_element_load(ops, f_moments)};
}

using VectorField = std::function<Vector2(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// Moments (f, z_j)_K of a vector field against the vector basis, by the given quadrature
/// (mapped to the element).
inline Eigen::VectorXd load_moments(const ElementBasis& basis, const QuadratureRule& rule, const VectorField& f) {
    const int d = basis.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * d);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vector2 fv = f(rule.points[q]);
        const Eigen::VectorXd b = basis.values(rule.points[q]);
        out.head(d) += rule.weights[q] * fv.x() * b;
        out.tail(d) += rule.weights[q] * fv.y() * b;
    }
    return out;
}

} // namespace hdgvl
