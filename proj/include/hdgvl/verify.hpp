#pragma once

#include "hdgvl/basis.hpp"
#include "hdgvl/errors.hpp"
#include "hdgvl/hybrid_system.hpp"
#include "hdgvl/local_solver.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hdgvl {

enum class ExperimentId { Exp1Electric = 1, Exp2Magnetic = 2, Exp3Dirichlet = 3 };

/// Exact fields with sigma = rot u, phi = -div u and f = curl sigma + grad phi.
struct ManufacturedSolution {
    std::string name;
    VectorField u;
    ScalarField sigma;
    ScalarField phi;
    VectorField f;
    BoundaryKind boundary = BoundaryKind::Dirichlet;
};

inline ManufacturedSolution manufactured_case(ExperimentId id) {
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    constexpr double pi2 = pi * pi;
    ManufacturedSolution m;
    switch (id) {
    case ExperimentId::Exp1Electric:
        m.name = "exp1-electric";
        m.boundary = BoundaryKind::Electric;
        m.u = [](const Point& p) {
            return Vector2(cos(pi * p.x()) * sin(pi * p.y()), 2.0 * sin(pi * p.x()) * cos(pi * p.y()));
        };
        m.sigma = [](const Point& p) { return pi * cos(pi * p.x()) * cos(pi * p.y()); };
        m.phi = [](const Point& p) { return 3.0 * pi * sin(pi * p.x()) * sin(pi * p.y()); };
        m.f = [](const Point& p) {
            const double cx = cos(pi * p.x()), sx = sin(pi * p.x()), cy = cos(pi * p.y()), sy = sin(pi * p.y());
            const Vector2 curl_sigma(-pi2 * cx * sy, pi2 * sx * cy);
            const Vector2 grad_phi(3.0 * pi2 * cx * sy, 3.0 * pi2 * sx * cy);
            return Vector2(curl_sigma + grad_phi);
        };
        return m;
    case ExperimentId::Exp2Magnetic:
        m.name = "exp2-magnetic";
        m.boundary = BoundaryKind::Magnetic;
        m.u = [](const Point& p) {
            return Vector2(sin(2.0 * pi * p.x()) * cos(pi * p.y()), 2.0 * cos(2.0 * pi * p.x()) * sin(pi * p.y()));
        };
        m.sigma = [](const Point& p) { return -3.0 * pi * sin(2.0 * pi * p.x()) * sin(pi * p.y()); };
        m.phi = [](const Point& p) { return -4.0 * pi * cos(2.0 * pi * p.x()) * cos(pi * p.y()); };
        m.f = [](const Point& p) {
            const double c2x = cos(2.0 * pi * p.x()), s2x = sin(2.0 * pi * p.x());
            const double cy = cos(pi * p.y()), sy = sin(pi * p.y());
            const Vector2 curl_sigma(-3.0 * pi2 * s2x * cy, 6.0 * pi2 * c2x * sy);
            const Vector2 grad_phi(8.0 * pi2 * s2x * cy, 4.0 * pi2 * c2x * sy);
            return Vector2(curl_sigma + grad_phi);
        };
        return m;
    case ExperimentId::Exp3Dirichlet:
        m.name = "exp3-dirichlet";
        m.boundary = BoundaryKind::Dirichlet;
        m.u = [](const Point& p) {
            const double s = sin(pi * p.x()) * sin(pi * p.y());
            return Vector2(s, s);
        };
        m.sigma = [](const Point& p) {
            return pi * cos(pi * p.x()) * sin(pi * p.y()) - pi * sin(pi * p.x()) * cos(pi * p.y());
        };
        m.phi = [](const Point& p) {
            return -pi * cos(pi * p.x()) * sin(pi * p.y()) - pi * sin(pi * p.x()) * cos(pi * p.y());
        };
        m.f = [](const Point& p) {
            const double cx = cos(pi * p.x()), sx = sin(pi * p.x()), cy = cos(pi * p.y()), sy = sin(pi * p.y());
            const Vector2 curl_sigma(pi2 * (cx * cy + sx * sy), pi2 * (sx * sy + cx * cy));
            const Vector2 grad_phi(-pi2 * (cx * cy - sx * sy), -pi2 * (cx * cy - sx * sy));
            return Vector2(curl_sigma + grad_phi);
        };
        return m;
    }
    throw ParameterError("unknown experiment id " + std::to_string(static_cast<int>(id)));
}

inline ExperimentId experiment_from_int(int id) {
    if (id < 1 || id > 3) throw ParameterError("experiment id must be 1, 2 or 3");
    return static_cast<ExperimentId>(id);
}

struct ErrorReport {
    double e_sigma = 0.0;
    double e_phi = 0.0;
    double e_u = 0.0;
    double e_sigma_check = 0.0;
    double e_phi_hat = 0.0;

    /// In table order: sigma, u, phi, sigma_check, phi_hat.
    std::array<double, 5> in_table_order() const { return {e_sigma, e_u, e_phi, e_sigma_check, e_phi_hat}; }
};

struct VolumeErrors {
    double e_sigma = 0.0;
    double e_phi = 0.0;
    double e_u = 0.0;
};

/// Element-wise L2 errors of sigma_h, phi_h, u_h with a rule of the given exactness.
inline VolumeErrors volume_errors(const std::vector<LocalFields>& fields, const ManufacturedSolution& exact,
                                  const Mesh& mesh, const std::vector<ElementBasis>& bases, int exactness) {
    double s2 = 0.0, p2 = 0.0, u2 = 0.0;
    for (const Element& e : mesh.elements()) {
        const auto ue = static_cast<std::size_t>(e.id);
        const ElementBasis& basis = bases[ue];
        const LocalFields& lf = fields[ue];
        const int d = basis.dim();
        const QuadratureRule rule = element_quadrature(e, exactness);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point& x = rule.points[q];
            const Eigen::VectorXd b = basis.values(x);
            const double ds = exact.sigma(x) - b.dot(lf.sigma);
            const double dp = exact.phi(x) - b.dot(lf.phi);
            const Vector2 du = exact.u(x) - Vector2(b.dot(lf.u.head(d)), b.dot(lf.u.tail(d)));
            s2 += rule.weights[q] * ds * ds;
            p2 += rule.weights[q] * dp * dp;
            u2 += rule.weights[q] * du.squaredNorm();
        }
    }
    return {std::sqrt(s2), std::sqrt(p2), std::sqrt(u2)};
}

struct SkeletonErrors {
    double e_sigma_check = 0.0;
    double e_phi_hat = 0.0;
};

/// Errors of the recovered numerical fluxes over the sum of element boundaries (each interior
/// face contributes once from each adjacent element).
inline SkeletonErrors skeleton_errors(const std::vector<LocalFields>& fields, const ManufacturedSolution& exact,
                                      const Mesh& mesh, int exactness) {
    const FaceQuadrature ref = face_quadrature(exactness);
    double s2 = 0.0, p2 = 0.0;
    for (const Element& e : mesh.elements()) {
        const LocalFields& lf = fields[static_cast<std::size_t>(e.id)];
        const int k = static_cast<int>(lf.sigma_check.rows()) - 1;
        for (int l = 0; l < e.num_faces(); ++l) {
            const Face& face = mesh.face(e.faces[static_cast<std::size_t>(l)]);
            const FaceBasis fb(k, face.length);
            for (std::size_t q = 0; q < ref.size(); ++q) {
                const Point x = face.at(ref.params[q]);
                const double w = ref.weights[q] * face.length;
                const Eigen::VectorXd v = fb.values(ref.params[q]);
                const double ds = exact.sigma(x) - v.dot(lf.sigma_check.col(l));
                const double dp = exact.phi(x) - v.dot(lf.phi_hat.col(l));
                s2 += w * ds * ds;
                p2 += w * dp * dp;
            }
        }
    }
    return {std::sqrt(s2), std::sqrt(p2)};
}

inline ErrorReport compute_errors(const std::vector<LocalFields>& fields, const ManufacturedSolution& exact,
                                  const Mesh& mesh, const std::vector<ElementBasis>& bases, int exactness) {
    const VolumeErrors v = volume_errors(fields, exact, mesh, bases, exactness);
    const SkeletonErrors s = skeleton_errors(fields, exact, mesh, exactness);
    return {v.e_sigma, v.e_phi, v.e_u, s.e_sigma_check, s.e_phi_hat};
}

/// log(e1 / e2) / log(h1 / h2); nullopt when an error is zero or an input is invalid.
inline std::optional<double> eoc(double e1, double e2, double h1, double h2) {
    if (!(e1 > 0.0) || !(e2 > 0.0) || !(h1 > 0.0) || !(h2 > 0.0) || h1 == h2) return std::nullopt;
    return std::log(e1 / e2) / std::log(h1 / h2);
}

/// Rates between consecutive entries; the result has errors.size() - 1 entries.
inline std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& h) {
    if (errors.size() != h.size()) throw ParameterError("eoc: errors and h must have the same length");
    if (errors.size() < 2) throw ParameterError("eoc needs at least two levels");
    std::vector<std::optional<double>> rates;
    for (std::size_t i = 1; i < errors.size(); ++i) rates.push_back(eoc(errors[i - 1], errors[i], h[i - 1], h[i]));
    return rates;
}

struct LevelRecord {
    int level = 0;
    double h = 0.0;
    ErrorReport errors;
    /// Rates w.r.t. the previous level in table order (sigma, u, phi, sigma_check, phi_hat);
    /// empty on the first level.
    std::array<std::optional<double>, 5> rates{};
};

struct ConvergenceRecord {
    int degree = 0;
    std::vector<LevelRecord> levels;
};

/// Fills the rate columns of an ordered (coarse to fine) record.
inline void compute_rates(ConvergenceRecord& record) {
    for (std::size_t i = 0; i < record.levels.size(); ++i) {
        auto& cur = record.levels[i];
        cur.rates = {};
        if (i == 0) continue;
        const auto& prev = record.levels[i - 1];
        if (!(cur.h < prev.h)) throw ParameterError("convergence record h must strictly decrease");
        const auto e1 = prev.errors.in_table_order();
        const auto e2 = cur.errors.in_table_order();
        for (std::size_t q = 0; q < 5; ++q) cur.rates[q] = eoc(e1[q], e2[q], prev.h, cur.h);
    }
}

enum class ProjectionTarget { Volume, Skeleton };

/// L2 projection coefficients of a scalar function: per element (dim P_k, against the element
/// basis) for Volume, per face (k+1, against the face basis) for Skeleton.
inline std::vector<Eigen::VectorXd> l2_project(const ScalarField& g, const Mesh& mesh,
                                               const std::vector<ElementBasis>& bases, ProjectionTarget target,
                                               int exactness) {
    std::vector<Eigen::VectorXd> out;
    if (target == ProjectionTarget::Volume) {
        for (const Element& e : mesh.elements()) {
            const ElementBasis& basis = bases[static_cast<std::size_t>(e.id)];
            const QuadratureRule rule = element_quadrature(e, exactness);
            Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.dim());
            for (std::size_t q = 0; q < rule.size(); ++q)
                c += rule.weights[q] * g(rule.points[q]) * basis.values(rule.points[q]);
            const BasisTable& t = basis.volume_table();
            const Eigen::VectorXd w = detail::to_vector(basis.quadrature().weights);
            const Eigen::MatrixXd mass = detail::weighted_product(t.values, w, t.values);
            out.push_back(mass.llt().solve(c));
        }
    } else {
        if (bases.empty()) throw ParameterError("l2_project: need at least one basis to read the degree");
        const int k = bases.front().degree();
        const FaceQuadrature ref = face_quadrature(exactness);
        for (const Face& f : mesh.faces()) {
            const FaceBasis fb(k, f.length);
            Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
            for (std::size_t q = 0; q < ref.size(); ++q)
                c += ref.weights[q] * f.length * g(f.at(ref.params[q])) * fb.values(ref.params[q]);
            out.push_back(c);
        }
    }
    return out;
}

struct ProjectionErrors {
    double volume = 0.0;             // ||g - Pi_W g||_{T_h}
    double volume_on_skeleton = 0.0; // ||g - Pi_W g||_{dT_h}
    double face = 0.0;               // ||g - P_M g||_{dT_h}
};

/// Projection errors of a scalar function, the reference behaviour of the discrete errors.
inline ProjectionErrors projection_errors(const ScalarField &g, const Mesh &mesh,
                                          const std::vector<ElementBasis> &bases, int exactness) {
    const auto vol = l2_project(g, mesh, bases, ProjectionTarget::Volume, exactness);
    const auto skel = l2_project(g, mesh, bases, ProjectionTarget::Skeleton, exactness);
    const int k = bases.front().degree();
    const FaceQuadrature ref = face_quadrature(exactness);
    double v2 = 0.0, vs2 = 0.0, f2 = 0.0;
    for (const Element& e : mesh.elements()) {
        const auto ue = static_cast<std::size_t>(e.id);
        const QuadratureRule rule = element_quadrature(e, exactness);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double diff = g(rule.points[q]) - bases[ue].values(rule.points[q]).dot(vol[ue]);
            v2 += rule.weights[q] * diff * diff;
        }
        for (int fid : e.faces) {
            const Face& f = mesh.face(fid);
            const FaceBasis fb(k, f.length);
            for (std::size_t q = 0; q < ref.size(); ++q) {
                const Point x = f.at(ref.params[q]);
                const double w = ref.weights[q] * f.length;
                const double gv = g(x);
                const double dv = gv - bases[ue].values(x).dot(vol[ue]);
                const double df = gv - fb.values(ref.params[q]).dot(skel[static_cast<std::size_t>(fid)]);
                vs2 += w * dv * dv;
                f2 += w * df * df;
            }
        }
    }
    return {std::sqrt(v2), std::sqrt(vs2), std::sqrt(f2)};
}

} // namespace hdgvl
