#pragma once

#include "hdgvl/errors.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/quadrature.hpp"
#include "hdgvl/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace hdgvl {

/// Dimension of the total-degree space P_k in two variables.
inline constexpr int scalar_basis_dim(int k) { return (k + 1) * (k + 2) / 2; }

/// Basis values and first derivatives tabulated at a list of points (rows = points).
struct BasisTable {
    Eigen::MatrixXd values;
    Eigen::MatrixXd dx;
    Eigen::MatrixXd dy;

    Eigen::Index num_points() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }

    // curl b = (db/dy, -db/dx)
    Eigen::MatrixXd curl_x() const { return dy; }
    Eigen::MatrixXd curl_y() const { return -dx; }

    /// Vector basis z_j = (b_j, 0) for j < dim, z_j = (0, b_{j-dim}) otherwise.
    /// Returns the two components as (points x 2 dim) tables.
    Eigen::MatrixXd vector_x() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_points(), 2 * dim());
        out.leftCols(dim()) = values;
        return out;
    }
    Eigen::MatrixXd vector_y() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_points(), 2 * dim());
        out.rightCols(dim()) = values;
        return out;
    }
    /// rot z = dz2/dx - dz1/dy
    Eigen::MatrixXd vector_rot() const {
        Eigen::MatrixXd out(num_points(), 2 * dim());
        out.leftCols(dim()) = -dy;
        out.rightCols(dim()) = dx;
        return out;
    }
    /// div z = dz1/dx + dz2/dy
    Eigen::MatrixXd vector_div() const {
        Eigen::MatrixXd out(num_points(), 2 * dim());
        out.leftCols(dim()) = dx;
        out.rightCols(dim()) = dy;
        return out;
    }
};

/// Per-element orthonormal modal basis of P_k: modified Gram-Schmidt (applied twice) on
/// monomials centred at the centroid and scaled by the diameter.
class ElementBasis {
public:
    ElementBasis() = default;

    int degree() const { return degree_; }
    int dim() const { return scalar_basis_dim(degree_); }
    const Point& center() const { return center_; }
    double scale() const { return scale_; }

    /// Row i holds the monomial coefficients of basis function i.
    const Eigen::MatrixXd& coefficients() const { return coefficients_; }

    const QuadratureRule& quadrature() const { return quadrature_; }
    const BasisTable& volume_table() const { return volume_; }
    /// Tables at the face quadrature points of each local face (empty if not requested).
    const std::vector<BasisTable>& face_tables() const { return faces_; }
    const std::vector<FaceQuadrature>& face_quadratures() const { return face_quads_; }

    Eigen::VectorXd values(const Point& p) const {
        Eigen::VectorXd m(dim()), mdx(dim()), mdy(dim());
        monomials(p, m, mdx, mdy);
        return coefficients_ * m;
    }

    /// dim x 2 matrix of gradients.
    Eigen::MatrixXd gradients(const Point& p) const {
        Eigen::VectorXd m(dim()), mdx(dim()), mdy(dim());
        monomials(p, m, mdx, mdy);
        Eigen::MatrixXd g(dim(), 2);
        g.col(0) = coefficients_ * mdx;
        g.col(1) = coefficients_ * mdy;
        return g;
    }

    BasisTable tabulate(const std::vector<Point>& points) const {
        const auto np = static_cast<Eigen::Index>(points.size());
        Eigen::MatrixXd m(dim(), np), mdx(dim(), np), mdy(dim(), np);
        Eigen::VectorXd a(dim()), ax(dim()), ay(dim());
        for (Eigen::Index q = 0; q < np; ++q) {
            monomials(points[static_cast<std::size_t>(q)], a, ax, ay);
            m.col(q) = a;
            mdx.col(q) = ax;
            mdy.col(q) = ay;
        }
        BasisTable t;
        t.values = (coefficients_ * m).transpose();
        t.dx = (coefficients_ * mdx).transpose();
        t.dy = (coefficients_ * mdy).transpose();
        return t;
    }

    /// Coefficients in this basis of a function known at the basis' quadrature points.
    Eigen::VectorXd project_values(const Eigen::VectorXd& samples) const {
        return volume_.values.transpose() * (weights_.asDiagonal() * samples);
    }

    friend ElementBasis build_element_basis(const Element&, int, const QuadratureRule&,
                                            const std::vector<FaceQuadrature>&);

private:
    void monomials(const Point& p, Eigen::VectorXd& m, Eigen::VectorXd& mdx, Eigen::VectorXd& mdy) const {
        const double xi = (p.x() - center_.x()) / scale_;
        const double eta = (p.y() - center_.y()) / scale_;
        std::vector<double> px(static_cast<std::size_t>(degree_ + 1)), py(px.size());
        px[0] = py[0] = 1.0;
        for (std::size_t i = 1; i < px.size(); ++i) {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        Eigen::Index idx = 0;
        for (int total = 0; total <= degree_; ++total) {
            for (int a = total; a >= 0; --a) {
                const int b = total - a;
                const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
                m[idx] = px[ua] * py[ub];
                mdx[idx] = a > 0 ? a * px[ua - 1] * py[ub] / scale_ : 0.0;
                mdy[idx] = b > 0 ? b * px[ua] * py[ub - 1] / scale_ : 0.0;
                ++idx;
            }
        }
    }

    int degree_ = 0;
    Point center_ = Point::Zero();
    double scale_ = 1.0;
    Eigen::MatrixXd coefficients_;
    QuadratureRule quadrature_;
    Eigen::VectorXd weights_;
    BasisTable volume_;
    std::vector<BasisTable> faces_;
    std::vector<FaceQuadrature> face_quads_;
};

inline constexpr double kGramSchmidtPivotTolerance = 1e-12;

/// Orthonormalizes the monomials of degree <= k on the element in the discrete inner product
/// of `quad` (mapped to the element, exact to degree >= 2k). Face tables are built for every
/// rule in `face_quads` (one per local face, in local order).
inline ElementBasis build_element_basis(const Element& element, int k, const QuadratureRule& quad,
                                        const std::vector<FaceQuadrature>& face_quads = {}) {
    if (k < 0) throw ParameterError("polynomial degree must be nonnegative");
    if (quad.exactness < 2 * k)
        throw ParameterError("basis quadrature must be exact to degree 2k, got " + std::to_string(quad.exactness));

    ElementBasis basis;
    basis.degree_ = k;
    basis.center_ = element.centroid;
    basis.scale_ = element.diameter > 0.0 ? element.diameter : 1.0;
    basis.quadrature_ = quad;
    basis.weights_ = Eigen::Map<const Eigen::VectorXd>(quad.weights.data(), static_cast<Eigen::Index>(quad.size()));

    const int d = scalar_basis_dim(k);
    basis.coefficients_ = Eigen::MatrixXd::Identity(d, d);
    const BasisTable mono = basis.tabulate(quad.points);
    const Eigen::VectorXd& w = basis.weights_;
    auto inner = [&w](const Eigen::VectorXd &f, const Eigen::VectorXd &g) {
        return (w.array() * f.array() * g.array()).sum();
    };

    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd vals(mono.values.rows(), d);
    // pivots are measured against the largest monomial norm (diameter scaling keeps them O(1))
    double reference = 0.0;
    for (int j = 0; j < d; ++j)
        reference = std::max(reference, std::sqrt(std::max(inner(mono.values.col(j), mono.values.col(j)), 0.0)));
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXd v = mono.values.col(j);
        Eigen::VectorXd c = Eigen::VectorXd::Unit(d, j);
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < j; ++i) {
                const double r = inner(v, vals.col(i));
                v -= r * vals.col(i);
                c -= r * coeffs.row(i).transpose();
            }
        }
        const double norm = std::sqrt(std::max(inner(v, v), 0.0));
        if (!(reference > 0.0) || !(norm > kGramSchmidtPivotTolerance * reference))
            throw NumericalDegeneracyError("Gram-Schmidt breakdown on element " + std::to_string(element.id) +
                                           " (degenerate element?)");
        vals.col(j) = v / norm;
        coeffs.row(j) = c.transpose() / norm;
    }
    basis.coefficients_ = coeffs;
    basis.volume_ = basis.tabulate(quad.points);
    basis.face_quads_ = face_quads;
    basis.faces_.reserve(face_quads.size());
    for (const auto& fq : face_quads) basis.faces_.push_back(basis.tabulate(fq.points));
    return basis;
}

/// Orthonormal Legendre basis of P_k(F) in the normalized face parameter s in [0, 1]:
/// q_m(s) = sqrt((2m + 1) / |F|) P_m(2s - 1).
class FaceBasis {
public:
    FaceBasis(int k, double length) : degree_(k), length_(length) {
        if (k < 0) throw ParameterError("polynomial degree must be nonnegative");
        if (!(length > 0.0)) throw ParameterError("face length must be positive");
    }

    int degree() const { return degree_; }
    int dim() const { return degree_ + 1; }

    Eigen::VectorXd values(double s) const {
        Eigen::VectorXd v(dim());
        const double x = 2.0 * s - 1.0;
        double p0 = 1.0, p1 = x;
        for (int m = 0; m <= degree_; ++m) {
            double pm;
            if (m == 0) {
                pm = 1.0;
            } else if (m == 1) {
                pm = x;
            } else {
                pm = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = pm;
            }
            v[m] = std::sqrt((2.0 * m + 1.0) / length_) * pm;
        }
        return v;
    }

    /// (points x dim) table at the parameters of a face rule.
    Eigen::MatrixXd tabulate(const FaceQuadrature& rule) const {
        Eigen::MatrixXd t(static_cast<Eigen::Index>(rule.size()), dim());
        for (std::size_t q = 0; q < rule.size(); ++q)
            t.row(static_cast<Eigen::Index>(q)) = values(rule.params[q]).transpose();
        return t;
    }

private:
    int degree_;
    double length_;
};

/// Face rules for each local face of an element, in local face order.
inline std::vector<FaceQuadrature> element_face_quadratures(const Mesh& mesh, const Element& element, int exactness) {
    std::vector<FaceQuadrature> out;
    out.reserve(element.faces.size());
    for (int f : element.faces) out.push_back(face_quadrature(mesh.face(f), exactness));
    return out;
}

/// Basis of one mesh element with volume tables at a rule of the given exactness and face
/// tables at Gauss-Legendre rules of the same exactness on every local face.
inline ElementBasis build_element_basis(const Mesh& mesh, int element_id, int k, int exactness) {
    const Element& e = mesh.element(element_id);
    return build_element_basis(e, k, element_quadrature(e, exactness), element_face_quadratures(mesh, e, exactness));
}

} // namespace hdgvl
