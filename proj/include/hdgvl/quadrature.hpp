#pragma once

#include "hdgvl/errors.hpp"
#include "hdgvl/mesh.hpp"
#include "hdgvl/types.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace hdgvl {

struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;
    int exactness = 0;

    std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule on a face, stored both as normalized parameters along a -> b and as
/// physical points. Weights are physical (they sum to the face length).
struct FaceQuadrature {
    std::vector<double> params;
    std::vector<Point> points;
    std::vector<double> weights;
    int exactness = 0;

    std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 30;

/// n-point Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1) throw ParameterError("Gauss-Legendre rule needs at least one point");
    // P_n(z) and P_n'(z) by the three-term recurrence
    auto legendre = [n](double z) {
        double p0 = 1.0, p1 = z;
        for (int m = 2; m <= n; ++m) {
            const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        return std::pair{p1, n * (z * p1 - p0) / (z * z - 1.0)};
    };
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double dp = legendre(z).second;
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        x[lo] = -z;
        x[hi] = z;
        w[lo] = w[hi] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
    return {x, w};
}

namespace detail {
inline void check_degree(int degree) {
    if (degree < 0 || degree > kMaxQuadratureDegree)
        throw ParameterError("quadrature exactness degree must be in [0, 30], got " + std::to_string(degree));
}
} // namespace detail

/// Rule on the reference element: [0,1]^2 for squares, the triangle (0,0),(1,0),(0,1) for
/// triangles (collapsed tensor product).
inline QuadratureRule element_quadrature(ElementKind kind, int exactness_degree) {
    detail::check_degree(exactness_degree);
    QuadratureRule rule;
    rule.exactness = exactness_degree;
    if (kind == ElementKind::Square) {
        const int n = exactness_degree / 2 + 1;
        const auto [x, w] = gauss_legendre(n);
        for (std::size_t j = 0; j < x.size(); ++j)
            for (std::size_t i = 0; i < x.size(); ++i) {
                rule.points.emplace_back(0.5 * (x[i] + 1.0), 0.5 * (x[j] + 1.0));
                rule.weights.push_back(0.25 * w[i] * w[j]);
            }
    } else {
        // x = xi (1 - eta), y = eta, dx dy = (1 - eta) dxi deta
        const auto [xs, ws] = gauss_legendre(exactness_degree / 2 + 1);
        const auto [xe, we] = gauss_legendre((exactness_degree + 1) / 2 + 1);
        for (std::size_t j = 0; j < xe.size(); ++j) {
            const double eta = 0.5 * (xe[j] + 1.0);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double xi = 0.5 * (xs[i] + 1.0);
                rule.points.emplace_back(xi * (1.0 - eta), eta);
                rule.weights.push_back(0.25 * ws[i] * we[j] * (1.0 - eta));
            }
        }
    }
    return rule;
}

/// Maps a reference rule onto a physical element through the affine map fixed by its first
/// vertices (v0, v1, v2 for triangles; v0, v1, v3 for parallelogram squares).
inline QuadratureRule map_to_element(const QuadratureRule& ref, const Element& element) {
    const auto& v = element.vertices;
    Eigen::Matrix2d jac;
    if (v.size() == 3) {
        jac.col(0) = v[1] - v[0];
        jac.col(1) = v[2] - v[0];
    } else if (v.size() == 4) {
        jac.col(0) = v[1] - v[0];
        jac.col(1) = v[3] - v[0];
    } else {
        throw ParameterError("only triangles and parallelograms are supported");
    }
    const double det = std::abs(jac.determinant());
    QuadratureRule out;
    out.exactness = ref.exactness;
    out.points.reserve(ref.size());
    out.weights.reserve(ref.size());
    for (std::size_t q = 0; q < ref.size(); ++q) {
        out.points.push_back(v[0] + jac * ref.points[q]);
        out.weights.push_back(ref.weights[q] * det);
    }
    return out;
}

inline QuadratureRule element_quadrature(const Element& element, int exactness_degree) {
    const ElementKind kind = element.vertices.size() == 3 ? ElementKind::Triangle : ElementKind::Square;
    return map_to_element(element_quadrature(kind, exactness_degree), element);
}

/// Gauss-Legendre on [0, 1] in the normalized face parameter; weights sum to 1.
inline FaceQuadrature face_quadrature(int exactness_degree) {
    detail::check_degree(exactness_degree);
    const auto [x, w] = gauss_legendre(exactness_degree / 2 + 1);
    FaceQuadrature rule;
    rule.exactness = exactness_degree;
    for (std::size_t i = 0; i < x.size(); ++i) {
        rule.params.push_back(0.5 * (x[i] + 1.0));
        rule.points.emplace_back(0.5 * (x[i] + 1.0), 0.0);
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

inline FaceQuadrature face_quadrature(const Face& face, int exactness_degree) {
    FaceQuadrature rule = face_quadrature(exactness_degree);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        rule.points[i] = face.at(rule.params[i]);
        rule.weights[i] *= face.length;
    }
    return rule;
}

} // namespace hdgvl
