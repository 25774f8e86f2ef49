#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace hdgvl {

using Point = Eigen::Vector2d;
using Vector2 = Eigen::Vector2d;

enum class ElementKind { Triangle, Square };

/// Which pair of numerical traces is promoted to global unknowns.
///   TypeI:   (u_check, phi_hat)
///   TypeII:  (sigma_check, u_hat)
///   TypeIII: (u_check, u_hat)
enum class Hybridization { TypeI, TypeII, TypeIII };

/// Homogeneous boundary conditions on the whole boundary.
///   Electric:  phi = 0, u.n_perp = 0
///   Magnetic:  sigma = 0, u.n = 0
///   Dirichlet: u = 0
enum class BoundaryKind { Electric, Magnetic, Dirichlet };

inline constexpr std::string_view to_string(ElementKind kind) {
    return kind == ElementKind::Triangle ? "triangles" : "squares";
}

inline constexpr std::string_view to_string(Hybridization hyb) {
    switch (hyb) {
    case Hybridization::TypeI: return "TypeI";
    case Hybridization::TypeII: return "TypeII";
    case Hybridization::TypeIII: return "TypeIII";
    }
    return "?";
}

inline constexpr std::string_view to_string(BoundaryKind bc) {
    switch (bc) {
    case BoundaryKind::Electric: return "electric";
    case BoundaryKind::Magnetic: return "magnetic";
    case BoundaryKind::Dirichlet: return "dirichlet";
    }
    return "?";
}

/// (a, b)^perp = (b, -a). Face tangents are t = n^perp.
inline Vector2 perp(const Vector2& v) { return {v.y(), -v.x()}; }

} // namespace hdgvl
