#pragma once

#include "hdgvl/errors.hpp"
#include "hdgvl/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace hdgvl {

struct Element {
    int id = -1;
    std::vector<Point> vertices; // counter-clockwise
    double area = 0.0;
    double diameter = 0.0;
    Point centroid = Point::Zero();
    /// Local face i joins vertices i and i+1 (mod vertex count).
    std::vector<int> faces;

    int num_faces() const { return static_cast<int>(faces.size()); }
};

struct Face {
    int id = -1;
    Point a = Point::Zero();
    Point b = Point::Zero();
    Vector2 normal = Vector2::Zero();  // unit; outward on the boundary, lower -> higher element id inside
    Vector2 tangent = Vector2::Zero(); // normal^perp
    double length = 0.0;
    /// elements[0] is the lower id; elements[1] == -1 on the boundary.
    std::array<int, 2> elements{-1, -1};
    /// Local face index of this face inside elements[0] / elements[1].
    std::array<int, 2> local_index{-1, -1};
    bool is_boundary = false;

    Point midpoint() const { return 0.5 * (a + b); }
    /// Point at normalized parameter s in [0, 1] along a -> b.
    Point at(double s) const { return a + s * (b - a); }
};

struct FaceGeometry {
    Vector2 normal;
    Vector2 tangent;
    double length;
    Point midpoint;
};

class Mesh {
public:
    Mesh() = default;

    int level() const { return level_; }
    ElementKind element_kind() const { return kind_; }
    double h_reported() const { return h_reported_; }

    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Face>& faces() const { return faces_; }
    int num_elements() const { return static_cast<int>(elements_.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }

    const Element& element(int id) const {
        if (id < 0 || id >= num_elements())
            throw IndexError("element id " + std::to_string(id) + " out of range");
        return elements_[static_cast<std::size_t>(id)];
    }

    const Face& face(int id) const {
        if (id < 0 || id >= num_faces())
            throw IndexError("face id " + std::to_string(id) + " out of range");
        return faces_[static_cast<std::size_t>(id)];
    }

    FaceGeometry face_geometry(int face_id) const {
        const Face& f = face(face_id);
        return {f.normal, f.tangent, f.length, f.midpoint()};
    }

    /// +1 iff the element's outward normal on that face equals the global face normal.
    int element_face_sign(int element_id, int local_face) const {
        const Element& e = element(element_id);
        if (local_face < 0 || local_face >= e.num_faces())
            throw IndexError("local face index " + std::to_string(local_face) + " out of range");
        const Face& f = faces_[static_cast<std::size_t>(e.faces[static_cast<std::size_t>(local_face)])];
        return f.elements[0] == element_id ? 1 : -1;
    }

    /// Plain-text dump: "E <id> <x1> <y1> ..." per element, "F <id> <elemA> <elemB|-1> <nx> <ny>" per face.
    void dump(std::ostream& os) const {
        const auto old_precision = os.precision(17);
        for (const auto& e : elements_) {
            os << "E " << e.id;
            for (const auto& v : e.vertices) os << ' ' << v.x() << ' ' << v.y();
            os << '\n';
        }
        for (const auto& f : faces_) {
            os << "F " << f.id << ' ' << f.elements[0] << ' ' << f.elements[1] << ' ' << f.normal.x() << ' '
               << f.normal.y() << '\n';
        }
        os.precision(old_precision);
    }

    friend Mesh build_mesh(const std::vector<Point>& vertices, const std::vector<std::vector<int>>& cells,
                           ElementKind kind, int level, double h_reported);

private:
    int level_ = 0;
    ElementKind kind_ = ElementKind::Square;
    double h_reported_ = 1.0;
    std::vector<Element> elements_;
    std::vector<Face> faces_;
};

namespace detail {

inline double signed_area(const std::vector<Point>& v) {
    double twice = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * twice;
}

inline Point polygon_centroid(const std::vector<Point>& v, double area) {
    Point c = Point::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        const double cross = p.x() * q.y() - q.x() * p.y();
        c += (p + q) * cross;
    }
    return c / (6.0 * area);
}

inline double polygon_diameter(const std::vector<Point>& v) {
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
}

} // namespace detail

/// Mesh from a vertex list and cells given as counter-clockwise vertex-id lists (3 ids for
/// triangles, 4 for quadrilaterals). Faces get ids in order of first appearance.
inline Mesh build_mesh(const std::vector<Point>& vertices, const std::vector<std::vector<int>>& cells,
                       ElementKind kind, int level, double h_reported) {
    const std::size_t nv_expected = kind == ElementKind::Triangle ? 3 : 4;
    Mesh mesh;
    mesh.level_ = level;
    mesh.kind_ = kind;
    mesh.h_reported_ = h_reported;

    std::map<std::pair<int, int>, int> edge_to_face;
    for (std::size_t e = 0; e < cells.size(); ++e) {
        const auto& ids = cells[e];
        if (ids.size() != nv_expected)
            throw ParameterError("cell " + std::to_string(e) + " has the wrong vertex count");
        Element el;
        el.id = static_cast<int>(e);
        for (int v : ids) {
            if (v < 0 || v >= static_cast<int>(vertices.size())) throw IndexError("cell vertex id out of range");
            el.vertices.push_back(vertices[static_cast<std::size_t>(v)]);
        }
        el.area = detail::signed_area(el.vertices);
        if (!(el.area > 0.0)) throw ParameterError("cell " + std::to_string(e) + " is not counter-clockwise");
        if (nv_expected == 4) {
            const auto& v = el.vertices;
            if ((v[0] + v[2] - v[1] - v[3]).norm() > 1e-12 * detail::polygon_diameter(v))
                throw ParameterError("cell " + std::to_string(e) + " is not a parallelogram");
        }
        el.diameter = detail::polygon_diameter(el.vertices);
        el.centroid = detail::polygon_centroid(el.vertices, el.area);

        const std::size_t nv = ids.size();
        for (std::size_t lf = 0; lf < nv; ++lf) {
            const int va = ids[lf], vb = ids[(lf + 1) % nv];
            const auto key = std::minmax(va, vb);
            auto it = edge_to_face.find(key);
            if (it == edge_to_face.end()) {
                Face f;
                f.id = static_cast<int>(mesh.faces_.size());
                f.a = vertices[static_cast<std::size_t>(va)];
                f.b = vertices[static_cast<std::size_t>(vb)];
                const Vector2 d = f.b - f.a;
                f.length = d.norm();
                f.normal = Vector2(d.y(), -d.x()) / f.length; // outward for a CCW element
                f.tangent = perp(f.normal);
                f.elements = {el.id, -1};
                f.local_index = {static_cast<int>(lf), -1};
                edge_to_face.emplace(key, f.id);
                el.faces.push_back(f.id);
                mesh.faces_.push_back(f);
            } else {
                Face& f = mesh.faces_[static_cast<std::size_t>(it->second)];
                if (f.elements[1] != -1) throw InternalError("face shared by more than two elements");
                f.elements[1] = el.id;
                f.local_index[1] = static_cast<int>(lf);
                el.faces.push_back(f.id);
            }
        }
        mesh.elements_.push_back(std::move(el));
    }
    for (auto& f : mesh.faces_) f.is_boundary = f.elements[1] == -1;
    return mesh;
}

/// Uniform partition of the unit square into cells_per_side^2 squares, optionally each split
/// into two triangles by its lower-left to upper-right diagonal. Used directly by test
/// fixtures that need a single-cell mesh.
inline Mesh build_uniform_mesh(int cells_per_side, ElementKind kind, int level, double h_reported) {
    if (cells_per_side < 1) throw ParameterError("cells_per_side must be positive");
    const int n = cells_per_side;
    const double hc = 1.0 / n;
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) vertices.emplace_back(i * hc, j * hc);

    std::vector<std::vector<int>> cells;
    cells.reserve(static_cast<std::size_t>(kind == ElementKind::Square ? n * n : 2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            if (kind == ElementKind::Square) {
                cells.push_back({v00, v10, v11, v01});
            } else {
                cells.push_back({v00, v10, v11});
                cells.push_back({v00, v11, v01});
            }
        }
    }
    return build_mesh(vertices, cells, kind, level, h_reported);
}

inline constexpr int kMinMeshLevel = 1;
inline constexpr int kMaxMeshLevel = 12;

/// 2^level x 2^level squares (or twice as many triangles) on the unit square, h = 2^-level.
inline Mesh build_structured_mesh(int level, ElementKind kind) {
    if (level < kMinMeshLevel || level > kMaxMeshLevel)
        throw ParameterError("mesh level must be in [1, 12], got " + std::to_string(level));
    const int n = 1 << level;
    return build_uniform_mesh(n, kind, level, std::ldexp(1.0, -level));
}

} // namespace hdgvl
