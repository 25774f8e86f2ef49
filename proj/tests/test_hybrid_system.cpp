#include "hdgvl/hdgvl.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace hdgvl;

namespace {

constexpr Hybridization kAllTypes[] = {Hybridization::TypeI, Hybridization::TypeII, Hybridization::TypeIII};
constexpr BoundaryKind kAllBcs[] = {BoundaryKind::Electric, BoundaryKind::Magnetic, BoundaryKind::Dirichlet};

// Which boundary quantities the boundary condition prescribes:
//   electric  u x n = 0, phi = 0;  magnetic  u . n = 0, sigma = 0;  dirichlet  u = 0.
bool prescribed(bool tangential, TraceMode mode, BoundaryKind bc) {
    if (mode == TraceMode::Displacement)
        return bc == BoundaryKind::Dirichlet ||
               (tangential ? bc == BoundaryKind::Electric : bc == BoundaryKind::Magnetic);
    return tangential ? bc == BoundaryKind::Magnetic : bc == BoundaryKind::Electric;
}

int expected_dofs(const Mesh& m, int k, Hybridization hyb, BoundaryKind bc) {
    const TraceModes modes = trace_modes(hyb);
    int n = 0;
    for (const Face& f : m.faces()) {
        if (!f.is_boundary || !prescribed(true, modes.tangential, bc)) n += k + 1;
        if (!f.is_boundary || !prescribed(false, modes.normal, bc)) n += k + 1;
    }
    return n;
}

Discretization make_disc(const Mesh& mesh, int k, Hybridization hyb, BoundaryKind bc, StabilizationParams params = {}) {
    DiscretizationOptions o;
    o.degree = k;
    o.hybridization = hyb;
    o.boundary = bc;
    o.params = params;
    return discretize(mesh, o);
}

struct Inertia {
    int positive = 0, negative = 0, zero = 0;
};

Inertia inertia(const Eigen::MatrixXd& a, double tol) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    Inertia r;
    for (double l : eig.eigenvalues()) {
        if (l > tol)
            ++r.positive;
        else if (l < -tol)
            ++r.negative;
        else
            ++r.zero;
    }
    return r;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<Eigen::VectorXd> random_loads(const Discretization& disc, std::mt19937& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::VectorXd> loads;
    for (const LocalOperators& op : disc.local) {
        Eigen::VectorXd v(2 * op.dim);
        for (auto& x : v) x = u(gen);
        loads.push_back(v);
    }
    return loads;
}

} // namespace

TEST(DofMap, CountsAtLevelTwo) {
    const Mesh m = build_structured_mesh(2, ElementKind::Square);
    EXPECT_EQ(build_trace_dofmap(m, 0, Hybridization::TypeIII, BoundaryKind::Dirichlet).num_dofs, 48);
    EXPECT_EQ(build_trace_dofmap(m, 0, Hybridization::TypeI, BoundaryKind::Dirichlet).num_dofs, 64);
    EXPECT_EQ(build_trace_dofmap(m, 0, Hybridization::TypeII, BoundaryKind::Dirichlet).num_dofs, 64);
}

TEST(DofMap, CountsMatchBoundaryTable) {
    for (ElementKind kind : {ElementKind::Triangle, ElementKind::Square}) {
        const Mesh m = build_structured_mesh(3, kind);
        for (int k : {0, 2})
            for (Hybridization hyb : kAllTypes)
                for (BoundaryKind bc : kAllBcs) {
                    const DofMap map = build_trace_dofmap(m, k, hyb, bc);
                    EXPECT_EQ(map.num_dofs, expected_dofs(m, k, hyb, bc));
                    std::vector<int> hits(static_cast<std::size_t>(map.num_dofs), 0);
                    for (const auto& dofs : map.element_dofs)
                        for (int g : dofs)
                            if (g >= 0) ++hits[static_cast<std::size_t>(g)];
                    for (int g = 0; g < map.num_dofs; ++g) EXPECT_GE(hits[static_cast<std::size_t>(g)], 1);
                }
    }
    EXPECT_THROW(build_trace_dofmap(build_structured_mesh(1, ElementKind::Square), -1, Hybridization::TypeI,
                                    BoundaryKind::Electric),
                 ParameterError);
}

TEST(GlobalSystem, TypeIIIIsPositiveDefinite) {
    for (ElementKind kind : {ElementKind::Triangle, ElementKind::Square})
        for (BoundaryKind bc : kAllBcs) {
            const Mesh m = build_structured_mesh(2, kind);
            const Discretization d = make_disc(m, 1, Hybridization::TypeIII, bc);
            const GlobalSystem sys =
                assemble_global(m, d.local, d.dofmap, std::vector<Eigen::VectorXd>(m.num_elements(),
                                                                                   Eigen::VectorXd::Zero(2 * 3)));
            const Eigen::MatrixXd a = sys.matrix.to_dense();
            const Inertia in = inertia(a, 1e-10 * max_abs(a));
            EXPECT_EQ(in.positive, a.rows());
            EXPECT_NO_THROW(CholeskyFactor{sys.matrix});
        }
}

TEST(GlobalSystem, TypesIAndIIInertia) {
    // one positive eigenvalue per displacement dof, one negative per flux dof
    for (ElementKind kind : {ElementKind::Triangle, ElementKind::Square})
        for (Hybridization hyb : {Hybridization::TypeI, Hybridization::TypeII})
            for (BoundaryKind bc : kAllBcs) {
                const Mesh m = build_structured_mesh(2, kind);
                const Discretization d = make_disc(m, 1, hyb, bc);
                const GlobalSystem sys = assemble_global(
                    m, d.local, d.dofmap, std::vector<Eigen::VectorXd>(m.num_elements(), Eigen::VectorXd::Zero(6)));
                const TraceModes modes = trace_modes(hyb);
                int disp = 0, flux = 0;
                for (const auto& off : d.dofmap.face_offsets) {
                    if (off[0] >= 0) (modes.tangential == TraceMode::Displacement ? disp : flux) += 2;
                    if (off[1] >= 0) (modes.normal == TraceMode::Displacement ? disp : flux) += 2;
                }
                const Eigen::MatrixXd a = sys.matrix.to_dense();
                const Inertia in = inertia(a, 1e-10 * max_abs(a));
                EXPECT_EQ(in.zero, 0);
                EXPECT_EQ(in.positive, disp);
                EXPECT_EQ(in.negative, flux);
                EXPECT_THROW(CholeskyFactor{sys.matrix}, NotSpdError);
            }
}

TEST(GlobalSystem, EnergyFormHasKernelForTypeI) {
    // k = 0 triangles: data eta = grad(psi) . t for an interior hat function psi, lambda = 0,
    // gives zero local fields Sigma, Phi and zero energy
    const Mesh m = build_structured_mesh(2, ElementKind::Triangle);
    const Discretization d = make_disc(m, 0, Hybridization::TypeI, BoundaryKind::Dirichlet);
    Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(d.dofmap.num_dofs, d.dofmap.num_dofs);
    Eigen::MatrixXd jump = energy;
    for (const Element& e : m.elements()) {
        const auto ue = static_cast<std::size_t>(e.id);
        const Eigen::MatrixXd ae = energy_element_matrix(d.local[ue]);
        const Eigen::MatrixXd aj = jump_element_matrix(d.local[ue]);
        const auto& dofs = d.dofmap.element_dofs[ue];
        const auto& signs = d.dofmap.element_signs[ue];
        for (std::size_t i = 0; i < dofs.size(); ++i)
            for (std::size_t j = 0; j < dofs.size(); ++j) {
                if (dofs[i] < 0 || dofs[j] < 0) continue;
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                energy(dofs[i], dofs[j]) += signs[i] * signs[j] * ae(ii, jj);
                jump(dofs[i], dofs[j]) += signs[i] * signs[j] * aj(ii, jj);
            }
    }
    const Point centre(0.5, 0.5);
    auto psi = [&](const Point& p) { return (p - centre).norm() < 1e-12 ? 1.0 : 0.0; };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d.dofmap.num_dofs);
    for (const Face& f : m.faces()) {
        const int off = d.dofmap.face_offsets[static_cast<std::size_t>(f.id)][kTangentialField];
        if (off < 0) continue;
        // integral of grad psi . t over the face, t = -(b - a) / |F|, times q_0 = |F|^-1/2
        x[off] = (psi(f.a) - psi(f.b)) / std::sqrt(f.length);
    }
    ASSERT_GT(x.norm(), 0.5);
    EXPECT_LT((energy * x).norm(), 1e-12 * max_abs(energy) * x.norm());
    EXPECT_GT((jump * x).norm(), 1e-3 * x.norm());
}

TEST(GlobalSolve, ZeroSourceGivesZero) {
    const Mesh m = build_structured_mesh(2, ElementKind::Triangle);
    for (Hybridization hyb : kAllTypes) {
        const Discretization d = make_disc(m, 1, hyb, BoundaryKind::Dirichlet);
        const HdgSolution s = solve_hdg(d, [](const Point&) { return Vector2(0.0, 0.0); });
        EXPECT_EQ(s.traces.norm(), 0.0);
        for (const LocalFields& lf : s.fields.elements) EXPECT_EQ(lf.u.norm(), 0.0);
    }
}

TEST(GlobalSolve, SingleCellMesh) {
    const Mesh m = build_uniform_mesh(1, ElementKind::Square, 0, 1.0);
    const ManufacturedSolution exact = manufactured_case(ExperimentId::Exp3Dirichlet);
    const Discretization d3 = make_disc(m, 2, Hybridization::TypeIII, BoundaryKind::Dirichlet);
    EXPECT_EQ(d3.dofmap.num_dofs, 0);
    const HdgSolution s3 = solve_hdg(d3, exact.f);
    const Discretization d1 = make_disc(m, 2, Hybridization::TypeI, BoundaryKind::Dirichlet);
    EXPECT_EQ(d1.dofmap.num_dofs, 4 * 3);
    const HdgSolution s1 = solve_hdg(d1, exact.f);
    EXPECT_TRUE(s3.fields.elements[0].u.allFinite());
    EXPECT_LT((s1.fields.elements[0].u - s3.fields.elements[0].u).norm(), 1e-10);
}

TEST(GlobalSolve, ConjugateGradientAgreesWithCholesky) {
    const Mesh m = build_structured_mesh(3, ElementKind::Triangle);
    const ManufacturedSolution exact = manufactured_case(ExperimentId::Exp1Electric);
    const Discretization d = make_disc(m, 2, Hybridization::TypeIII, exact.boundary);
    SolverOptions chol;
    chol.choice = SolverChoice::Cholesky;
    SolverOptions cg;
    cg.choice = SolverChoice::ConjugateGradient;
    cg.tolerance = 1e-13;
    const HdgSolution a = solve_hdg(d, exact.f, chol);
    const HdgSolution b = solve_hdg(d, exact.f, cg);
    EXPECT_LT((a.traces - b.traces).norm(), 1e-9 * a.traces.norm());
    EXPECT_LE((spmv(a.system.matrix, a.traces) - a.system.load).norm(), 1e-12 * a.system.load.norm());
}

TEST(GlobalSolve, LuAgreesWithCholeskyOnTypeIII) {
    const Mesh m = build_structured_mesh(2, ElementKind::Square);
    const Discretization d = make_disc(m, 1, Hybridization::TypeIII, BoundaryKind::Magnetic);
    const VectorField f = [](const Point& p) { return Vector2(std::sin(3 * p.x()), p.y() * p.x()); };
    SolverOptions lu;
    lu.choice = SolverChoice::LU;
    const HdgSolution a = solve_hdg(d, f);
    const HdgSolution b = solve_hdg(d, f, lu);
    EXPECT_LT((a.traces - b.traces).norm(), 1e-11 * a.traces.norm());
}

TEST(GlobalSolve, ConservationAndBoundaryConditions) {
    std::mt19937 gen(17);
    for (ElementKind kind : {ElementKind::Triangle, ElementKind::Square})
        for (Hybridization hyb : kAllTypes)
            for (BoundaryKind bc : kAllBcs) {
                const Mesh m = build_structured_mesh(2, kind);
                StabilizationParams params;
                params.alpha = 0.5;
                params.tau = 3.0;
                const Discretization d = make_disc(m, 1, hyb, bc, params);
                const HdgSolution s = solve_hdg(d, random_loads(d, gen));
                double scale = 0.0;
                for (const LocalFields& lf : s.fields.elements)
                    scale = std::max({scale, max_abs(lf.sigma_check), max_abs(lf.phi_hat), max_abs(lf.u_tangential),
                                      max_abs(lf.u_normal)});
                const double tol = 1e-10 * scale;
                for (const Face& f : m.faces()) {
                    const LocalFields& l = s.fields.elements[static_cast<std::size_t>(f.elements[0])];
                    const int il = f.local_index[0];
                    if (!f.is_boundary) {
                        const LocalFields& r = s.fields.elements[static_cast<std::size_t>(f.elements[1])];
                        const int ir = f.local_index[1];
                        // single-valued flux traces, single-valued displacement traces
                        EXPECT_LT(max_abs(l.sigma_check.col(il) - r.sigma_check.col(ir)), tol);
                        EXPECT_LT(max_abs(l.phi_hat.col(il) - r.phi_hat.col(ir)), tol);
                        EXPECT_LT(max_abs(l.u_tangential.col(il) + r.u_tangential.col(ir)), tol);
                        EXPECT_LT(max_abs(l.u_normal.col(il) + r.u_normal.col(ir)), tol);
                        continue;
                    }
                    if (bc != BoundaryKind::Magnetic) {
                        EXPECT_LT(max_abs(l.u_tangential.col(il)), tol);
                    }
                    if (bc != BoundaryKind::Electric) {
                        EXPECT_LT(max_abs(l.u_normal.col(il)), tol);
                    }
                    if (bc == BoundaryKind::Electric) {
                        EXPECT_LT(max_abs(l.phi_hat.col(il)), tol);
                    }
                    if (bc == BoundaryKind::Magnetic) {
                        EXPECT_LT(max_abs(l.sigma_check.col(il)), tol);
                    }
                }
            }
}

TEST(GlobalSolve, HybridizationsAreEquivalent) {
    for (ElementKind kind : {ElementKind::Triangle, ElementKind::Square})
        for (int id : {1, 2, 3})
            for (int k : {0, 1, 2}) {
                const Mesh m = build_structured_mesh(2, kind);
                const ManufacturedSolution exact = manufactured_case(experiment_from_int(id));
                std::vector<HdgSolution> sols;
                for (Hybridization hyb : kAllTypes)
                    sols.push_back(solve_hdg(make_disc(m, k, hyb, exact.boundary), exact.f));
                for (int t = 0; t < 2; ++t)
                    for (int e = 0; e < m.num_elements(); ++e) {
                        const auto ue = static_cast<std::size_t>(e);
                        const LocalFields& a = sols[static_cast<std::size_t>(t)].fields.elements[ue];
                        const LocalFields& b = sols[2].fields.elements[ue];
                        const double sc = 1.0 + b.u.norm() + b.sigma.norm() + b.phi.norm();
                        EXPECT_LT((a.u - b.u).norm(), 1e-8 * sc);
                        EXPECT_LT((a.sigma - b.sigma).norm(), 1e-8 * sc);
                        EXPECT_LT((a.phi - b.phi).norm(), 1e-8 * sc);
                        EXPECT_LT(max_abs(a.sigma_check - b.sigma_check), 1e-8 * sc);
                        EXPECT_LT(max_abs(a.u_normal - b.u_normal), 1e-8 * sc);
                    }
            }
}

TEST(GlobalSolve, MinimizesEnergyForTypeIII) {
    const Mesh m = build_structured_mesh(2, ElementKind::Triangle);
    const ManufacturedSolution exact = manufactured_case(ExperimentId::Exp3Dirichlet);
    const Discretization d = make_disc(m, 1, Hybridization::TypeIII, exact.boundary);
    const HdgSolution s = solve_hdg(d, exact.f);
    const double j0 = energy_value(s.traces, s.system);
    std::mt19937 gen(3);
    std::normal_distribution<double> n(0.0, 1e-3);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd dx(s.traces.size());
        for (auto& v : dx) v = n(gen);
        // J(x + dx) - J(x) = 1/2 dx^T A dx > 0 at the minimizer
        const double gain = energy_value(s.traces + dx, s.system) - j0;
        EXPECT_GT(gain, 0.0);
        EXPECT_NEAR(gain, 0.5 * dx.dot(spmv(s.system.matrix, dx)), 1e-10 * std::abs(j0) + 1e-14);
    }
}

TEST(GlobalSolve, EnergyGradientByFiniteDifferences) {
    const Mesh m = build_structured_mesh(1, ElementKind::Square);
    const Discretization d = make_disc(m, 1, Hybridization::TypeIII, BoundaryKind::Electric);
    const HdgSolution s = solve_hdg(d, manufactured_case(ExperimentId::Exp1Electric).f);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(s.system.size(), -1.0, 1.0);
    const Eigen::VectorXd grad = spmv(s.system.matrix, x) - s.system.load;
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(x.size(), i);
        const double fd = (energy_value(x + h * e, s.system) - energy_value(x - h * e, s.system)) / (2 * h);
        EXPECT_NEAR(fd, grad[i], 1e-7 * (1.0 + std::abs(grad[i])));
    }
    EXPECT_THROW(energy_value(Eigen::VectorXd::Zero(1), s.system), ParameterError);
}

TEST(GlobalSolve, LinearInSource) {
    const Mesh m = build_structured_mesh(2, ElementKind::Square);
    for (Hybridization hyb : kAllTypes) {
        const Discretization d = make_disc(m, 1, hyb, BoundaryKind::Magnetic);
        const ManufacturedSolution exact = manufactured_case(ExperimentId::Exp2Magnetic);
        const HdgSolution a = solve_hdg(d, exact.f);
        const HdgSolution b = solve_hdg(d, [&](const Point& p) { return Vector2(-2.5 * exact.f(p)); });
        EXPECT_LT((b.traces + 2.5 * a.traces).norm(), 1e-11 * b.traces.norm());
    }
}

TEST(GlobalSolve, ReproducesPolynomialSolution) {
    // u = b (1, 1) with b = x(1-x)y(1-y) vanishes on the boundary and lies in P_4
    ManufacturedSolution poly;
    poly.boundary = BoundaryKind::Dirichlet;
    poly.u = [](const Point& p) {
        const double b = p.x() * (1 - p.x()) * p.y() * (1 - p.y());
        return Vector2(b, b);
    };
    auto bx = [](const Point& p) { return (1 - 2 * p.x()) * p.y() * (1 - p.y()); };
    auto by = [](const Point& p) { return p.x() * (1 - p.x()) * (1 - 2 * p.y()); };
    poly.sigma = [=](const Point& p) { return bx(p) - by(p); };
    poly.phi = [=](const Point& p) { return -bx(p) - by(p); };
    poly.f = [](const Point& p) {
        const double x = p.x(), y = p.y();
        const double bxx = -2 * y * (1 - y), byy = -2 * x * (1 - x), bxy = (1 - 2 * x) * (1 - 2 * y);
        // curl sigma = (sigma_y, -sigma_x), grad phi
        const Vector2 curl(bxy - byy, -(bxx - bxy));
        const Vector2 grad(-bxx - bxy, -bxy - byy);
        return Vector2(curl + grad);
    };
    for (ElementKind kind : {ElementKind::Triangle, ElementKind::Square})
        for (Hybridization hyb : kAllTypes) {
            const Mesh m = build_structured_mesh(1, kind);
            const int k = 4;
            const Discretization d = make_disc(m, k, hyb, poly.boundary);
            const HdgSolution s = solve_hdg(d, poly.f);
            const ErrorReport r = compute_errors(s.fields.elements, poly, m, d.bases, error_exactness(k));
            EXPECT_LT(r.e_u, 1e-10);
            EXPECT_LT(r.e_sigma, 1e-10);
            EXPECT_LT(r.e_phi, 1e-10);
            EXPECT_LT(r.e_sigma_check, 1e-10);
            EXPECT_LT(r.e_phi_hat, 1e-10);
        }
}

TEST(GlobalSystem, MatrixDumpRoundTrip) {
    const Mesh m = build_structured_mesh(1, ElementKind::Triangle);
    const Discretization d = make_disc(m, 1, Hybridization::TypeII, BoundaryKind::Electric);
    const HdgSolution s = solve_hdg(d, manufactured_case(ExperimentId::Exp1Electric).f);
    std::ostringstream os;
    write_matrix_coordinates(s.system, os);
    const Eigen::MatrixXd dense = s.system.matrix.to_dense();
    Eigen::MatrixXd back = Eigen::MatrixXd::Zero(dense.rows(), dense.cols());
    std::istringstream is(os.str());
    int i = 0, j = 0;
    double v = 0.0;
    int lines = 0;
    while (is >> i >> j >> v) {
        back(i, j) = v;
        ++lines;
    }
    EXPECT_EQ(lines, static_cast<int>(s.system.matrix.full().nonZeros()));
    EXPECT_EQ(max_abs(back - dense), 0.0);
}

TEST(GlobalSystem, AssemblyRejectsMismatchedInputs) {
    const Mesh m = build_structured_mesh(1, ElementKind::Square);
    const Discretization d = make_disc(m, 1, Hybridization::TypeIII, BoundaryKind::Dirichlet);
    const DofMap other = build_trace_dofmap(m, 1, Hybridization::TypeI, BoundaryKind::Dirichlet);
    const std::vector<Eigen::VectorXd> loads(m.num_elements(), Eigen::VectorXd::Zero(6));
    EXPECT_THROW(assemble_global(m, d.local, other, loads), InternalError);
    EXPECT_THROW(assemble_global(m, d.local, d.dofmap, {}), InternalError);
    EXPECT_THROW(reconstruct_fields(m, Eigen::VectorXd::Zero(1), d.dofmap, d.local, loads), ParameterError);
}
