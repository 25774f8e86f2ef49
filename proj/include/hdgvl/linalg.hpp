#pragma once

#include "hdgvl/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <vector>

namespace hdgvl {

using DenseVector = Eigen::VectorXd;

/// Symmetric sparse matrix stored as its lower triangle in compressed sparse columns.
class SymmetricSparse {
public:
    using Storage = Eigen::SparseMatrix<double, Eigen::ColMajor>;
    using Triplet = Eigen::Triplet<double>;

    SymmetricSparse() = default;
    explicit SymmetricSparse(Eigen::Index n) : lower_(n, n) {}

    /// Entries with row < col are mirrored into the lower triangle; duplicates are summed in
    /// insertion order. Every diagonal entry is materialized (possibly as an explicit zero).
    static SymmetricSparse from_triplets(Eigen::Index n, const std::vector<Triplet>& entries) {
        std::vector<Triplet> lower;
        lower.reserve(entries.size() + static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) lower.emplace_back(i, i, 0.0);
        for (const auto& t : entries) {
            if (t.row() < 0 || t.col() < 0 || t.row() >= n || t.col() >= n)
                throw IndexError("triplet index out of range");
            if (t.row() >= t.col())
                lower.push_back(t);
            else
                lower.emplace_back(t.col(), t.row(), t.value());
        }
        SymmetricSparse a(n);
        a.lower_.setFromTriplets(lower.begin(), lower.end());
        a.lower_.makeCompressed();
        return a;
    }

    static SymmetricSparse from_dense(const Eigen::MatrixXd& dense) {
        std::vector<Triplet> entries;
        for (Eigen::Index j = 0; j < dense.cols(); ++j)
            for (Eigen::Index i = j; i < dense.rows(); ++i)
                if (dense(i, j) != 0.0) entries.emplace_back(i, j, dense(i, j));
        return from_triplets(dense.rows(), entries);
    }

    Eigen::Index size() const { return lower_.rows(); }
    const Storage& lower() const { return lower_; }

    Eigen::MatrixXd to_dense() const {
        const Eigen::MatrixXd l = Eigen::MatrixXd(lower_);
        Eigen::MatrixXd d = l + l.transpose();
        d.diagonal() = l.diagonal();
        return d;
    }

    double diagonal(Eigen::Index i) const { return lower_.coeff(i, i); }

    /// Both triangles, compressed.
    Storage full() const {
        Storage a = lower_.selfadjointView<Eigen::Lower>();
        a.makeCompressed();
        return a;
    }

private:
    Storage lower_;
};

/// y = A x using the implicit upper triangle.
inline DenseVector spmv(const SymmetricSparse& a, const DenseVector& x) {
    if (x.size() != a.size()) throw ParameterError("spmv: size mismatch");
    DenseVector y = a.lower().selfadjointView<Eigen::Lower>() * x;
    return y;
}

/// Sparse LL^T factorization (fill-reducing AMD ordering). Immutable once built, so
/// concurrent solves with distinct right-hand sides are safe.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const SymmetricSparse& a) : n_(a.size()) {
        if (n_ == 0) return;
        llt_.compute(a.lower());
        if (llt_.info() != Eigen::Success) throw NotSpdError("Cholesky factorization hit a non-positive pivot");
    }

    Eigen::Index size() const { return n_; }

    DenseVector solve(const DenseVector& b) const {
        if (b.size() != n_) throw ParameterError("cholesky_solve: size mismatch");
        if (n_ == 0) return DenseVector();
        DenseVector x = llt_.solve(b);
        return x;
    }

private:
    Eigen::Index n_;
    Eigen::SimplicialLLT<SymmetricSparse::Storage, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
};

inline CholeskyFactor cholesky_factor(const SymmetricSparse& a) { return CholeskyFactor(a); }
inline DenseVector cholesky_solve(const CholeskyFactor& fact, const DenseVector& b) { return fact.solve(b); }

/// Sparse LU with partial pivoting on the full matrix, for symmetric indefinite systems.
class LuFactor {
public:
    explicit LuFactor(const SymmetricSparse& a) : n_(a.size()) {
        if (n_ == 0) return;
        full_ = a.full();
        lu_.analyzePattern(full_);
        lu_.factorize(full_);
        if (lu_.info() != Eigen::Success) throw NumericalDegeneracyError("sparse LU failed: " + lu_.lastErrorMessage());
    }

    Eigen::Index size() const { return n_; }

    DenseVector solve(const DenseVector& b) const {
        if (b.size() != n_) throw ParameterError("lu_solve: size mismatch");
        if (n_ == 0) return DenseVector();
        DenseVector x = lu_.solve(b);
        return x;
    }

private:
    Eigen::Index n_;
    SymmetricSparse::Storage full_;
    Eigen::SparseLU<SymmetricSparse::Storage, Eigen::COLAMDOrdering<int>> lu_;
};

struct CgResult {
    DenseVector x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Conjugate gradient, optionally Jacobi-preconditioned; stops when ||b - A x|| <= tol ||b||.
inline CgResult cg_solve(const SymmetricSparse& a, const DenseVector& b, double tol, int maxit, bool diag_precond) {
    const Eigen::Index n = a.size();
    if (b.size() != n) throw ParameterError("cg_solve: size mismatch");
    CgResult result;
    result.x = DenseVector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return result;

    DenseVector inv_diag = DenseVector::Ones(n);
    if (diag_precond) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = a.diagonal(i);
            if (!(d > 0.0)) throw NotSpdError("non-positive diagonal entry in CG preconditioner");
            inv_diag[i] = 1.0 / d;
        }
    }

    DenseVector r = b;
    DenseVector z = inv_diag.cwiseProduct(r);
    DenseVector p = z;
    double rz = r.dot(z);
    double rnorm = bnorm;
    for (int it = 1; it <= maxit; ++it) {
        const DenseVector ap = spmv(a, p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) throw NotSpdError("CG encountered a non-positive curvature direction");
        const double step = rz / pap;
        result.x += step * p;
        r -= step * ap;
        rnorm = r.norm();
        result.iterations = it;
        result.relative_residual = rnorm / bnorm;
        if (rnorm <= tol * bnorm) return result;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw ConvergenceError("CG did not converge in " + std::to_string(maxit) + " iterations (relative residual " +
                               std::to_string(rnorm / bnorm) + ")",
                           rnorm / bnorm);
}

} // namespace hdgvl
