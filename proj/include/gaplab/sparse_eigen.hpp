#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "gaplab/common.hpp"
#include "gaplab/error.hpp"

namespace gaplab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SparseEigenOptions {
  int count = 1;          // eigenpairs wanted
  int block = 0;          // subspace size, 0 = automatic
  double tol = 1e-9;      // relative residual
  int max_iterations = 3000;
  double shift = 0.0;     // must lie strictly below the smallest eigenvalue
  std::uint64_t seed = 12345;
};

struct SparseEigenResult {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // columns, B-orthonormal
  int iterations = 0;
  double max_residual = 0;
};

namespace detail {

class ShiftedFactor {
 public:
  ShiftedFactor(const SparseMatrix& a, const Eigen::VectorXd& b, double shift) : shift_(shift) {
    SparseMatrix m = a;
    for (int i = 0; i < m.rows(); ++i) m.coeffRef(i, i) -= shift * b[i];
    m.makeCompressed();
    solver_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
    solver_->compute(m);
    ok_ = solver_->info() == Eigen::Success;
    if (ok_) {
      const Eigen::VectorXd& d = solver_->vectorD();
      for (int i = 0; i < d.size(); ++i)
        if (!(d[i] > 0)) {
          ok_ = false;
          break;
        }
    }
  }

  bool positive_definite() const { return ok_; }
  double shift() const { return shift_; }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return solver_->solve(rhs); }

 private:
  double shift_;
  bool ok_ = false;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> solver_;
};

// Makes the columns of y orthonormal in the inner product diag(b).
inline void b_orthonormalize(Eigen::MatrixXd& y, const Eigen::VectorXd& b) {
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd g = y.transpose() * b.asDiagonal() * y;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
      // Fall back to modified Gram-Schmidt on nearly dependent blocks.
      for (int j = 0; j < y.cols(); ++j) {
        for (int i = 0; i < j; ++i) y.col(j) -= (y.col(i).cwiseProduct(b)).dot(y.col(j)) * y.col(i);
        double nrm = std::sqrt(y.col(j).cwiseProduct(b).dot(y.col(j)));
        if (!(nrm > 1e-300)) throw SolverFailed("subspace collapsed");
        y.col(j) /= nrm;
      }
      continue;
    }
    const Eigen::MatrixXd l = llt.matrixL();
    y = l.triangularView<Eigen::Lower>().solve(y.transpose()).transpose();
  }
}

}  // namespace detail

// Smallest eigenpairs of the pencil A x = lambda B x, with A sparse symmetric and
// B = diag(b) positive. Shift-invert block subspace iteration with Rayleigh-Ritz;
// the shift is moved towards the spectrum when convergence is slow, each move
// being validated by the inertia of the LDL^T factorization.
inline SparseEigenResult smallest_eigenpairs(const SparseMatrix& a, const Eigen::VectorXd& b,
                                             const SparseEigenOptions& opt) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n || b.size() != n) throw SolverFailed("inconsistent matrix sizes");
  const int k = opt.count;
  int p = opt.block > 0 ? opt.block : std::max(k + 4, 2 * k);
  p = std::min(p, n);
  if (k > p) throw SolverFailed("requested more eigenpairs than unknowns");

  if (n <= 400) {
    // Small problems: dense generalized solve.
    Eigen::MatrixXd ad = Eigen::MatrixXd(a);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ad, Eigen::MatrixXd(b.asDiagonal()));
    if (es.info() != Eigen::Success) throw SolverFailed("dense generalized eigensolver failed");
    SparseEigenResult r;
    for (int j = 0; j < k; ++j) r.values.push_back(es.eigenvalues()[j]);
    r.vectors = es.eigenvectors().leftCols(k);
    return r;
  }

  auto factor = std::make_unique<detail::ShiftedFactor>(a, b, opt.shift);
  if (!factor->positive_definite()) throw SolverFailed("initial shift is not below the spectrum");

  Rng rng(opt.seed);
  Eigen::MatrixXd x(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
  detail::b_orthonormalize(x, b);

  Eigen::VectorXd ritz = Eigen::VectorXd::Zero(p);
  SparseEigenResult out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXd y = factor->solve(b.asDiagonal() * x);
    detail::b_orthonormalize(y, b);
    const Eigen::MatrixXd ay = a * y;
    Eigen::MatrixXd h = y.transpose() * ay;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw SolverFailed("Rayleigh-Ritz step failed");
    ritz = es.eigenvalues();
    x = y * es.eigenvectors();
    const Eigen::MatrixXd ax = ay * es.eigenvectors();

    double worst = 0;
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd bx = b.cwiseProduct(x.col(j));
      const double res = (ax.col(j) - ritz[j] * bx).norm();
      // Scaled by the largest wanted eigenvalue so a null mode can converge.
      const double lam = std::max(std::abs(ritz[j]), std::abs(ritz[k - 1]));
      const double scale = ax.col(j).norm() + lam * bx.norm();
      worst = std::max(worst, res / std::max(scale, 1e-300));
    }
    out.iterations = it;
    out.max_residual = worst;
    if (worst < opt.tol) break;
    if (it == opt.max_iterations) throw SolverFailed("subspace iteration did not converge");

    // Shift update: only towards the spectrum, never past its bottom.
    if (it % 6 == 0 && p > k) {
      const double sigma = factor->shift();
      const double rate = (ritz[k - 1] - sigma) / (ritz[p - 1] - sigma);
      if (rate > 0.25) {
        double gap = ritz[std::min(k, p - 1)] - ritz[0];
        double cand = ritz[0] - 0.5 * std::max(gap, 1e-12 * std::abs(ritz[0]));
        for (int tries = 0; tries < 6 && cand > sigma; ++tries) {
          auto next = std::make_unique<detail::ShiftedFactor>(a, b, cand);
          if (next->positive_definite()) {
            factor = std::move(next);
            break;
          }
          cand = 0.5 * (cand + sigma);
        }
      }
    }
  }
  for (int j = 0; j < k; ++j) out.values.push_back(ritz[j]);
  out.vectors = x.leftCols(k);
  return out;
}

}  // namespace gaplab
