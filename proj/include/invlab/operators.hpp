#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "invlab/domain.hpp"

namespace invlab {

/// Finite-difference Dirichlet realization of A = -Laplacian + q0 on the
/// interior nodes (3-point stencil in 1d, 5-point in 2d). Immutable after
/// construction; apply() is safe to call concurrently.
class DirichletOperator {
 public:
  DirichletOperator(const DomainSpec& spec, const ScalarField& q0);

  int size() const { return spec_->interior_count(); }
  const DomainSpec& spec() const { return *spec_; }
  const ScalarField& potential() const { return q0_; }

  void apply(const double* in, double* out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  /// -Laplacian part only (used by the wave/heat steppers which add q
  /// themselves when stepping a different potential).
  void apply_laplacian(const double* in, double* out) const;

  Eigen::SparseMatrix<double> assemble() const;

  /// <A v, v>_h; equals the discrete |grad v|^2 + <q0 v, v> quadratic form.
  double quadratic_form(const ScalarField& v) const;

 private:
  const DomainSpec* spec_;
  ScalarField q0_;
  double inv_h2_[2];
};

/// Symmetric positive-definite sparse factorization (LDL^T with AMD
/// ordering) exposing a re-entrant solve: the factor data is copied out of
/// Eigen once so concurrent solves share nothing mutable.
class SparseFactor {
 public:
  SparseFactor() = default;
  explicit SparseFactor(const Eigen::SparseMatrix<double>& A) { factorize(A); }

  void factorize(const Eigen::SparseMatrix<double>& A);
  bool ready() const { return n_ > 0; }
  int size() const { return n_; }

  /// x = A^{-1} b; thread-safe, allocates two local work vectors.
  void solve(const double* b, double* x) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  int n_ = 0;
  // L in compressed column form (unit diagonal omitted), D diagonal, and
  // the fill-reducing permutation: A = P^T L D L^T P.
  std::vector<int> col_ptr_, row_idx_;
  std::vector<double> val_;
  Eigen::VectorXd diag_;
  std::vector<int> perm_;  // scatter index: (P b)[perm_[i]] = b[i]
};

}  // namespace invlab
