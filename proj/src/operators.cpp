#include "invlab/operators.hpp"

#include <Eigen/SparseCholesky>

namespace invlab {

DirichletOperator::DirichletOperator(const DomainSpec& spec, const ScalarField& q0)
    : spec_(&spec), q0_(q0) {
  q0_.require_grid(spec, "build_laplacian");
  if (!q0_.all_finite()) throw numerical_error("build_laplacian: potential has non-finite values");
  inv_h2_[0] = 1.0 / (spec.h(0) * spec.h(0));
  inv_h2_[1] = spec.dim == 2 ? 1.0 / (spec.h(1) * spec.h(1)) : 0.0;
}

void DirichletOperator::apply_laplacian(const double* in, double* out) const {
  const int n = spec_->grid_points;
  if (spec_->dim == 1) {
    const double ih2 = inv_h2_[0];
    for (int i = 0; i < n; ++i) {
      double v = 2.0 * in[i];
      if (i > 0) v -= in[i - 1];
      if (i + 1 < n) v -= in[i + 1];
      out[i] = ih2 * v;
    }
    return;
  }
  const double ihx2 = inv_h2_[0];
  const double ihy2 = inv_h2_[1];
  const double diag = 2.0 * (ihx2 + ihy2);
  for (int j = 0; j < n; ++j) {
    const int row = j * n;
    for (int i = 0; i < n; ++i) {
      const int id = row + i;
      double v = diag * in[id];
      if (i > 0) v -= ihx2 * in[id - 1];
      if (i + 1 < n) v -= ihx2 * in[id + 1];
      if (j > 0) v -= ihy2 * in[id - n];
      if (j + 1 < n) v -= ihy2 * in[id + n];
      out[id] = v;
    }
  }
}

void DirichletOperator::apply(const double* in, double* out) const {
  apply_laplacian(in, out);
  const double* q = q0_.values.data();
  const int n = size();
  for (int i = 0; i < n; ++i) out[i] += q[i] * in[i];
}

Eigen::VectorXd DirichletOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != size()) throw dimension_error("operator apply: vector size mismatch");
  Eigen::VectorXd out(v.size());
  apply(v.data(), out.data());
  return out;
}

Eigen::SparseMatrix<double> DirichletOperator::assemble() const {
  const int n = spec_->grid_points;
  const int N = size();
  Eigen::SparseMatrix<double> A(N, N);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * 5);
  const double ihx2 = inv_h2_[0];
  const double ihy2 = inv_h2_[1];
  if (spec_->dim == 1) {
    for (int i = 0; i < N; ++i) {
      trip.emplace_back(i, i, 2.0 * ihx2 + q0_.values[i]);
      if (i > 0) trip.emplace_back(i, i - 1, -ihx2);
      if (i + 1 < N) trip.emplace_back(i, i + 1, -ihx2);
    }
  } else {
    const double diag = 2.0 * (ihx2 + ihy2);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int id = j * n + i;
        trip.emplace_back(id, id, diag + q0_.values[id]);
        if (i > 0) trip.emplace_back(id, id - 1, -ihx2);
        if (i + 1 < n) trip.emplace_back(id, id + 1, -ihx2);
        if (j > 0) trip.emplace_back(id, id - n, -ihy2);
        if (j + 1 < n) trip.emplace_back(id, id + n, -ihy2);
      }
    }
  }
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

double DirichletOperator::quadratic_form(const ScalarField& v) const {
  v.require_grid(*spec_, "quadratic_form");
  Eigen::VectorXd Av = apply(v.values);
  double cell = spec_->h(0);
  if (spec_->dim == 2) cell *= spec_->h(1);
  return cell * v.values.dot(Av);
}

void SparseFactor::factorize(const Eigen::SparseMatrix<double>& A) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw numerical_error("sparse LDLT factorization failed");
  }
  n_ = static_cast<int>(A.rows());
  const auto& L = ldlt.matrixL();
  Eigen::SparseMatrix<double> Lm = L;
  Lm.makeCompressed();
  col_ptr_.assign(Lm.outerIndexPtr(), Lm.outerIndexPtr() + n_ + 1);
  row_idx_.assign(Lm.innerIndexPtr(), Lm.innerIndexPtr() + Lm.nonZeros());
  val_.assign(Lm.valuePtr(), Lm.valuePtr() + Lm.nonZeros());
  diag_ = ldlt.vectorD();
  for (int i = 0; i < n_; ++i) {
    if (!(diag_[i] > 0.0)) throw numerical_error("sparse LDLT: matrix not positive definite");
  }
  const auto& P = ldlt.permutationP();
  perm_.resize(n_);
  for (int i = 0; i < n_; ++i) perm_[i] = P.indices()[i];
}

void SparseFactor::solve(const double* b, double* x) const {
  // A = P^T L D L^T P  =>  x = P^T L^-T D^-1 L^-1 P b
  std::vector<double> y(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(perm_[i])] = b[i];
  // forward solve L z = y (unit diagonal stored explicitly by Eigen as 1s)
  for (int c = 0; c < n_; ++c) {
    const double zc = y[static_cast<std::size_t>(c)];
    for (int k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      const int r = row_idx_[static_cast<std::size_t>(k)];
      if (r == c) continue;
      y[static_cast<std::size_t>(r)] -= val_[static_cast<std::size_t>(k)] * zc;
    }
  }
  for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] /= diag_[i];
  // backward solve L^T w = y
  for (int c = n_ - 1; c >= 0; --c) {
    double acc = y[static_cast<std::size_t>(c)];
    for (int k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k) {
      const int r = row_idx_[static_cast<std::size_t>(k)];
      if (r == c) continue;
      acc -= val_[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(r)];
    }
    y[static_cast<std::size_t>(c)] = acc;
  }
  for (int i = 0; i < n_; ++i) x[i] = y[static_cast<std::size_t>(perm_[i])];
}

Eigen::VectorXd SparseFactor::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw dimension_error("sparse solve: vector size mismatch");
  Eigen::VectorXd x(n_);
  solve(b.data(), x.data());
  return x;
}

}  // namespace invlab
