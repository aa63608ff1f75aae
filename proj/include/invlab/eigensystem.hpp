#pragma once

#include <vector>

#include <Eigen/Dense>

#include "invlab/operators.hpp"

namespace invlab {

/// Dirichlet eigenpairs of A0 = -Laplacian + q0, ascending, with the
/// eigenfields normalized in the discrete L2(Omega) inner product and the
/// sign fixed so the first entry exceeding 1e-12 * max|phi| is positive.
/// Immutable after construction and safe to share across threads.
struct EigenSystem {
  const DomainSpec* spec = nullptr;
  ScalarField q0;
  int K = 0;
  Eigen::VectorXd lambda;
  std::vector<ScalarField> phi;
  double gram_residual = 0.0;          // max_jk |<phi_j, phi_k> - delta_jk|
  double max_relative_residual = 0.0;  // max_k ||A phi_k - lambda_k phi_k|| / lambda_k
  double weyl_c = 0.0;                 // set by weyl_fit
  double mu1 = 0.0;                    // first eigenvalue of the Dirichlet Laplacian

  double inner(const ScalarField& a, const ScalarField& b) const { return inner_l2(a, b); }

  /// Spectral coefficients <v, phi_k>_h for k = 1..K.
  Eigen::VectorXd coefficients(const ScalarField& v) const;

  /// Synthesis sum_{k<=level} c_k phi_k (level clamped to K).
  ScalarField synthesize(const Eigen::VectorXd& coeffs, int level) const;
};

struct EigensolveOptions {
  double residual_tol = 1e-10;  // relative residual target per pair
  int max_basis = 0;            // 0: automatic
  std::uint64_t start_seed = 0x5eed5eedULL;
};

/// Computes the K smallest eigenpairs by shift-invert Lanczos with full
/// reorthogonalization and deflated restarts (dense fallback for small
/// operators). Throws numerical_error with a residual report when the
/// requested accuracy cannot be met.
EigenSystem eigensolve(const DirichletOperator& op, int K, const EigensolveOptions& opts = {});

/// Smallest c > 1 with c^{-1} k^{2/n} <= lambda_k <= c k^{2/n} for k <= K;
/// stores it in the system and returns it. Requires K >= 10.
double weyl_fit(EigenSystem& es);

/// First eigenvalue of the (q0 = 0) Dirichlet Laplacian on the rectangle;
/// closed form from the discrete sine modes.
double first_laplacian_eigenvalue(const DomainSpec& spec);

/// Closed-form discrete eigenvalue of the 1d Dirichlet second-difference
/// operator on (0, L): (4/h^2) sin^2(k pi h / (2L)).
double discrete_sine_eigenvalue(double L, int grid_points, int k);

}  // namespace invlab
