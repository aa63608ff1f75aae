#include "invlab/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "invlab/common.hpp"

namespace invlab {

namespace {

double l2_cell(const DomainSpec& spec) {
  double c = spec.h(0);
  if (spec.dim == 2) c *= spec.h(1);
  return c;
}

void fix_sign(Eigen::VectorXd& v) {
  const double thresh = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > thresh) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

struct RitzPair {
  double inv_value;  // eigenvalue of B^{-1}
  Eigen::VectorXd vector;
};

/// Shift-invert Lanczos with full reorthogonalization against both the
/// current basis and previously deflated converged vectors. Restarting with
/// a fresh random vector orthogonal to everything found so far recovers
/// multiple eigenvalues reliably.
std::vector<RitzPair> lanczos_smallest(const SparseFactor& factor, int n, int want,
                                       double tol_inv, int max_basis, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> deflated;
  std::vector<double> deflated_vals;
  Rng rng(seed);

  auto random_start = [&]() {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
  };

  const int sweep_len = std::min(n, std::max(2 * want + 40, 80));
  const int max_restarts = 24;
  const std::size_t cap = static_cast<std::size_t>(want) + 40;

  // Repeated deflated sweeps converge the largest remaining eigenvalues of
  // B^{-1} first. Degenerate copies are invisible to a single Krylov space,
  // so the stopping rule is a stability certificate: enough pairs found AND
  // one full sweep that inserts nothing new into the leading `want` set.
  auto top_values = [&]() {
    std::vector<double> v = deflated_vals;
    std::sort(v.begin(), v.end(), std::greater<>());
    if (v.size() > static_cast<std::size_t>(want)) v.resize(static_cast<std::size_t>(want));
    return v;
  };

  for (int restart = 0; restart < max_restarts; ++restart) {
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alpha, beta;
    Eigen::VectorXd v = random_start();
    auto orthogonalize = [&](Eigen::VectorXd& w) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& d : deflated) w -= d.dot(w) * d;
        for (const auto& b : basis) w -= b.dot(w) * b;
      }
    };
    orthogonalize(v);
    if (v.norm() < 1e-12) continue;
    v.normalize();
    basis.push_back(v);

    const int budget = std::min(max_basis, sweep_len);
    bool exhausted = false;
    for (int j = 0; j < budget; ++j) {
      Eigen::VectorXd w(n);
      factor.solve(basis.back().data(), w.data());
      const double a = basis.back().dot(w);
      alpha.push_back(a);
      orthogonalize(w);
      const double b = w.norm();
      if (b < 1e-13) {
        exhausted = true;  // invariant subspace hit for this start
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const int m = static_cast<int>(alpha.size());
    if (m == 0) continue;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) {
        T(i, i + 1) = beta[static_cast<std::size_t>(i)];
        T(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsol(T);
    // beta[m-1] couples the basis to the discarded direction; zero when the
    // Krylov space closed on itself (residuals are then exact zeros).
    const double beta_last = exhausted ? 0.0 : beta[static_cast<std::size_t>(m - 1)];
    const std::vector<double> top_before = top_values();
    // Largest eigenvalues of B^{-1} correspond to the smallest of B.
    for (int idx = m - 1; idx >= 0 && deflated.size() < cap; --idx) {
      const double nu = tsol.eigenvalues()[idx];
      if (nu <= 0) continue;
      const double res = std::abs(beta_last * tsol.eigenvectors()(m - 1, idx));
      if (res > tol_inv * std::abs(nu)) continue;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < m; ++i) y += tsol.eigenvectors()(i, idx) * basis[static_cast<std::size_t>(i)];
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& d : deflated) y -= d.dot(y) * d;
      }
      const double ny = y.norm();
      if (ny < 0.5) continue;  // collapsed onto already-deflated space
      y /= ny;
      deflated.push_back(std::move(y));
      deflated_vals.push_back(nu);
    }
    if (static_cast<int>(deflated.size()) >= want && top_values() == top_before) {
      break;  // a full sweep added nothing to the leading set
    }
  }

  std::vector<RitzPair> out;
  out.reserve(deflated.size());
  for (std::size_t i = 0; i < deflated.size(); ++i) {
    out.push_back({deflated_vals[i], std::move(deflated[i])});
  }
  std::sort(out.begin(), out.end(),
            [](const RitzPair& a, const RitzPair& b) { return a.inv_value > b.inv_value; });
  return out;
}

}  // namespace

double discrete_sine_eigenvalue(double L, int grid_points, int k) {
  const double h = L / (grid_points + 1);
  const double s = std::sin(k * M_PI * h / (2.0 * L));
  return 4.0 / (h * h) * s * s;
}

double first_laplacian_eigenvalue(const DomainSpec& spec) {
  double lam = discrete_sine_eigenvalue(spec.length[0], spec.grid_points, 1);
  if (spec.dim == 2) lam += discrete_sine_eigenvalue(spec.length[1], spec.grid_points, 1);
  return lam;
}

Eigen::VectorXd EigenSystem::coefficients(const ScalarField& v) const {
  Eigen::VectorXd c(K);
  for (int k = 0; k < K; ++k) c[k] = inner_l2(v, phi[static_cast<std::size_t>(k)]);
  return c;
}

ScalarField EigenSystem::synthesize(const Eigen::VectorXd& coeffs, int level) const {
  ScalarField out(*spec);
  const int n = std::min<int>(level, std::min<int>(K, static_cast<int>(coeffs.size())));
  for (int k = 0; k < n; ++k) out.values += coeffs[k] * phi[static_cast<std::size_t>(k)].values;
  return out;
}

EigenSystem eigensolve(const DirichletOperator& op, int K, const EigensolveOptions& opts) {
  const DomainSpec& spec = op.spec();
  const int n = op.size();
  if (K < 1 || K > n) throw config_error("eigensolve: K must be in [1, N_interior]");

  // Shift so the factorized operator is positive definite even when q0
  // dips below zero; eigenvalues are shifted back exactly.
  const double qmin = op.potential().values.size() ? op.potential().values.minCoeff() : 0.0;
  const double shift = qmin < 0.0 ? -qmin : 0.0;

  Eigen::SparseMatrix<double> B = op.assemble();
  if (shift > 0.0) {
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    B = B + shift * I;
  }

  Eigen::MatrixXd dense_vectors;
  Eigen::VectorXd dense_values;
  std::vector<RitzPair> pairs;
  const bool dense_path = n <= 600;
  if (dense_path) {
    Eigen::MatrixXd Bd(B);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sol(Bd);
    if (sol.info() != Eigen::Success) throw numerical_error("eigensolve: dense solver failed");
    dense_values = sol.eigenvalues();
    dense_vectors = sol.eigenvectors();
  } else {
    SparseFactor factor(B);
    const int max_basis = opts.max_basis > 0 ? opts.max_basis : std::min(n, 6 * K + 160);
    pairs = lanczos_smallest(factor, n, K + 3, opts.residual_tol, max_basis, opts.start_seed);
    if (static_cast<int>(pairs.size()) < K) {
      std::ostringstream os;
      os << "eigensolve: Lanczos converged only " << pairs.size() << " of " << K
         << " pairs (relative residual target " << opts.residual_tol << ")";
      throw numerical_error(os.str());
    }
  }

  EigenSystem es;
  es.spec = &spec;
  es.q0 = op.potential();
  es.K = K;
  es.lambda.resize(K);
  es.phi.reserve(static_cast<std::size_t>(K));
  es.mu1 = first_laplacian_eigenvalue(spec);

  const double cell = l2_cell(spec);
  const double scale = 1.0 / std::sqrt(cell);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd v = dense_path ? Eigen::VectorXd(dense_vectors.col(k))
                                   : pairs[static_cast<std::size_t>(k)].vector;
    double lam = dense_path ? dense_values[k] - shift
                            : 1.0 / pairs[static_cast<std::size_t>(k)].inv_value - shift;
    fix_sign(v);
    ScalarField f(spec, scale * v, FieldTag::eigenfunction);
    es.lambda[k] = lam;
    es.phi.push_back(std::move(f));
  }

  // Ascending order is produced by construction; enforce it defensively.
  for (int k = 1; k < K; ++k) {
    if (es.lambda[k] < es.lambda[k - 1] - 1e-9 * std::abs(es.lambda[k - 1])) {
      throw numerical_error("eigensolve: eigenvalues not ascending");
    }
  }

  // Verify the contract: orthonormality and relative residuals.
  double gram = 0.0;
  for (int j = 0; j < K; ++j) {
    for (int k = j; k < K; ++k) {
      const double g = inner_l2(es.phi[static_cast<std::size_t>(j)], es.phi[static_cast<std::size_t>(k)]) -
                       (j == k ? 1.0 : 0.0);
      gram = std::max(gram, std::abs(g));
    }
  }
  double max_rel_res = 0.0;
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd r = op.apply(es.phi[static_cast<std::size_t>(k)].values) -
                        es.lambda[k] * es.phi[static_cast<std::size_t>(k)].values;
    const double rn = std::sqrt(cell) * r.norm();
    max_rel_res = std::max(max_rel_res, rn / std::max(std::abs(es.lambda[k]), 1e-300));
  }
  es.gram_residual = gram;
  es.max_relative_residual = max_rel_res;
  if (gram > 1e-10 || max_rel_res > 1e-8) {
    std::ostringstream os;
    os << "eigensolve: accuracy contract violated (gram residual " << gram
       << ", max relative eigen-residual " << max_rel_res << ")";
    throw numerical_error(os.str());
  }
  return es;
}

double weyl_fit(EigenSystem& es) {
  if (es.K < 10) throw config_error("weyl_fit: needs K >= 10");
  const double p = 2.0 / es.spec->dim;
  double c = 1.0;
  for (int k = 1; k <= es.K; ++k) {
    const double growth = std::pow(static_cast<double>(k), p);
    const double lam = es.lambda[k - 1];
    if (lam <= 0) throw numerical_error("weyl_fit: nonpositive eigenvalue");
    c = std::max(c, lam / growth);
    c = std::max(c, growth / lam);
  }
  es.weyl_c = std::nextafter(c, std::numeric_limits<double>::infinity());
  if (es.weyl_c <= 1.0) es.weyl_c = 1.0 + 1e-12;
  return es.weyl_c;
}

}  // namespace invlab
