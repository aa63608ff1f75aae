#pragma once

#include "invlab/eigensystem.hpp"

namespace invlab {

enum class FieldNorm { L2, H1_0, H_minus1, H_Delta_cal, H0_cal };

struct NormResult {
  double value = 0.0;
  /// Set for H_minus1 when the K-mode truncation leaves more than 1% of the
  /// field's L2 mass unresolved.
  bool truncated = false;
};

/// Discrete L2(Omega) norm (h^n sum v^2)^{1/2}.
double norm_l2(const ScalarField& v);

/// Forward-difference gradient L2 norm with zero extension; its square
/// equals <-Laplacian_h v, v>_h exactly.
double norm_h10(const ScalarField& v);

/// Discrete Laplacian with Dirichlet (zero) extension.
ScalarField discrete_laplacian(const ScalarField& v);

/// Spectral Sobolev norms sum lambda_k^{+-1} <v, phi_k>^2 over k <= K.
double spectral_h1(const ScalarField& v, const EigenSystem& es);
double spectral_hminus1(const ScalarField& v, const EigenSystem& es);

/// Dispatch per the norm kind; es is required for H_minus1 only.
NormResult field_norm(const ScalarField& v, FieldNorm kind, const EigenSystem* es = nullptr);

}  // namespace invlab
