#pragma once

#include "invlab/domain.hpp"
#include "invlab/timesignal.hpp"

namespace invlab {

/// Compactly supported C-infinity bump of amplitude `amplitude`, centered
/// at (cx, cy) with the given radius; zero outside the ball. Evaluated from
/// the closed form, so refinements of the grid sample the same function.
ScalarField smooth_bump(const DomainSpec& spec, double cx, double cy, double radius,
                        double amplitude);

/// Random low-mode sine combination with coefficients ~ N(0,1)/(i^2+j^2),
/// rescaled to the requested sup norm. Grid-independent given the seed.
ScalarField random_mode_field(const DomainSpec& spec, int max_mode, double sup_norm,
                              std::uint64_t seed);

/// Random smooth potential taking values in [0, m].
ScalarField random_nonneg_potential(const DomainSpec& spec, double m, int max_mode,
                                    std::uint64_t seed);

/// Random band-limited signal sum_{j<=J} a_j cos(pi j t/T) + b_j sin(...),
/// normalized to unit amplitude.
TimeSignal band_limited_signal(double dt, int steps, int max_mode, std::uint64_t seed);

}  // namespace invlab
