#pragma once

#include <utility>

#include "semcl/numcore.hpp"

namespace semcl {

/// Perturbation family producing the two training views. Stages apply in a
/// fixed order: multiplicative scale jitter, additive Gaussian noise, then
/// coordinate masking. A stage whose parameter is zero is skipped, so the
/// all-zero policy is exactly the identity map.
struct PerturbPolicy {
  double noise_sigma = 0.0;    // >= 0
  double mask_fraction = 0.0;  // in [0, 1]
  double scale_jitter = 0.0;   // >= 0, multiplicative half-width
};

void validate(const PerturbPolicy& policy);

Vec perturb(const Vec& x, const PerturbPolicy& policy, Rng& rng);

/// Two independent draws from the same policy.
std::pair<Vec, Vec> two_views(const Vec& x, const PerturbPolicy& policy, Rng& rng);

}  // namespace semcl
