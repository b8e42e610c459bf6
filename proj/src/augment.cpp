#include "semcl/augment.hpp"

#include <cmath>

namespace semcl {

void validate(const PerturbPolicy& policy) {
  if (policy.noise_sigma < 0.0) throw std::invalid_argument("perturb: noise_sigma < 0");
  if (policy.mask_fraction < 0.0 || policy.mask_fraction > 1.0) {
    throw std::invalid_argument("perturb: mask_fraction outside [0, 1]");
  }
  if (policy.scale_jitter < 0.0) throw std::invalid_argument("perturb: scale_jitter < 0");
}

Vec perturb(const Vec& x, const PerturbPolicy& policy, Rng& rng) {
  validate(policy);
  Vec out = x;
  const std::size_t d = out.size();
  if (policy.scale_jitter > 0.0) {
    const double factor = rng.uniform(1.0 - policy.scale_jitter, 1.0 + policy.scale_jitter);
    for (double& v : out) v *= factor;
  }
  if (policy.noise_sigma > 0.0) {
    for (double& v : out) v += policy.noise_sigma * rng.normal();
  }
  const std::size_t n_mask =
      static_cast<std::size_t>(std::floor(policy.mask_fraction * static_cast<double>(d)));
  if (n_mask > 0) {
    // Partial Fisher-Yates picks a uniform n_mask-subset of coordinates.
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n_mask; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(d - i));
      std::swap(idx[i], idx[j]);
      out[idx[i]] = 0.0;
    }
  }
  return out;
}

std::pair<Vec, Vec> two_views(const Vec& x, const PerturbPolicy& policy, Rng& rng) {
  Vec a = perturb(x, policy, rng);
  Vec b = perturb(x, policy, rng);
  return {std::move(a), std::move(b)};
}

}  // namespace semcl
