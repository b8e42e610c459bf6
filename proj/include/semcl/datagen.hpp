#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semcl/numcore.hpp"

namespace semcl {

struct DataPoint {
  Vec x;
  std::optional<int> truth_content;  // generating component, when known
  bool is_noise = false;
};

struct Datastream {
  std::vector<DataPoint> points;
  int dim = 0;
  double record_bits = 0.0;  // raw size of one record on the wire
};

/// Synthetic source: n_contents isotropic unit-variance Gaussians with
/// centers placed farthest-point on a sphere, plus box-uniform noise.
struct MixtureConfig {
  int n_contents = 4;
  int dim = 16;
  int points = 2000;
  double noise_fraction = 0.2;  // in [0, 1]
  double separation = 8.0;      // min center distance, units of component std
  std::uint64_t seed = 1;
};

void validate(const MixtureConfig& cfg);

Datastream synth_mixture(const MixtureConfig& cfg);

/// Entropy in nats of the generating source distribution: n_contents
/// equiprobable components sharing mass (1 - noise_fraction) plus one noise
/// source of mass noise_fraction.
double content_complexity(const MixtureConfig& cfg);

/// Mixture whose content_complexity equals target_nats. Content count is the
/// largest n with ln n < target; the noise mass is solved by bisection,
/// preferring the solution closest to base.noise_fraction when two exist.
MixtureConfig mixture_for_complexity(double target_nats, const MixtureConfig& base);

/// Splits a file of fixed-size records into data points. Bytes map to
/// [0, 1] (value / 255) when normalize is set.
Datastream ingest_binary(const std::string& path, std::size_t record_bytes, bool normalize);

}  // namespace semcl
