#include "semcl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace semcl {

namespace {

Vec sphere_point(int dim, double radius, Rng& rng) {
  Vec v(dim);
  for (double& c : v) c = rng.normal();
  const double n = norm(v);
  if (n == 0.0) return sphere_point(dim, radius, rng);
  for (double& c : v) c *= radius / n;
  return v;
}

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Greedy farthest-point selection of n centers from a random candidate pool
/// on a sphere of radius 2·separation. Random directions keep centers off the
/// coordinate axes of the noise bounding box, and the doubled radius leaves
/// slack over the pairwise minimum. Throws if the spacing still falls short.
std::vector<Vec> place_centers(const MixtureConfig& cfg, Rng& rng) {
  const double radius = 2.0 * cfg.separation;
  std::vector<Vec> pool;
  pool.reserve(static_cast<std::size_t>(256) * cfg.n_contents);
  for (int i = 0; i < 256 * cfg.n_contents; ++i) pool.push_back(sphere_point(cfg.dim, radius, rng));

  std::vector<Vec> centers;
  centers.push_back(pool[0]);
  std::vector<double> min_sq(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) min_sq[i] = sq_dist(pool[i], centers[0]);
  while (static_cast<int>(centers.size()) < cfg.n_contents) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (min_sq[i] > min_sq[best]) best = i;
    }
    centers.push_back(pool[best]);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      min_sq[i] = std::min(min_sq[i], sq_dist(pool[i], centers.back()));
    }
  }

  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (std::sqrt(sq_dist(centers[i], centers[j])) < cfg.separation) {
        throw std::invalid_argument(
            "synth_mixture: infeasible separation for this dim/n_contents");
      }
    }
  }
  return centers;
}

double nz_entropy_term(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

}  // namespace

void validate(const MixtureConfig& cfg) {
  if (cfg.n_contents < 1) throw std::invalid_argument("mixture: n_contents must be positive");
  if (cfg.dim < 1) throw std::invalid_argument("mixture: dim must be positive");
  if (cfg.points < 1) throw std::invalid_argument("mixture: points must be positive");
  if (cfg.noise_fraction < 0.0 || cfg.noise_fraction > 1.0) {
    throw std::invalid_argument("mixture: noise_fraction outside [0, 1]");
  }
  if (cfg.separation <= 0.0) throw std::invalid_argument("mixture: separation must be positive");
}

Datastream synth_mixture(const MixtureConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::vector<Vec> centers = place_centers(cfg, rng);

  const int n_noise = static_cast<int>(std::llround(cfg.noise_fraction * cfg.points));
  const int n_clean = cfg.points - n_noise;

  Datastream out;
  out.dim = cfg.dim;
  out.record_bits = 64.0 * cfg.dim;
  out.points.reserve(cfg.points);

  // Even allocation across components keeps label proportions within one
  // point of the configured equiprobable masses.
  for (int c = 0; c < cfg.n_contents; ++c) {
    const int count = n_clean / cfg.n_contents + (c < n_clean % cfg.n_contents ? 1 : 0);
    for (int i = 0; i < count; ++i) {
      DataPoint p;
      p.x.resize(cfg.dim);
      for (int d = 0; d < cfg.dim; ++d) p.x[d] = centers[c][d] + rng.normal();
      p.truth_content = c;
      out.points.push_back(std::move(p));
    }
  }

  Vec lo(cfg.dim, -(2.0 * cfg.separation + 3.0));
  Vec hi(cfg.dim, 2.0 * cfg.separation + 3.0);
  if (n_clean > 0) {
    for (int d = 0; d < cfg.dim; ++d) {
      lo[d] = std::numeric_limits<double>::infinity();
      hi[d] = -std::numeric_limits<double>::infinity();
    }
    for (const DataPoint& p : out.points) {
      for (int d = 0; d < cfg.dim; ++d) {
        lo[d] = std::min(lo[d], p.x[d]);
        hi[d] = std::max(hi[d], p.x[d]);
      }
    }
  }
  for (int i = 0; i < n_noise; ++i) {
    DataPoint p;
    p.x.resize(cfg.dim);
    for (int d = 0; d < cfg.dim; ++d) p.x[d] = rng.uniform(lo[d], hi[d]);
    p.is_noise = true;
    out.points.push_back(std::move(p));
  }

  // Interleave components and noise.
  for (std::size_t i = out.points.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(out.points[i - 1], out.points[j]);
  }
  return out;
}

double content_complexity(const MixtureConfig& cfg) {
  validate(cfg);
  const double f = cfg.noise_fraction;
  const double per_content = (1.0 - f) / cfg.n_contents;
  return cfg.n_contents * nz_entropy_term(per_content) + nz_entropy_term(f);
}

MixtureConfig mixture_for_complexity(double target_nats, const MixtureConfig& base) {
  if (target_nats < 0.0) {
    throw std::invalid_argument("mixture_for_complexity: target must be nonnegative");
  }
  MixtureConfig cfg = base;
  if (target_nats == 0.0) {
    cfg.n_contents = 1;
    cfg.noise_fraction = 0.0;
    return cfg;
  }
  int n = 1;
  while (std::log(static_cast<double>(n + 1)) < target_nats - 1e-12) ++n;
  cfg.n_contents = n;

  auto entropy_at = [&](double f) {
    MixtureConfig probe = cfg;
    probe.noise_fraction = f;
    return content_complexity(probe);
  };
  auto bisect = [&](double flo, double fhi, bool increasing) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (flo + fhi);
      const bool below = entropy_at(mid) < target_nats;
      if (below == increasing) {
        flo = mid;
      } else {
        fhi = mid;
      }
    }
    return 0.5 * (flo + fhi);
  };

  // Entropy rises on [0, 1/(n+1)] and falls past the uniform point; the
  // target can have a solution on each branch.
  const double f_peak = 1.0 / (n + 1);
  std::vector<double> solutions;
  if (target_nats <= entropy_at(f_peak) + 1e-12) {
    if (target_nats >= entropy_at(0.0) - 1e-12) {
      solutions.push_back(bisect(0.0, f_peak, true));
    }
    if (target_nats >= entropy_at(0.5) - 1e-12) {
      solutions.push_back(bisect(f_peak, 0.5, false));
    }
  }
  if (solutions.empty()) {
    throw std::invalid_argument("mixture_for_complexity: target not reachable");
  }
  double best = solutions[0];
  for (double f : solutions) {
    const double d_f = std::abs(f - base.noise_fraction);
    const double d_best = std::abs(best - base.noise_fraction);
    if (d_f < d_best || (d_f == d_best && f > best)) best = f;
  }
  cfg.noise_fraction = std::clamp(best, 0.0, 0.5);
  if (std::abs(content_complexity(cfg) - target_nats) > 1e-9) {
    throw std::runtime_error("mixture_for_complexity: solver failed to converge");
  }
  return cfg;
}

Datastream ingest_binary(const std::string& path, std::size_t record_bytes, bool normalize) {
  if (record_bytes == 0) throw std::invalid_argument("ingest_binary: record_bytes must be positive");
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("ingest_binary: cannot open " + path);
  const std::streamoff size = in.tellg();
  if (size <= 0 || static_cast<std::size_t>(size) % record_bytes != 0) {
    const std::size_t whole =
        (static_cast<std::size_t>(std::max<std::streamoff>(size, 0)) / record_bytes) *
        record_bytes;
    throw std::runtime_error("ingest_binary: file size " + std::to_string(size) +
                             " is not a positive multiple of record_bytes; trailing partial "
                             "record starts at byte offset " +
                             std::to_string(whole));
  }
  in.seekg(0);
  Datastream out;
  out.dim = static_cast<int>(record_bytes);
  out.record_bits = 8.0 * static_cast<double>(record_bytes);
  const std::size_t count = static_cast<std::size_t>(size) / record_bytes;
  std::vector<unsigned char> buf(record_bytes);
  out.points.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(record_bytes));
    if (!in) throw std::runtime_error("ingest_binary: read failed at record " + std::to_string(r));
    DataPoint p;
    p.x.resize(record_bytes);
    for (std::size_t i = 0; i < record_bytes; ++i) {
      p.x[i] = normalize ? static_cast<double>(buf[i]) / 255.0 : static_cast<double>(buf[i]);
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

}  // namespace semcl
