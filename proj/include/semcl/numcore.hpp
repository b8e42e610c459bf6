#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcl {

using Vec = std::vector<double>;

/// Deterministic splittable generator (splitmix64). Identical seeds yield
/// identical draw sequences; instances are single-owner, never shared
/// across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::domain_error("Rng::uniform_int: n must be positive");
    const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x = next_u64();
    while (x < reject_below) x = next_u64();
    return x % n;
  }

  /// Standard normal via Box-Muller; draws two uniforms per pair, caches the spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Independent child stream; advances this generator by one draw.
  Rng split() { return Rng(next_u64()); }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// cos(u, v) = u.v / (|u||v|). Throws std::domain_error on zero-norm input
/// or dimension mismatch.
double cosine(const Vec& u, const Vec& v);

/// Shift-stable log(sum(exp(s))). Throws std::domain_error on empty input.
double log_sum_exp(const std::vector<double>& s);

/// Temperature softmax over s/tau. Output sums to 1, order preserving.
std::vector<double> softmax_t(const std::vector<double>& s, double tau);

/// Central-difference gradient estimate of f at x with step h.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h);

double dot(const Vec& u, const Vec& v);
double norm(const Vec& v);
/// Scales v to unit norm. Throws std::domain_error if |v| = 0.
Vec normalized(const Vec& v);

/// Reporting format shared by every CSV writer: 9 significant digits.
std::string format_g9(double v);

}  // namespace semcl
