#include "semcl/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace semcl {

double dot(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::domain_error("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec normalized(const Vec& v) {
  const double n = norm(v);
  if (n == 0.0) throw std::domain_error("normalized: zero-norm vector");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

double cosine(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::domain_error("cosine: dimension mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw std::domain_error("cosine: zero-norm input");
  const double c = dot(u, v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

double log_sum_exp(const std::vector<double>& s) {
  if (s.empty()) throw std::domain_error("log_sum_exp: empty input");
  const double m = *std::max_element(s.begin(), s.end());
  double acc = 0.0;
  for (double x : s) acc += std::exp(x - m);
  return m + std::log(acc);
}

std::vector<double> softmax_t(const std::vector<double>& s, double tau) {
  if (tau <= 0.0) throw std::domain_error("softmax_t: temperature must be positive");
  std::vector<double> scaled(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) scaled[i] = s[i] / tau;
  const double lse = log_sum_exp(scaled);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::exp(scaled[i] - lse);
  return out;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  if (h <= 0.0) throw std::domain_error("finite_diff_grad: step must be positive");
  Vec g(x.size());
  Vec probe = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double saved = probe[j];
    probe[j] = saved + h;
    const double fp = f(probe);
    probe[j] = saved - h;
    const double fm = f(probe);
    probe[j] = saved;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace semcl
