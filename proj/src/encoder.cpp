#include "semcl/encoder.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

#include "byteio.hpp"

namespace semcl {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'C', 'E', 'N', 'C', '1'};
constexpr double kDegenerateNorm = 1e-12;

void check_shapes_match(const EncoderParams& a, const EncoderParams& b, const char* what) {
  if (a.input_dim != b.input_dim || a.hidden_dim != b.hidden_dim ||
      a.output_dim != b.output_dim) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

double activate(Activation act, double u) {
  return act == Activation::Tanh ? std::tanh(u) : u;
}

// Derivative expressed through the activated value h.
double activate_deriv(Activation act, double h) {
  return act == Activation::Tanh ? 1.0 - h * h : 1.0;
}

struct ForwardTrace {
  Vec hidden;    // post-activation
  Vec pre_norm;  // second affine output
  double pre_norm_len = 0.0;
  Vec z;         // normalized output
};

ForwardTrace run_forward(const EncoderParams& p, const Vec& x) {
  if (static_cast<int>(x.size()) != p.input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  ForwardTrace t;
  t.hidden.resize(p.hidden_dim);
  for (int j = 0; j < p.hidden_dim; ++j) {
    double u = p.b1[j];
    const double* row = &p.w1[static_cast<std::size_t>(j) * p.input_dim];
    for (int d = 0; d < p.input_dim; ++d) u += row[d] * x[d];
    t.hidden[j] = activate(p.activation, u);
  }
  t.pre_norm.resize(p.output_dim);
  for (int k = 0; k < p.output_dim; ++k) {
    double v = p.b2[k];
    const double* row = &p.w2[static_cast<std::size_t>(k) * p.hidden_dim];
    for (int j = 0; j < p.hidden_dim; ++j) v += row[j] * t.hidden[j];
    t.pre_norm[k] = v;
  }
  t.pre_norm_len = norm(t.pre_norm);
  if (t.pre_norm_len < kDegenerateNorm) {
    throw degenerate_embedding_error("forward: pre-normalization output collapsed");
  }
  t.z.resize(p.output_dim);
  for (int k = 0; k < p.output_dim; ++k) t.z[k] = t.pre_norm[k] / t.pre_norm_len;
  return t;
}

using detail::read_f64_le;
using detail::read_u32_le;
using detail::write_f64_le;
using detail::write_u32_le;

}  // namespace

EncoderParams init_params(int input_dim, int hidden_dim, int output_dim, Rng& rng,
                          Activation activation) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("init_params: dimensions must be positive");
  }
  EncoderParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.output_dim = output_dim;
  p.activation = activation;
  p.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
  p.b1.assign(hidden_dim, 0.0);
  p.w2.resize(static_cast<std::size_t>(output_dim) * hidden_dim);
  p.b2.assign(output_dim, 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& w : p.w1) w = rng.uniform(-s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& w : p.w2) w = rng.uniform(-s2, s2);
  return p;
}

EncoderParams zeros_like(const EncoderParams& shape) {
  EncoderParams p = shape;
  std::fill(p.w1.begin(), p.w1.end(), 0.0);
  std::fill(p.b1.begin(), p.b1.end(), 0.0);
  std::fill(p.w2.begin(), p.w2.end(), 0.0);
  std::fill(p.b2.begin(), p.b2.end(), 0.0);
  return p;
}

Embedding forward(const EncoderParams& params, const Vec& x) {
  return Embedding{run_forward(params, x).z};
}

EncoderParams backward(const EncoderParams& params, const Vec& x, const Vec& upstream) {
  if (static_cast<int>(upstream.size()) != params.output_dim) {
    throw std::invalid_argument("backward: upstream dimension mismatch");
  }
  const ForwardTrace t = run_forward(params, x);

  // d(upstream . z)/dv through z = v/|v|: (upstream - (upstream.z) z) / |v|.
  const double uz = dot(upstream, t.z);
  Vec d_pre(params.output_dim);
  for (int k = 0; k < params.output_dim; ++k) {
    d_pre[k] = (upstream[k] - uz * t.z[k]) / t.pre_norm_len;
  }

  EncoderParams g = zeros_like(params);
  Vec d_hidden(params.hidden_dim, 0.0);
  for (int k = 0; k < params.output_dim; ++k) {
    double* grow = &g.w2[static_cast<std::size_t>(k) * params.hidden_dim];
    const double* wrow = &params.w2[static_cast<std::size_t>(k) * params.hidden_dim];
    for (int j = 0; j < params.hidden_dim; ++j) {
      grow[j] = d_pre[k] * t.hidden[j];
      d_hidden[j] += wrow[j] * d_pre[k];
    }
    g.b2[k] = d_pre[k];
  }
  for (int j = 0; j < params.hidden_dim; ++j) {
    const double du = d_hidden[j] * activate_deriv(params.activation, t.hidden[j]);
    double* grow = &g.w1[static_cast<std::size_t>(j) * params.input_dim];
    for (int d = 0; d < params.input_dim; ++d) grow[d] = du * x[d];
    g.b1[j] = du;
  }
  return g;
}

void sgd_step(EncoderParams& params, const EncoderParams& grad, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("sgd_step: learning rate must be positive");
  check_shapes_match(params, grad, "sgd_step");
  for (std::size_t i = 0; i < params.w1.size(); ++i) params.w1[i] -= lr * grad.w1[i];
  for (std::size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= lr * grad.b1[i];
  for (std::size_t i = 0; i < params.w2.size(); ++i) params.w2[i] -= lr * grad.w2[i];
  for (std::size_t i = 0; i < params.b2.size(); ++i) params.b2[i] -= lr * grad.b2[i];
}

void momentum_update(EncoderParams& kappa_tilde, const EncoderParams& kappa, double omega) {
  if (omega < 0.0 || omega > 1.0) {
    throw std::invalid_argument("momentum_update: omega must be in [0, 1]");
  }
  check_shapes_match(kappa_tilde, kappa, "momentum_update");
  // Delta form keeps equal inputs an exact fixed point; omega = 0 must land
  // exactly on kappa, which the delta form cannot guarantee.
  auto blend = [omega](Vec& t, const Vec& k) {
    if (omega == 0.0) {
      t = k;
      return;
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += (1.0 - omega) * (k[i] - t[i]);
  };
  blend(kappa_tilde.w1, kappa.w1);
  blend(kappa_tilde.b1, kappa.b1);
  blend(kappa_tilde.w2, kappa.w2);
  blend(kappa_tilde.b2, kappa.b2);
}

Vec flatten(const EncoderParams& params) {
  Vec flat;
  flat.reserve(params.param_count());
  flat.insert(flat.end(), params.w1.begin(), params.w1.end());
  flat.insert(flat.end(), params.b1.begin(), params.b1.end());
  flat.insert(flat.end(), params.w2.begin(), params.w2.end());
  flat.insert(flat.end(), params.b2.begin(), params.b2.end());
  return flat;
}

EncoderParams unflatten(const EncoderParams& shape, const Vec& flat) {
  if (flat.size() != shape.param_count()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  EncoderParams p = shape;
  std::size_t off = 0;
  auto take = [&](Vec& dst) {
    std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
    off += dst.size();
  };
  take(p.w1);
  take(p.b1);
  take(p.w2);
  take(p.b2);
  return p;
}

void save_params(const EncoderParams& params, std::ostream& out) {
  if (params.activation != Activation::Tanh) {
    throw std::invalid_argument("save_params: only the tanh network is checkpointable");
  }
  out.write(kMagic, 8);
  write_u32_le(out, static_cast<std::uint32_t>(params.input_dim));
  write_u32_le(out, static_cast<std::uint32_t>(params.hidden_dim));
  write_u32_le(out, static_cast<std::uint32_t>(params.output_dim));
  for (const Vec* v : {&params.w1, &params.b1, &params.w2, &params.b2}) {
    for (double d : *v) write_f64_le(out, d);
  }
  if (!out) throw std::runtime_error("save_params: write failed");
}

EncoderParams load_params(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("load_params: bad magic");
  }
  const int d = static_cast<int>(read_u32_le(in));
  const int h = static_cast<int>(read_u32_le(in));
  const int n = static_cast<int>(read_u32_le(in));
  if (!in || d < 1 || h < 1 || n < 1) throw std::runtime_error("load_params: bad dimensions");
  EncoderParams p;
  p.input_dim = d;
  p.hidden_dim = h;
  p.output_dim = n;
  p.activation = Activation::Tanh;
  p.w1.resize(static_cast<std::size_t>(h) * d);
  p.b1.resize(h);
  p.w2.resize(static_cast<std::size_t>(n) * h);
  p.b2.resize(n);
  for (Vec* v : {&p.w1, &p.b1, &p.w2, &p.b2}) {
    for (double& x : *v) x = read_f64_le(in);
  }
  if (!in) throw std::runtime_error("load_params: truncated stream");
  return p;
}

void save_params_file(const EncoderParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_params_file: cannot open " + path);
  save_params(params, out);
}

EncoderParams load_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_params_file: cannot open " + path);
  return load_params(in);
}

}  // namespace semcl
