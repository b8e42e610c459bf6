#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "semcl/numcore.hpp"

namespace semcl {

/// Thrown when the pre-normalization output collapses below 1e-12; no
/// gradient is defined there, so callers see the failure instead of a
/// silently regularized embedding.
struct degenerate_embedding_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Activation { Tanh, Identity };

/// Two affine layers with a tanh between them, then L2 normalization of
/// the output. Identity activation exists for tests that need an exactly
/// linear network.
struct EncoderParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  Activation activation = Activation::Tanh;
  Vec w1;  // hidden_dim x input_dim, row-major
  Vec b1;  // hidden_dim
  Vec w2;  // output_dim x hidden_dim, row-major
  Vec b2;  // output_dim

  std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
};

/// Unit-norm output of the embedding network.
struct Embedding {
  Vec z;
};

/// Weights drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)], zero biases.
EncoderParams init_params(int input_dim, int hidden_dim, int output_dim, Rng& rng,
                          Activation activation = Activation::Tanh);
EncoderParams zeros_like(const EncoderParams& shape);

Embedding forward(const EncoderParams& params, const Vec& x);

/// Analytic gradient of (upstream . forward(params, x)) with respect to every
/// parameter, including the normalization Jacobian.
EncoderParams backward(const EncoderParams& params, const Vec& x, const Vec& upstream);

/// params -= lr * grad, elementwise.
void sgd_step(EncoderParams& params, const EncoderParams& grad, double lr);

/// kappa_tilde <- omega * kappa_tilde + (1 - omega) * kappa. Only the
/// momentum copy changes.
void momentum_update(EncoderParams& kappa_tilde, const EncoderParams& kappa, double omega);

/// Flat parameter view in declared order w1, b1, w2, b2.
Vec flatten(const EncoderParams& params);
EncoderParams unflatten(const EncoderParams& shape, const Vec& flat);

/// Checkpoint layout: 8-byte magic "SEMCENC1", dims D/H/N as little-endian
/// uint32, then parameters as little-endian doubles in declared order.
void save_params(const EncoderParams& params, std::ostream& out);
EncoderParams load_params(std::istream& in);
void save_params_file(const EncoderParams& params, const std::string& path);
EncoderParams load_params_file(const std::string& path);

}  // namespace semcl
