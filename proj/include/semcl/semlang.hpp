#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semcl/datagen.hpp"
#include "semcl/disentangle.hpp"
#include "semcl/encoder.hpp"
#include "semcl/parallel.hpp"

namespace semcl {

struct LanguageEntry {
  std::size_t point_id = 0;
  int label = 0;              // pseudo-label, the entry's cluster
  std::vector<int> code;      // quantized embedding, one symbol per dimension
};

/// Dictionary from learnable points to quantized representations, with one
/// centroid per populated learnable cluster.
struct SemanticLanguage {
  int bits_per_dim = 6;
  std::vector<LanguageEntry> entries;
  std::vector<Vec> codebook;  // indexed by cluster; empty vec when absent

  bool empty() const { return entries.empty(); }
};

struct ComplexityConfig {
  double beta = 1.0;
  double prior_sigma = 1.0;
  double posterior_sigma = 1.0;
};

void validate(const ComplexityConfig& cfg);

/// Complexity in nats; infinite() when some entry has zero assignment
/// probability, in which case offending_point names the first such entry.
struct ComplexityResult {
  double value = 0.0;
  std::optional<std::size_t> offending_point;

  bool infinite() const { return offending_point.has_value(); }
};

/// Uniform scalar quantizer on [-1, 1] with 2^q levels; out-of-range input
/// is clamped before binning.
std::vector<int> quantize(const Vec& z, int q);
Vec dequantize(const std::vector<int>& code, int q);

/// Mean bits per representation under a zeroth-order empirical entropy
/// coder with the symbol distribution pooled over every coordinate.
double representation_length_bits(const std::vector<std::vector<int>>& codes);

SemanticLanguage build_language(const Datastream& data, const SplitReport& split,
                                const AssignmentMatrix& assignment, const EncoderParams& encoder,
                                int q, ExecPolicy policy = ExecPolicy::Serial);

/// Cross-entropy of entry pseudo-labels plus beta times the closed-form KL
/// between isotropic Gaussians centered at the two parameter vectors.
ComplexityResult language_complexity(const SemanticLanguage& lang, const AssignmentMatrix& P,
                                     const EncoderParams& params_pre,
                                     const EncoderParams& params_post,
                                     const ComplexityConfig& cfg);

std::string to_json(const SemanticLanguage& lang);
void write_json_file(const SemanticLanguage& lang, const std::string& path);

}  // namespace semcl
