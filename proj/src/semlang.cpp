#include "semcl/semlang.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace semcl {

void validate(const ComplexityConfig& cfg) {
  if (cfg.beta < 0.0) throw std::invalid_argument("complexity: beta must be nonnegative");
  if (cfg.prior_sigma <= 0.0 || cfg.posterior_sigma <= 0.0) {
    throw std::invalid_argument("complexity: sigmas must be positive");
  }
}

std::vector<int> quantize(const Vec& z, int q) {
  if (q < 1 || q > 16) throw std::invalid_argument("quantize: q outside [1, 16]");
  const int levels = 1 << q;
  std::vector<int> code(z.size());
  for (std::size_t d = 0; d < z.size(); ++d) {
    const double c = std::clamp(z[d], -1.0, 1.0);
    int level = static_cast<int>(std::floor((c + 1.0) * 0.5 * levels));
    code[d] = std::clamp(level, 0, levels - 1);
  }
  return code;
}

Vec dequantize(const std::vector<int>& code, int q) {
  if (q < 1 || q > 16) throw std::invalid_argument("dequantize: q outside [1, 16]");
  const int levels = 1 << q;
  const double width = 2.0 / levels;
  Vec z(code.size());
  for (std::size_t d = 0; d < code.size(); ++d) {
    if (code[d] < 0 || code[d] >= levels) {
      throw std::invalid_argument("dequantize: level out of range");
    }
    z[d] = -1.0 + (code[d] + 0.5) * width;
  }
  return z;
}

double representation_length_bits(const std::vector<std::vector<int>>& codes) {
  if (codes.empty()) throw std::invalid_argument("representation_length_bits: empty corpus");
  std::map<int, std::size_t> counts;
  std::size_t total_symbols = 0;
  for (const auto& code : codes) {
    for (int s : code) ++counts[s];
    total_symbols += code.size();
  }
  if (total_symbols == 0) return 0.0;
  const double log2_total = std::log2(static_cast<double>(total_symbols));
  double total_bits = 0.0;
  for (const auto& code : codes) {
    for (int s : code) {
      total_bits += log2_total - std::log2(static_cast<double>(counts.at(s)));
    }
  }
  return total_bits / static_cast<double>(codes.size());
}

SemanticLanguage build_language(const Datastream& data, const SplitReport& split,
                                const AssignmentMatrix& assignment, const EncoderParams& encoder,
                                int q, ExecPolicy policy) {
  if (assignment.size() != data.points.size()) {
    throw std::invalid_argument("build_language: assignment does not cover the datastream");
  }
  SemanticLanguage lang;
  lang.bits_per_dim = q;
  lang.codebook.assign(assignment.cluster_count(), Vec{});
  if (split.learnable_ids.empty()) return lang;

  const std::size_t n = split.learnable_ids.size();
  std::vector<Vec> embeddings(n);
  std::vector<std::string> errors(n);
  parallel_for(n, policy, [&](std::size_t i) {
    try {
      embeddings[i] = forward(encoder, data.points[split.learnable_ids[i]].x).z;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("build_language: point " +
                               std::to_string(split.learnable_ids[i]) + ": " + errors[i]);
    }
  }

  std::vector<Vec> sums(assignment.cluster_count());
  std::vector<std::size_t> members(assignment.cluster_count(), 0);
  lang.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t id = split.learnable_ids[i];
    const int label = assignment.hard_labels[id];
    lang.entries.push_back({id, label, quantize(embeddings[i], q)});
    if (sums[label].empty()) sums[label].assign(embeddings[i].size(), 0.0);
    for (std::size_t d = 0; d < embeddings[i].size(); ++d) sums[label][d] += embeddings[i][d];
    ++members[label];
  }
  for (int l = 0; l < assignment.cluster_count(); ++l) {
    if (members[l] == 0) continue;
    if (norm(sums[l]) == 0.0) {
      throw std::runtime_error("build_language: cluster " + std::to_string(l) +
                               " members cancel to a zero centroid");
    }
    lang.codebook[l] = normalized(sums[l]);
  }
  return lang;
}

ComplexityResult language_complexity(const SemanticLanguage& lang, const AssignmentMatrix& P,
                                     const EncoderParams& params_pre,
                                     const EncoderParams& params_post,
                                     const ComplexityConfig& cfg) {
  validate(cfg);
  if (params_pre.param_count() != params_post.param_count()) {
    throw std::invalid_argument("language_complexity: parameter spaces differ");
  }
  ComplexityResult result;
  double cross = 0.0;
  for (const auto& entry : lang.entries) {
    if (entry.point_id >= P.size() || entry.label >= P.cluster_count()) {
      throw std::invalid_argument("language_complexity: entry outside assignment matrix");
    }
    const double p = P.rows[entry.point_id][entry.label];
    if (p <= 0.0) {
      result.value = std::numeric_limits<double>::infinity();
      result.offending_point = entry.point_id;
      return result;
    }
    cross -= std::log(p);
  }

  double kl = 0.0;
  if (cfg.beta > 0.0) {
    const Vec mu_pre = flatten(params_pre);
    const Vec mu_post = flatten(params_post);
    const double d = static_cast<double>(mu_pre.size());
    const double ratio = (cfg.posterior_sigma * cfg.posterior_sigma) /
                         (cfg.prior_sigma * cfg.prior_sigma);
    double sq = 0.0;
    for (std::size_t k = 0; k < mu_pre.size(); ++k) {
      const double diff = mu_post[k] - mu_pre[k];
      sq += diff * diff;
    }
    kl = 0.5 * (d * ratio + sq / (cfg.prior_sigma * cfg.prior_sigma) - d - d * std::log(ratio));
  }
  result.value = cross + cfg.beta * kl;
  return result;
}

std::string to_json(const SemanticLanguage& lang) {
  nlohmann::json j;
  j["bits_per_dim"] = lang.bits_per_dim;
  j["codebook"] = nlohmann::json::array();
  for (const Vec& c : lang.codebook) {
    if (c.empty()) {
      j["codebook"].push_back(nullptr);
    } else {
      j["codebook"].push_back(c);
    }
  }
  j["entries"] = nlohmann::json::array();
  for (const auto& e : lang.entries) {
    j["entries"].push_back({{"point_id", e.point_id}, {"label", e.label}, {"code", e.code}});
  }
  return j.dump(2);
}

void write_json_file(const SemanticLanguage& lang, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json(lang) << "\n";
}

}  // namespace semcl
