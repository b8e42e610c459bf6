#include "semcl/disentangle.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace semcl {

AssignmentMatrix assign_all(const Datastream& data, const EncoderParams& encoder,
                            const MemoryBank& bank, double tau, ExecPolicy policy) {
  if (bank.empty()) throw std::invalid_argument("assign_all: bank is empty");
  AssignmentMatrix out;
  out.rows.resize(data.points.size());
  out.hard_labels.resize(data.points.size());
  std::vector<std::string> errors(data.points.size());
  parallel_for(data.points.size(), policy, [&](std::size_t i) {
    try {
      const Vec z = forward(encoder, data.points[i].x).z;
      out.rows[i] = cluster_probability(z, bank, tau);
      out.hard_labels[i] = hard_label(out.rows[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("assign_all: point " + std::to_string(i) + ": " + errors[i]);
    }
  }
  return out;
}

std::vector<double> cluster_confidence(const AssignmentMatrix& assignment) {
  const int m = assignment.cluster_count();
  std::vector<double> sum(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int l = assignment.hard_labels[i];
    if (l < 0 || l >= m) throw std::invalid_argument("cluster_confidence: label out of range");
    sum[l] += assignment.rows[i][l];
    ++count[l];
  }
  std::vector<double> conf(m, 0.0);
  for (int l = 0; l < m; ++l) {
    if (count[l] > 0) conf[l] = sum[l] / static_cast<double>(count[l]);
  }
  return conf;
}

double auto_threshold(const std::vector<double>& confidence) {
  if (confidence.empty()) throw std::invalid_argument("auto_threshold: empty confidence list");
  std::vector<double> sorted = confidence;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  if (sorted.size() == 1) return sorted[0];
  std::size_t widest = 0;
  for (std::size_t i = 1; i + 1 < sorted.size(); ++i) {
    if (sorted[i] - sorted[i + 1] > sorted[widest] - sorted[widest + 1]) widest = i;
  }
  return 0.5 * (sorted[widest] + sorted[widest + 1]);
}

SplitReport rank_and_split(const std::vector<double>& confidence,
                           const std::vector<int>& hard_labels, double threshold) {
  if (threshold < 0.0 || threshold > 1.0 + 1e-15) {
    throw std::invalid_argument("rank_and_split: threshold outside [0, 1]");
  }
  const int m = static_cast<int>(confidence.size());
  SplitReport report;
  report.confidence = confidence;
  report.threshold = threshold;
  report.ranking.resize(m);
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](int a, int b) { return confidence[a] > confidence[b]; });
  for (std::size_t i = 0; i < hard_labels.size(); ++i) {
    const int l = hard_labels[i];
    if (l < 0 || l >= m) throw std::invalid_argument("rank_and_split: label out of range");
    if (confidence[l] >= threshold) {
      report.learnable_ids.push_back(i);
    } else {
      report.memorizable_ids.push_back(i);
    }
  }
  return report;
}

std::string to_json(const SplitReport& report) {
  nlohmann::json j;
  j["confidence"] = report.confidence;
  j["ranking"] = report.ranking;
  j["learnable_ids"] = report.learnable_ids;
  j["memorizable_ids"] = report.memorizable_ids;
  j["threshold"] = report.threshold;
  return j.dump(2);
}

void write_json_file(const SplitReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json(report) << "\n";
}

}  // namespace semcl
