#pragma once

#include <string>
#include <vector>

#include "semcl/contrastive.hpp"
#include "semcl/datagen.hpp"
#include "semcl/encoder.hpp"
#include "semcl/parallel.hpp"

namespace semcl {

/// Soft cluster responsibilities for a corpus plus their argmax labels.
struct AssignmentMatrix {
  std::vector<std::vector<double>> rows;  // one probability row per point
  std::vector<int> hard_labels;           // argmax per row, ties to lowest index

  std::size_t size() const { return rows.size(); }
  int cluster_count() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
};

/// Outcome of the confidence ranking: which points transmit semantically.
struct SplitReport {
  std::vector<double> confidence;       // per cluster, in [0, 1]
  std::vector<int> ranking;             // clusters sorted by descending confidence
  std::vector<std::size_t> learnable_ids;
  std::vector<std::size_t> memorizable_ids;
  double threshold = 0.0;
};

/// Scores every point against the bank using its raw, unperturbed input.
AssignmentMatrix assign_all(const Datastream& data, const EncoderParams& encoder,
                            const MemoryBank& bank, double tau,
                            ExecPolicy policy = ExecPolicy::Serial);

/// Mean member probability per cluster; clusters with no members score 0.
std::vector<double> cluster_confidence(const AssignmentMatrix& assignment);

/// Midpoint of the largest gap in the descending confidence sequence.
/// A single cluster has no gap; its own confidence is returned so the
/// default comparison keeps it learnable.
double auto_threshold(const std::vector<double>& confidence);

/// Clusters at or above the threshold are learnable; their members form
/// learnable_ids and everything else is memorizable.
SplitReport rank_and_split(const std::vector<double>& confidence,
                           const std::vector<int>& hard_labels, double threshold);

std::string to_json(const SplitReport& report);
void write_json_file(const SplitReport& report, const std::string& path);

}  // namespace semcl
