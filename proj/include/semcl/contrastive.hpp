#pragma once

#include <deque>
#include <iosfwd>
#include <string>
#include <vector>

#include "semcl/augment.hpp"
#include "semcl/datagen.hpp"
#include "semcl/encoder.hpp"
#include "semcl/numcore.hpp"
#include "semcl/parallel.hpp"

namespace semcl {

/// Per-cluster ring buffers of stale unit-norm embeddings, FIFO eviction.
class MemoryBank {
 public:
  MemoryBank(int clusters, int capacity_per_cluster);

  int cluster_count() const { return static_cast<int>(buffers_.size()); }
  int capacity_per_cluster() const { return capacity_; }
  const std::deque<Vec>& cluster(int l) const { return buffers_.at(l); }
  std::size_t total_size() const;
  bool empty() const { return total_size() == 0; }

  /// Appends to the cluster's buffer, evicting the oldest entry at capacity.
  /// Entries must be unit norm within 1e-9.
  void insert(const Vec& embedding, int cluster);

 private:
  std::vector<std::deque<Vec>> buffers_;
  int capacity_;
};

using ContrastiveSet = std::vector<Vec>;

/// K embeddings sampled uniformly without replacement from every buffer
/// except the anchor's own. Returns fewer when fewer exist.
ContrastiveSet build_contrastive_set(const MemoryBank& bank, int anchor_cluster, int k, Rng& rng);

/// Instance-discrimination loss: -log of the positive's share of the
/// temperature-scaled cosine softmax over {positive} + negatives.
double instance_loss(const Vec& a, const Vec& b, const ContrastiveSet& negatives, double tau);

/// Per-cluster assignment probabilities of a against the bank. Empty
/// buffers get probability zero; rows sum to one.
std::vector<double> cluster_probability(const Vec& a, const MemoryBank& bank, double tau);

/// Shannon entropy of one probability row, 0*ln(0) = 0.
double row_entropy(const std::vector<double>& row);

/// Mean row entropy over a batch of assignment rows; in [0, ln M].
double cluster_loss(const std::vector<std::vector<double>>& rows);

double total_loss(double instance_mean, double cluster, double eta, double epsilon);

void update_memory_bank(MemoryBank& bank, const Vec& embedding, int cluster);

/// Argmax with ties broken toward the lowest index.
int hard_label(const std::vector<double>& row);

struct TrainConfig {
  double tau = 0.1;
  double eta = 1.0;
  double epsilon = 1.0;
  double omega = 0.9;
  double lr = 0.02;
  int epochs = 200;
  int batch_size = 32;
  int k_negatives = 32;
  int m_clusters = 6;
  int capacity_per_cluster = 64;
  int hidden_dim = 32;
  int embed_dim = 16;
  std::uint64_t seed = 1;
  PerturbPolicy augment;
};

void validate(const TrainConfig& cfg);

struct TrainerState {
  EncoderParams kappa;
  EncoderParams kappa_tilde;
  MemoryBank bank;
};

struct EpochMetrics {
  double mean_instance = 0.0;  // mean L_I over the epoch's samples
  double mean_cluster = 0.0;   // sample-weighted mean of batch cluster losses
  double mean_total = 0.0;
};

/// Fresh encoder pair (momentum copy starts as an exact clone) and a bank
/// filled by embedding every point with the initial momentum encoder and
/// clustering with farthest-point-seeded spherical k-means (10 rounds).
TrainerState bootstrap(const Datastream& data, const TrainConfig& cfg, Rng& rng,
                       ExecPolicy policy = ExecPolicy::Serial);

/// One pass over the data: two views per point, anchor through kappa,
/// positive through the momentum encoder, loss against bank negatives,
/// SGD on kappa, momentum update, then bank insertion. Deterministic for a
/// fixed seed under either execution policy.
EpochMetrics train_epoch(TrainerState& state, const Datastream& data, const TrainConfig& cfg,
                         Rng& rng, ExecPolicy policy = ExecPolicy::Serial);

/// Loss terms of one sample with every input held fixed; the pieces the
/// training step combines as eta * instance + epsilon * entropy.
struct SampleLoss {
  double instance = 0.0;
  double entropy = 0.0;
};
SampleLoss sample_loss(const EncoderParams& kappa, const Vec& view1, const Vec& positive,
                       const ContrastiveSet& negatives, const MemoryBank& bank, double tau);

/// Analytic gradient of eta * L_I + epsilon * H for one sample with the bank
/// and the positive held constant; only the anchor path carries gradient.
EncoderParams sample_grad(const EncoderParams& kappa, const Vec& view1, const Vec& positive,
                          const ContrastiveSet& negatives, const MemoryBank& bank, double tau,
                          double eta, double epsilon);

/// Container layout: 8-byte magic "SEMCCKP1", the two encoder blobs (kappa
/// then the momentum copy), bank cluster count and capacity as little-endian
/// uint32, then per cluster a member count and the members as little-endian
/// doubles in insertion order.
void save_checkpoint(const TrainerState& state, std::ostream& out);
TrainerState load_checkpoint(std::istream& in);
void save_checkpoint_file(const TrainerState& state, const std::string& path);
TrainerState load_checkpoint_file(const std::string& path);

}  // namespace semcl
