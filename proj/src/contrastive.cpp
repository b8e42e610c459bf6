#include "semcl/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "byteio.hpp"

namespace semcl {

namespace {

constexpr double kUnitNormTol = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_unit_norm(const Vec& v, const char* what) {
  if (std::abs(norm(v) - 1.0) > kUnitNormTol) {
    throw std::invalid_argument(std::string(what) + ": embedding is not unit norm");
  }
}

/// Log of the summed exp(cos/tau) mass of one buffer; -inf when empty.
double cluster_log_weight(const Vec& a, const std::deque<Vec>& buffer, double tau) {
  if (buffer.empty()) return kNegInf;
  std::vector<double> scores;
  scores.reserve(buffer.size());
  for (const Vec& e : buffer) scores.push_back(cosine(a, e) / tau);
  return log_sum_exp(scores);
}

}  // namespace

MemoryBank::MemoryBank(int clusters, int capacity_per_cluster) : capacity_(capacity_per_cluster) {
  if (clusters < 1) throw std::invalid_argument("MemoryBank: clusters must be positive");
  if (capacity_per_cluster < 1) {
    throw std::invalid_argument("MemoryBank: capacity_per_cluster must be positive");
  }
  buffers_.resize(clusters);
}

std::size_t MemoryBank::total_size() const {
  std::size_t n = 0;
  for (const auto& b : buffers_) n += b.size();
  return n;
}

void MemoryBank::insert(const Vec& embedding, int cluster) {
  if (cluster < 0 || cluster >= cluster_count()) {
    throw std::invalid_argument("MemoryBank::insert: cluster index out of range");
  }
  check_unit_norm(embedding, "MemoryBank::insert");
  auto& buf = buffers_[cluster];
  buf.push_back(embedding);
  if (static_cast<int>(buf.size()) > capacity_) buf.pop_front();
}

void update_memory_bank(MemoryBank& bank, const Vec& embedding, int cluster) {
  bank.insert(embedding, cluster);
}

ContrastiveSet build_contrastive_set(const MemoryBank& bank, int anchor_cluster, int k, Rng& rng) {
  if (anchor_cluster < 0 || anchor_cluster >= bank.cluster_count()) {
    throw std::invalid_argument("build_contrastive_set: anchor cluster out of range");
  }
  if (k < 0) throw std::invalid_argument("build_contrastive_set: k must be nonnegative");
  std::vector<const Vec*> candidates;
  for (int l = 0; l < bank.cluster_count(); ++l) {
    if (l == anchor_cluster) continue;
    for (const Vec& e : bank.cluster(l)) candidates.push_back(&e);
  }
  const std::size_t take = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  ContrastiveSet out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(*candidates[i]);
  return out;
}

double instance_loss(const Vec& a, const Vec& b, const ContrastiveSet& negatives, double tau) {
  if (tau <= 0.0) throw std::domain_error("instance_loss: temperature must be positive");
  std::vector<double> logits;
  logits.reserve(negatives.size() + 1);
  logits.push_back(cosine(a, b) / tau);
  for (const Vec& n : negatives) logits.push_back(cosine(a, n) / tau);
  return log_sum_exp(logits) - logits[0];
}

std::vector<double> cluster_probability(const Vec& a, const MemoryBank& bank, double tau) {
  if (tau <= 0.0) throw std::domain_error("cluster_probability: temperature must be positive");
  if (bank.empty()) throw std::domain_error("cluster_probability: all buffers are empty");
  const int m = bank.cluster_count();
  std::vector<double> log_w(m);
  std::vector<double> finite;
  for (int l = 0; l < m; ++l) {
    log_w[l] = cluster_log_weight(a, bank.cluster(l), tau);
    if (log_w[l] != kNegInf) finite.push_back(log_w[l]);
  }
  const double total = log_sum_exp(finite);
  std::vector<double> p(m);
  for (int l = 0; l < m; ++l) p[l] = log_w[l] == kNegInf ? 0.0 : std::exp(log_w[l] - total);
  return p;
}

double row_entropy(const std::vector<double>& row) {
  double h = 0.0;
  for (double p : row) {
    if (p < 0.0) throw std::domain_error("row_entropy: negative probability");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double cluster_loss(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::domain_error("cluster_loss: empty batch");
  double acc = 0.0;
  for (const auto& row : rows) {
    double sum = 0.0;
    for (double p : row) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::domain_error("cluster_loss: row does not sum to 1");
    }
    acc += row_entropy(row);
  }
  return acc / static_cast<double>(rows.size());
}

double total_loss(double instance_mean, double cluster, double eta, double epsilon) {
  if (eta < 0.0 || epsilon < 0.0) {
    throw std::invalid_argument("total_loss: weights must be nonnegative");
  }
  return eta * instance_mean + epsilon * cluster;
}

int hard_label(const std::vector<double>& row) {
  if (row.empty()) throw std::invalid_argument("hard_label: empty row");
  int best = 0;
  for (int l = 1; l < static_cast<int>(row.size()); ++l) {
    if (row[l] > row[best]) best = l;
  }
  return best;
}

void validate(const TrainConfig& cfg) {
  if (cfg.tau <= 0.0) throw std::invalid_argument("train: tau must be positive");
  if (cfg.eta < 0.0 || cfg.epsilon < 0.0) {
    throw std::invalid_argument("train: loss weights must be nonnegative");
  }
  if (cfg.omega < 0.0 || cfg.omega > 1.0) throw std::invalid_argument("train: omega outside [0, 1]");
  if (cfg.lr < 0.0) throw std::invalid_argument("train: lr must be nonnegative");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be nonnegative");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be positive");
  if (cfg.k_negatives < 1) throw std::invalid_argument("train: k_negatives must be positive");
  if (cfg.m_clusters < 1) throw std::invalid_argument("train: m_clusters must be positive");
  if (cfg.capacity_per_cluster < 1) {
    throw std::invalid_argument("train: capacity_per_cluster must be positive");
  }
  if (cfg.hidden_dim < 1 || cfg.embed_dim < 1) {
    throw std::invalid_argument("train: encoder dims must be positive");
  }
  validate(cfg.augment);
}

SampleLoss sample_loss(const EncoderParams& kappa, const Vec& view1, const Vec& positive,
                       const ContrastiveSet& negatives, const MemoryBank& bank, double tau) {
  const Vec a = forward(kappa, view1).z;
  SampleLoss out;
  out.instance = instance_loss(a, positive, negatives, tau);
  out.entropy = row_entropy(cluster_probability(a, bank, tau));
  return out;
}

EncoderParams sample_grad(const EncoderParams& kappa, const Vec& view1, const Vec& positive,
                          const ContrastiveSet& negatives, const MemoryBank& bank, double tau,
                          double eta, double epsilon) {
  const Vec a = forward(kappa, view1).z;
  const int n_dim = static_cast<int>(a.size());
  Vec upstream(n_dim, 0.0);

  // Instance part: softmax over {positive, negatives}; d L_I / d s_j is
  // p_j - [j == positive]. The normalization Jacobian inside backward()
  // projects out radial components, so plain dot-product scores are exact.
  {
    std::vector<const Vec*> cands;
    cands.reserve(negatives.size() + 1);
    cands.push_back(&positive);
    for (const Vec& n : negatives) cands.push_back(&n);
    std::vector<double> s(cands.size());
    for (std::size_t j = 0; j < cands.size(); ++j) s[j] = dot(a, *cands[j]) / tau;
    const double lse = log_sum_exp(s);
    for (std::size_t j = 0; j < cands.size(); ++j) {
      const double coeff = eta * (std::exp(s[j] - lse) - (j == 0 ? 1.0 : 0.0)) / tau;
      for (int d = 0; d < n_dim; ++d) upstream[d] += coeff * (*cands[j])[d];
    }
  }

  // Cluster part: with q the member-level softmax and P its per-cluster
  // sums, dH/ds_m = q_m * (sum_l P_l ln P_l - ln P_{cluster(m)}).
  if (epsilon != 0.0) {
    std::vector<const Vec*> members;
    std::vector<int> owner;
    for (int l = 0; l < bank.cluster_count(); ++l) {
      for (const Vec& e : bank.cluster(l)) {
        members.push_back(&e);
        owner.push_back(l);
      }
    }
    if (members.empty()) {
      throw std::domain_error("sample_grad: all buffers are empty");
    }
    std::vector<double> s(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) s[m] = dot(a, *members[m]) / tau;
    const double lse = log_sum_exp(s);
    std::vector<double> q(members.size());
    std::vector<double> cluster_p(bank.cluster_count(), 0.0);
    for (std::size_t m = 0; m < members.size(); ++m) {
      q[m] = std::exp(s[m] - lse);
      cluster_p[owner[m]] += q[m];
    }
    double plogp = 0.0;
    for (double p : cluster_p) {
      if (p > 0.0) plogp += p * std::log(p);
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      const double coeff = epsilon * q[m] * (plogp - std::log(cluster_p[owner[m]])) / tau;
      for (int d = 0; d < n_dim; ++d) upstream[d] += coeff * (*members[m])[d];
    }
  }

  return backward(kappa, view1, upstream);
}

namespace {

std::vector<Vec> embed_all(const EncoderParams& params, const Datastream& data,
                           ExecPolicy policy) {
  std::vector<Vec> out(data.points.size());
  std::vector<std::string> errors(data.points.size());
  parallel_for(data.points.size(), policy, [&](std::size_t i) {
    try {
      out[i] = forward(params, data.points[i].x).z;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      throw degenerate_embedding_error("point " + std::to_string(i) + ": " + errors[i]);
    }
  }
  return out;
}

/// Farthest-point seeding plus 10 rounds of spherical k-means.
std::vector<int> seed_clusters(const std::vector<Vec>& embeddings, int m, Rng& rng,
                               ExecPolicy policy) {
  const std::size_t n = embeddings.size();
  std::vector<Vec> centers;
  centers.reserve(m);
  centers.push_back(embeddings[rng.uniform_int(n)]);
  std::vector<double> min_sq(n);
  auto sq_dist = [](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) min_sq[i] = sq_dist(embeddings[i], centers[0]);
  while (static_cast<int>(centers.size()) < m) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (min_sq[i] > min_sq[best]) best = i;
    }
    centers.push_back(embeddings[best]);
    for (std::size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], sq_dist(embeddings[i], centers.back()));
    }
  }

  std::vector<int> assign(n, 0);
  for (int round = 0; round < 10; ++round) {
    parallel_for(n, policy, [&](std::size_t i) {
      int best = 0;
      double best_cos = dot(embeddings[i], centers[0]);
      for (int l = 1; l < m; ++l) {
        const double c = dot(embeddings[i], centers[l]);
        if (c > best_cos) {
          best_cos = c;
          best = l;
        }
      }
      assign[i] = best;
    });
    for (int l = 0; l < m; ++l) {
      Vec mean(embeddings[0].size(), 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != l) continue;
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += embeddings[i][d];
        ++count;
      }
      if (count == 0) continue;  // empty cluster keeps its previous center
      if (norm(mean) == 0.0) continue;
      centers[l] = normalized(mean);
    }
  }
  return assign;
}

}  // namespace

TrainerState bootstrap(const Datastream& data, const TrainConfig& cfg, Rng& rng,
                       ExecPolicy policy) {
  validate(cfg);
  if (data.points.empty()) throw std::invalid_argument("bootstrap: empty datastream");
  EncoderParams kappa =
      init_params(data.dim, cfg.hidden_dim, cfg.embed_dim, rng, Activation::Tanh);
  TrainerState state{kappa, kappa, MemoryBank(cfg.m_clusters, cfg.capacity_per_cluster)};
  const std::vector<Vec> embeddings = embed_all(state.kappa_tilde, data, policy);
  const std::vector<int> assign = seed_clusters(embeddings, cfg.m_clusters, rng, policy);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    state.bank.insert(embeddings[i], assign[i]);
  }
  return state;
}

EpochMetrics train_epoch(TrainerState& state, const Datastream& data, const TrainConfig& cfg,
                         Rng& rng, ExecPolicy policy) {
  validate(cfg);
  const std::size_t n = data.points.size();
  if (n == 0) throw std::invalid_argument("train_epoch: empty datastream");
  if (state.bank.empty()) throw std::invalid_argument("train_epoch: bank not bootstrapped");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(order[i - 1], order[j]);
  }

  double sum_instance = 0.0;
  double sum_entropy = 0.0;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t b = std::min(batch, n - start);

    // Child generators drawn in batch order keep the two execution policies
    // bit-identical.
    std::vector<Rng> child;
    child.reserve(b);
    for (std::size_t i = 0; i < b; ++i) child.push_back(rng.split());

    std::vector<EncoderParams> grads(b);
    std::vector<double> l_inst(b, 0.0), l_ent(b, 0.0);
    std::vector<Vec> positives(b);
    std::vector<int> labels(b, 0);
    std::vector<std::string> errors(b);

    parallel_for(b, policy, [&](std::size_t i) {
      try {
        const Vec& x = data.points[order[start + i]].x;
        auto [view1, view2] = two_views(x, cfg.augment, child[i]);
        const Vec a = forward(state.kappa, view1).z;
        positives[i] = forward(state.kappa_tilde, view2).z;
        const std::vector<double> row = cluster_probability(a, state.bank, cfg.tau);
        labels[i] = hard_label(row);
        const ContrastiveSet negs =
            build_contrastive_set(state.bank, labels[i], cfg.k_negatives, child[i]);
        l_inst[i] = instance_loss(a, positives[i], negs, cfg.tau);
        l_ent[i] = row_entropy(row);
        grads[i] = sample_grad(state.kappa, view1, positives[i], negs, state.bank, cfg.tau,
                               cfg.eta, cfg.epsilon);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });

    for (std::size_t i = 0; i < b; ++i) {
      if (!errors[i].empty()) {
        throw degenerate_embedding_error("batch starting at " + std::to_string(start) +
                                         ", sample " + std::to_string(i) + " (point " +
                                         std::to_string(order[start + i]) + "): " + errors[i]);
      }
    }

    EncoderParams grad = zeros_like(state.kappa);
    for (std::size_t i = 0; i < b; ++i) {
      const EncoderParams& g = grads[i];
      for (std::size_t k = 0; k < grad.w1.size(); ++k) grad.w1[k] += g.w1[k];
      for (std::size_t k = 0; k < grad.b1.size(); ++k) grad.b1[k] += g.b1[k];
      for (std::size_t k = 0; k < grad.w2.size(); ++k) grad.w2[k] += g.w2[k];
      for (std::size_t k = 0; k < grad.b2.size(); ++k) grad.b2[k] += g.b2[k];
      sum_instance += l_inst[i];
      sum_entropy += l_ent[i];
    }
    const double inv_b = 1.0 / static_cast<double>(b);
    for (double& v : grad.w1) v *= inv_b;
    for (double& v : grad.b1) v *= inv_b;
    for (double& v : grad.w2) v *= inv_b;
    for (double& v : grad.b2) v *= inv_b;

    if (cfg.lr > 0.0) sgd_step(state.kappa, grad, cfg.lr);
    momentum_update(state.kappa_tilde, state.kappa, cfg.omega);
    for (std::size_t i = 0; i < b; ++i) state.bank.insert(positives[i], labels[i]);
  }

  EpochMetrics metrics;
  metrics.mean_instance = sum_instance / static_cast<double>(n);
  metrics.mean_cluster = sum_entropy / static_cast<double>(n);
  metrics.mean_total = total_loss(metrics.mean_instance, metrics.mean_cluster, cfg.eta, cfg.epsilon);
  return metrics;
}

namespace {
constexpr char kCheckpointMagic[8] = {'S', 'E', 'M', 'C', 'C', 'K', 'P', '1'};
}

void save_checkpoint(const TrainerState& state, std::ostream& out) {
  out.write(kCheckpointMagic, 8);
  save_params(state.kappa, out);
  save_params(state.kappa_tilde, out);
  detail::write_u32_le(out, static_cast<std::uint32_t>(state.bank.cluster_count()));
  detail::write_u32_le(out, static_cast<std::uint32_t>(state.bank.capacity_per_cluster()));
  for (int l = 0; l < state.bank.cluster_count(); ++l) {
    const auto& buf = state.bank.cluster(l);
    detail::write_u32_le(out, static_cast<std::uint32_t>(buf.size()));
    for (const Vec& e : buf) {
      for (double d : e) detail::write_f64_le(out, d);
    }
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed");
}

TrainerState load_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, kCheckpointMagic)) {
    throw std::runtime_error("load_checkpoint: bad magic");
  }
  EncoderParams kappa = load_params(in);
  EncoderParams kappa_tilde = load_params(in);
  if (kappa.output_dim != kappa_tilde.output_dim) {
    throw std::runtime_error("load_checkpoint: encoder dims disagree");
  }
  const int clusters = static_cast<int>(detail::read_u32_le(in));
  const int capacity = static_cast<int>(detail::read_u32_le(in));
  if (!in || clusters < 1 || capacity < 1) {
    throw std::runtime_error("load_checkpoint: corrupt bank header");
  }
  TrainerState state{std::move(kappa), std::move(kappa_tilde), MemoryBank(clusters, capacity)};
  for (int l = 0; l < clusters; ++l) {
    const std::uint32_t count = detail::read_u32_le(in);
    if (!in || static_cast<int>(count) > capacity) {
      throw std::runtime_error("load_checkpoint: corrupt buffer length");
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      Vec e(state.kappa.output_dim);
      for (double& d : e) d = detail::read_f64_le(in);
      if (!in) throw std::runtime_error("load_checkpoint: truncated bank data");
      state.bank.insert(e, l);
    }
  }
  return state;
}

void save_checkpoint_file(const TrainerState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_checkpoint(state, out);
}

TrainerState load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return load_checkpoint(in);
}

}  // namespace semcl
