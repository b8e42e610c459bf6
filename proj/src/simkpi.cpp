#include "semcl/simkpi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace semcl {

void validate(const ChannelConfig& ch) {
  if (ch.rate_bits_per_s <= 0.0) throw std::invalid_argument("channel: rate must be positive");
  if (ch.packet_bits < 1) throw std::invalid_argument("channel: packet_bits must be positive");
}

const char* scheme_tag(Scheme s) {
  switch (s) {
    case Scheme::Classical: return "classical";
    case Scheme::VanillaSemantic: return "vanilla_semantic";
    case Scheme::Contrastive: return "contrastive";
  }
  throw std::invalid_argument("scheme_tag: unknown scheme");
}

ClassicalCost classical_cost(const Datastream& data, const ChannelConfig& ch) {
  validate(ch);
  if (data.points.empty()) throw std::invalid_argument("classical_cost: empty datastream");
  ClassicalCost cost;
  cost.bits = static_cast<double>(data.points.size()) * data.record_bits;
  cost.seconds = cost.bits / ch.rate_bits_per_s;
  return cost;
}

double semantic_impact(long long regenerable_packets, double repr_bits, const ChannelConfig& ch) {
  validate(ch);
  if (repr_bits <= 0.0) throw std::domain_error("semantic_impact: repr_bits must be positive");
  if (regenerable_packets < 0) {
    throw std::invalid_argument("semantic_impact: packet count must be nonnegative");
  }
  return static_cast<double>(regenerable_packets) * ch.rate_bits_per_s / repr_bits;
}

std::vector<Vec> embed_corpus(const Datastream& data, const EncoderParams& encoder,
                              ExecPolicy policy) {
  std::vector<Vec> out(data.points.size());
  std::vector<std::string> errors(data.points.size());
  parallel_for(data.points.size(), policy, [&](std::size_t i) {
    try {
      out[i] = forward(encoder, data.points[i].x).z;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("embed_corpus: point " + std::to_string(i) + ": " + errors[i]);
    }
  }
  return out;
}

namespace {

KpiRecord classical_record(Scheme scheme, const Datastream& data, const ChannelConfig& ch) {
  const ClassicalCost cost = classical_cost(data, ch);
  KpiRecord rec;
  rec.scheme = scheme;
  rec.avg_repr_len_bits = data.record_bits;
  rec.semantic_impact = ch.rate_bits_per_s / static_cast<double>(ch.packet_bits);
  rec.total_tx_time_s = cost.seconds;
  return rec;
}

}  // namespace

KpiRecord evaluate_scheme(Scheme scheme, const Datastream& data, const SplitReport& split,
                          const SemanticLanguage& language, const std::vector<Vec>& embeddings,
                          const ChannelConfig& ch) {
  validate(ch);
  if (scheme == Scheme::Classical) return classical_record(scheme, data, ch);
  // An empty language routes everything classically, which is exactly the
  // classical record.
  if (language.empty()) return classical_record(scheme, data, ch);

  if (language.entries.size() != split.learnable_ids.size() ||
      split.learnable_ids.size() + split.memorizable_ids.size() != data.points.size()) {
    throw std::invalid_argument("evaluate_scheme: split and language are inconsistent");
  }
  if (embeddings.size() != data.points.size()) {
    throw std::invalid_argument("evaluate_scheme: embeddings do not cover the datastream");
  }

  // Pooled zeroth-order coder over every coordinate of every entry.
  std::map<int, std::size_t> counts;
  std::size_t total_symbols = 0;
  for (const auto& e : language.entries) {
    for (int s : e.code) ++counts[s];
    total_symbols += e.code.size();
  }
  const double log2_total = std::log2(static_cast<double>(total_symbols));
  std::vector<double> entry_bits(language.entries.size(), 0.0);
  double semantic_bits = 0.0;
  for (std::size_t i = 0; i < language.entries.size(); ++i) {
    double bits = 0.0;
    for (int s : language.entries[i].code) {
      bits += log2_total - std::log2(static_cast<double>(counts.at(s)));
    }
    entry_bits[i] = bits;
    semantic_bits += bits;
  }

  // One representation regenerates every same-cluster record the dequantized
  // centroid reconstructs to cosine >= 0.95.
  std::map<int, long long> regen;
  for (const auto& e : language.entries) {
    if (regen.count(e.label)) continue;
    const Vec& centroid = language.codebook.at(e.label);
    if (centroid.empty()) {
      throw std::invalid_argument("evaluate_scheme: entry cluster has no centroid");
    }
    const Vec recon = dequantize(quantize(centroid, language.bits_per_dim), language.bits_per_dim);
    long long count = 0;
    for (const auto& other : language.entries) {
      if (other.label != e.label) continue;
      if (cosine(recon, embeddings[other.point_id]) >= 0.95) ++count;
    }
    regen[e.label] = count;
  }

  // Zero-bit entries (single-symbol corpus) get a 1-bit floor in the impact
  // denominator only; coded sizes elsewhere stay at their true value.
  double impact_sum = 0.0;
  for (std::size_t i = 0; i < language.entries.size(); ++i) {
    impact_sum += semantic_impact(regen.at(language.entries[i].label),
                                  std::max(entry_bits[i], 1.0), ch);
  }
  const double classical_ipp = ch.rate_bits_per_s / static_cast<double>(ch.packet_bits);
  impact_sum += static_cast<double>(split.memorizable_ids.size()) * classical_ipp;

  KpiRecord rec;
  rec.scheme = scheme;
  rec.avg_repr_len_bits = semantic_bits / static_cast<double>(language.entries.size());
  rec.semantic_impact = impact_sum / static_cast<double>(data.points.size());
  rec.total_tx_time_s =
      (semantic_bits + static_cast<double>(split.memorizable_ids.size()) * data.record_bits) /
      ch.rate_bits_per_s;
  return rec;
}

std::vector<KpiRecord> run_sweep(const std::vector<double>& complexities,
                                 const std::vector<Scheme>& schemes, const SweepConfig& cfg,
                                 std::uint64_t seed, ExecPolicy policy) {
  if (complexities.empty()) throw std::invalid_argument("run_sweep: empty complexity list");
  for (std::size_t i = 1; i < complexities.size(); ++i) {
    if (complexities[i] <= complexities[i - 1]) {
      throw std::invalid_argument("run_sweep: complexities must be strictly increasing");
    }
  }
  if (schemes.empty()) throw std::invalid_argument("run_sweep: no schemes requested");
  validate(cfg.channel);
  if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
    throw std::invalid_argument("run_sweep: threshold outside [0, 1]");
  }
  const bool needs_semantic =
      std::any_of(schemes.begin(), schemes.end(), [](Scheme s) { return s != Scheme::Classical; });

  Rng master(seed);
  std::vector<KpiRecord> table;
  table.reserve(complexities.size() * schemes.size());
  for (std::size_t idx = 0; idx < complexities.size(); ++idx) {
    const std::uint64_t data_seed = master.next_u64();
    const std::uint64_t train_seed = master.next_u64();
    try {
      MixtureConfig mc = mixture_for_complexity(complexities[idx], cfg.mixture);
      mc.seed = data_seed;
      const Datastream data = synth_mixture(mc);
      const double measured = content_complexity(mc);

      SplitReport split, all_split;
      SemanticLanguage lang, vanilla_lang;
      std::vector<Vec> embeddings;
      if (needs_semantic) {
        TrainConfig tc = cfg.train;
        if (tc.m_clusters <= 0) tc.m_clusters = mc.n_contents + 2;
        tc.seed = train_seed;
        Rng rng(tc.seed);
        TrainerState state = bootstrap(data, tc, rng, policy);
        for (int e = 0; e < tc.epochs; ++e) train_epoch(state, data, tc, rng, policy);
        const AssignmentMatrix assignment =
            assign_all(data, state.kappa, state.bank, tc.tau, policy);
        const std::vector<double> conf = cluster_confidence(assignment);
        const double theta = cfg.auto_thresh ? auto_threshold(conf) : cfg.threshold;
        split = rank_and_split(conf, assignment.hard_labels, theta);
        all_split = rank_and_split(conf, assignment.hard_labels, 0.0);
        embeddings = embed_corpus(data, state.kappa, policy);
        lang = build_language(data, split, assignment, state.kappa, cfg.bits_per_dim, policy);
        vanilla_lang =
            build_language(data, all_split, assignment, state.kappa, cfg.bits_per_dim, policy);
      }

      for (Scheme s : schemes) {
        KpiRecord rec = evaluate_scheme(s, data, s == Scheme::Contrastive ? split : all_split,
                                        s == Scheme::Contrastive ? lang : vanilla_lang,
                                        embeddings, cfg.channel);
        rec.content_complexity_nats = measured;
        table.push_back(rec);
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sweep point " + std::to_string(idx) + " (complexity " +
                                  format_g9(complexities[idx]) + "): " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep point " + std::to_string(idx) + " (complexity " +
                               format_g9(complexities[idx]) + "): " + e.what());
    }
  }
  return table;
}

std::string to_csv(const std::vector<KpiRecord>& records) {
  std::string out = "scheme,complexity_nats,avg_repr_len_bits,semantic_impact,total_tx_time_s\n";
  for (const auto& r : records) {
    out += scheme_tag(r.scheme);
    out += ',';
    out += format_g9(r.content_complexity_nats);
    out += ',';
    out += format_g9(r.avg_repr_len_bits);
    out += ',';
    out += format_g9(r.semantic_impact);
    out += ',';
    out += format_g9(r.total_tx_time_s);
    out += '\n';
  }
  return out;
}

std::string to_json(const std::vector<KpiRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) {
    j.push_back({{"scheme", scheme_tag(r.scheme)},
                 {"complexity_nats", r.content_complexity_nats},
                 {"avg_repr_len_bits", r.avg_repr_len_bits},
                 {"semantic_impact", r.semantic_impact},
                 {"total_tx_time_s", r.total_tx_time_s}});
  }
  return j.dump(2);
}

void write_kpi_files(const std::vector<KpiRecord>& records, const std::string& csv_path,
                     const std::string& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open for writing: " + csv_path);
  csv << to_csv(records);
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw std::runtime_error("cannot open for writing: " + json_path);
  js << to_json(records) << "\n";
}

}  // namespace semcl
