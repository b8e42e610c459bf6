#pragma once

#include <string>
#include <vector>

#include "semcl/contrastive.hpp"
#include "semcl/datagen.hpp"
#include "semcl/disentangle.hpp"
#include "semcl/semlang.hpp"

namespace semcl {

struct ChannelConfig {
  double rate_bits_per_s = 1e6;
  int packet_bits = 1024;
};

void validate(const ChannelConfig& ch);

enum class Scheme { Classical, VanillaSemantic, Contrastive };

const char* scheme_tag(Scheme s);

struct KpiRecord {
  Scheme scheme = Scheme::Classical;
  double content_complexity_nats = 0.0;
  double avg_repr_len_bits = 0.0;
  double semantic_impact = 0.0;
  double total_tx_time_s = 0.0;
};

struct ClassicalCost {
  double bits = 0.0;
  double seconds = 0.0;
};

ClassicalCost classical_cost(const Datastream& data, const ChannelConfig& ch);

/// Packets regenerable per second of representation airtime:
/// regenerable_packets * rate / repr_bits.
double semantic_impact(long long regenerable_packets, double repr_bits, const ChannelConfig& ch);

std::vector<Vec> embed_corpus(const Datastream& data, const EncoderParams& encoder,
                              ExecPolicy policy = ExecPolicy::Serial);

/// KPIs for one scheme over one datastream. The split and language describe
/// the semantic side; both are ignored for the classical scheme, and an
/// empty language reduces the semantic schemes to the classical record.
/// content_complexity_nats is left at 0 for the caller to fill.
KpiRecord evaluate_scheme(Scheme scheme, const Datastream& data, const SplitReport& split,
                          const SemanticLanguage& language, const std::vector<Vec>& embeddings,
                          const ChannelConfig& ch);

/// One pipeline run per complexity: a mixture matched to the target entropy
/// is trained, split, and encoded, then every requested scheme is scored.
struct SweepConfig {
  MixtureConfig mixture;   // template; n_contents and noise_fraction are solved per point
  TrainConfig train;       // m_clusters <= 0 selects n_contents + 2 per point
  double threshold = 0.7;
  bool auto_thresh = false;
  int bits_per_dim = 6;
  ChannelConfig channel;
};

std::vector<KpiRecord> run_sweep(const std::vector<double>& complexities,
                                 const std::vector<Scheme>& schemes, const SweepConfig& cfg,
                                 std::uint64_t seed, ExecPolicy policy = ExecPolicy::Serial);

std::string to_csv(const std::vector<KpiRecord>& records);
std::string to_json(const std::vector<KpiRecord>& records);
void write_kpi_files(const std::vector<KpiRecord>& records, const std::string& csv_path,
                     const std::string& json_path);

}  // namespace semcl
