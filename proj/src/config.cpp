#include "semcl/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semcl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: invalid value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) bad_value(key, value);
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.train.m_clusters = 0;  // auto: content count + 2
  cfg.train.augment.noise_sigma = 0.5;
  cfg.train.augment.mask_fraction = 0.1;
  cfg.train.augment.scale_jitter = 0.1;
  return cfg;
}

void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "data.source") {
    if (value == "mixture") {
      cfg.use_binary = false;
    } else if (value == "binary") {
      cfg.use_binary = true;
    } else {
      bad_value(key, value);
    }
  } else if (key == "data.path") {
    cfg.binary_path = value;
  } else if (key == "data.record_bytes") {
    cfg.record_bytes = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "data.normalize") {
    cfg.normalize = parse_bool(key, value);
  } else if (key == "data.n_contents") {
    cfg.mixture.n_contents = static_cast<int>(parse_int(key, value));
  } else if (key == "data.dim") {
    cfg.mixture.dim = static_cast<int>(parse_int(key, value));
  } else if (key == "data.points") {
    cfg.mixture.points = static_cast<int>(parse_int(key, value));
  } else if (key == "data.noise_fraction") {
    cfg.mixture.noise_fraction = parse_double(key, value);
  } else if (key == "data.separation") {
    cfg.mixture.separation = parse_double(key, value);
  } else if (key == "train.tau") {
    cfg.train.tau = parse_double(key, value);
  } else if (key == "train.eta") {
    cfg.train.eta = parse_double(key, value);
  } else if (key == "train.epsilon") {
    cfg.train.epsilon = parse_double(key, value);
  } else if (key == "train.omega") {
    cfg.train.omega = parse_double(key, value);
  } else if (key == "train.lr") {
    cfg.train.lr = parse_double(key, value);
  } else if (key == "train.epochs") {
    cfg.train.epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "train.batch_size") {
    cfg.train.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "train.negatives") {
    cfg.train.k_negatives = static_cast<int>(parse_int(key, value));
  } else if (key == "train.clusters") {
    cfg.train.m_clusters = static_cast<int>(parse_int(key, value));
  } else if (key == "train.capacity") {
    cfg.train.capacity_per_cluster = static_cast<int>(parse_int(key, value));
  } else if (key == "train.hidden_dim") {
    cfg.train.hidden_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "train.embed_dim") {
    cfg.train.embed_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "augment.noise_sigma") {
    cfg.train.augment.noise_sigma = parse_double(key, value);
  } else if (key == "augment.mask_fraction") {
    cfg.train.augment.mask_fraction = parse_double(key, value);
  } else if (key == "augment.scale_jitter") {
    cfg.train.augment.scale_jitter = parse_double(key, value);
  } else if (key == "split.threshold") {
    cfg.split_threshold = parse_double(key, value);
  } else if (key == "split.mode") {
    if (value == "fixed") {
      cfg.split_auto = false;
    } else if (value == "auto") {
      cfg.split_auto = true;
    } else {
      bad_value(key, value);
    }
  } else if (key == "lang.bits_per_dim") {
    cfg.bits_per_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "lang.beta") {
    cfg.complexity.beta = parse_double(key, value);
  } else if (key == "lang.prior_sigma") {
    cfg.complexity.prior_sigma = parse_double(key, value);
  } else if (key == "lang.posterior_sigma") {
    cfg.complexity.posterior_sigma = parse_double(key, value);
  } else if (key == "channel.rate_bits_per_s") {
    cfg.channel.rate_bits_per_s = parse_double(key, value);
  } else if (key == "channel.packet_bits") {
    cfg.channel.packet_bits = static_cast<int>(parse_int(key, value));
  } else if (key == "sweep.complexities") {
    cfg.sweep_complexities = parse_double_list(key, value);
  } else if (key == "sweep.points") {
    cfg.sweep_points = static_cast<int>(parse_int(key, value));
  } else if (key == "sweep.epochs") {
    cfg.sweep_epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "exec.policy") {
    if (value == "serial") {
      cfg.policy = ExecPolicy::Serial;
    } else if (value == "openmp") {
      cfg.policy = ExecPolicy::OpenMp;
    } else {
      bad_value(key, value);
    }
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "checkpoint") {
    cfg.checkpoint_path = value;
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: " + path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    }
    apply_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

namespace {

// Streams 0.. give the data generator and the trainer unrelated sequences
// even though both hang off the one run seed.
std::uint64_t derived_seed(std::uint64_t seed, int stream) {
  Rng r(seed);
  for (int i = 0; i < stream; ++i) r.next_u64();
  return r.next_u64();
}

}  // namespace

TrainConfig resolved_train(const RunConfig& cfg) {
  TrainConfig tc = cfg.train;
  if (tc.m_clusters <= 0) {
    if (cfg.use_binary) {
      throw std::invalid_argument("config: train.clusters must be set for binary sources");
    }
    tc.m_clusters = cfg.mixture.n_contents + 2;
  }
  tc.seed = derived_seed(cfg.seed, 1);
  return tc;
}

void validate(const RunConfig& cfg) {
  if (cfg.use_binary) {
    if (cfg.binary_path.empty()) throw std::invalid_argument("config: data.path is required");
    if (cfg.record_bytes == 0) {
      throw std::invalid_argument("config: data.record_bytes must be positive");
    }
  } else {
    validate(cfg.mixture);
  }
  validate(resolved_train(cfg));
  if (cfg.split_threshold < 0.0 || cfg.split_threshold > 1.0) {
    throw std::invalid_argument("config: split.threshold outside [0, 1]");
  }
  if (cfg.bits_per_dim < 1 || cfg.bits_per_dim > 16) {
    throw std::invalid_argument("config: lang.bits_per_dim outside [1, 16]");
  }
  validate(cfg.complexity);
  validate(cfg.channel);
  if (cfg.sweep_complexities.empty()) {
    throw std::invalid_argument("config: sweep.complexities is empty");
  }
  for (std::size_t i = 1; i < cfg.sweep_complexities.size(); ++i) {
    if (cfg.sweep_complexities[i] <= cfg.sweep_complexities[i - 1]) {
      throw std::invalid_argument("config: sweep.complexities must be strictly increasing");
    }
  }
  if (cfg.sweep_points < 1) throw std::invalid_argument("config: sweep.points must be positive");
  if (cfg.sweep_epochs < 0) {
    throw std::invalid_argument("config: sweep.epochs must be nonnegative");
  }
  if (cfg.out_dir.empty()) throw std::invalid_argument("config: out directory is empty");
}

Datastream make_data(const RunConfig& cfg) {
  if (cfg.use_binary) return ingest_binary(cfg.binary_path, cfg.record_bytes, cfg.normalize);
  MixtureConfig mc = cfg.mixture;
  mc.seed = derived_seed(cfg.seed, 0);
  return synth_mixture(mc);
}

}  // namespace semcl
