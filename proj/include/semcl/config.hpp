#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semcl/contrastive.hpp"
#include "semcl/datagen.hpp"
#include "semcl/parallel.hpp"
#include "semcl/semlang.hpp"
#include "semcl/simkpi.hpp"

namespace semcl {

/// One experiment's worth of settings, assembled from defaults, an optional
/// flat key=value file, and command-line overrides, in that order.
struct RunConfig {
  // data.source selects the mixture generator or a raw binary file.
  bool use_binary = false;
  std::string binary_path;
  std::size_t record_bytes = 0;
  bool normalize = true;
  MixtureConfig mixture;

  TrainConfig train;

  double split_threshold = 0.7;
  bool split_auto = false;

  int bits_per_dim = 6;
  ComplexityConfig complexity;

  ChannelConfig channel;

  std::vector<double> sweep_complexities = {1.05, 1.35, 1.61, 1.93, 2.16};
  int sweep_points = 1200;
  int sweep_epochs = 60;

  ExecPolicy policy = ExecPolicy::OpenMp;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string checkpoint_path;  // empty: <out>/checkpoint.bin
};

RunConfig default_config();

/// Applies one dotted key. Unknown keys and unparsable values throw
/// std::invalid_argument naming the key.
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat text format: one key=value per line, blank lines and #-comments
/// ignored. The file never gets written back.
void load_config_file(RunConfig& cfg, const std::string& path);

/// Cross-checks every section against the module preconditions it feeds.
void validate(const RunConfig& cfg);

/// train.clusters <= 0 means auto: mixture content count plus two spill
/// clusters. Binary sources have no content count, so auto is rejected.
TrainConfig resolved_train(const RunConfig& cfg);

Datastream make_data(const RunConfig& cfg);

}  // namespace semcl
