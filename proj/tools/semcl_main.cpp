// semcl: train a contrastive encoder over a datastream, split the points
// into learnable and memorizable sets, build the quantized representation
// language, and sweep transmission KPIs against content complexity.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semcl/config.hpp"
#include "semcl/contrastive.hpp"
#include "semcl/disentangle.hpp"
#include "semcl/semlang.hpp"
#include "semcl/simkpi.hpp"

namespace {

using namespace semcl;

std::string checkpoint_path(const RunConfig& cfg) {
  if (!cfg.checkpoint_path.empty()) return cfg.checkpoint_path;
  return cfg.out_dir + "/checkpoint.bin";
}

void ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
}

int cmd_train(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const Datastream data = make_data(cfg);
  const TrainConfig tc = resolved_train(cfg);
  Rng rng(tc.seed);
  TrainerState state = bootstrap(data, tc, rng, cfg.policy);

  std::string csv = "epoch,mean_L_I,mean_L_D,mean_L_T\n";
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    const EpochMetrics m = train_epoch(state, data, tc, rng, cfg.policy);
    csv += std::to_string(epoch);
    csv += ',';
    csv += format_g9(m.mean_instance);
    csv += ',';
    csv += format_g9(m.mean_cluster);
    csv += ',';
    csv += format_g9(m.mean_total);
    csv += '\n';
  }

  const std::string metrics_path = cfg.out_dir + "/train_metrics.csv";
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot open for writing: " + metrics_path);
  metrics << csv;
  metrics.close();

  save_params_file(state.kappa, cfg.out_dir + "/encoder.bin");
  save_checkpoint_file(state, checkpoint_path(cfg));
  std::cout << "wrote " << metrics_path << "\n";
  std::cout << "wrote " << cfg.out_dir << "/encoder.bin\n";
  std::cout << "wrote " << checkpoint_path(cfg) << "\n";
  return 0;
}

struct SplitOutcome {
  AssignmentMatrix assignment;
  SplitReport split;
};

SplitOutcome compute_split(const RunConfig& cfg, const Datastream& data,
                           const TrainerState& state) {
  if (state.kappa.input_dim != data.dim) {
    throw std::invalid_argument("checkpoint input dim " + std::to_string(state.kappa.input_dim) +
                                " does not match data dim " + std::to_string(data.dim));
  }
  SplitOutcome out;
  out.assignment = assign_all(data, state.kappa, state.bank, cfg.train.tau, cfg.policy);
  const std::vector<double> conf = cluster_confidence(out.assignment);
  const double theta = cfg.split_auto ? auto_threshold(conf) : cfg.split_threshold;
  out.split = rank_and_split(conf, out.assignment.hard_labels, theta);
  return out;
}

int cmd_split(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const Datastream data = make_data(cfg);
  const TrainerState state = load_checkpoint_file(checkpoint_path(cfg));
  const SplitOutcome outcome = compute_split(cfg, data, state);
  const std::string path = cfg.out_dir + "/split.json";
  write_json_file(outcome.split, path);
  std::cout << "threshold " << format_g9(outcome.split.threshold) << ", learnable "
            << outcome.split.learnable_ids.size() << ", memorizable "
            << outcome.split.memorizable_ids.size() << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_build_lang(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const Datastream data = make_data(cfg);
  const TrainerState state = load_checkpoint_file(checkpoint_path(cfg));
  const SplitOutcome outcome = compute_split(cfg, data, state);
  const SemanticLanguage lang = build_language(data, outcome.split, outcome.assignment,
                                               state.kappa, cfg.bits_per_dim, cfg.policy);
  const std::string lang_path = cfg.out_dir + "/language.json";
  write_json_file(lang, lang_path);

  // The model prior is a zero-centered Gaussian over the parameter space;
  // the posterior sits at the trained parameters.
  const ComplexityResult complexity =
      language_complexity(lang, outcome.assignment, zeros_like(state.kappa), state.kappa,
                          cfg.complexity);
  nlohmann::json j;
  j["complexity_nats"] = complexity.value;
  if (complexity.offending_point.has_value()) {
    j["offending_point"] = *complexity.offending_point;
  } else {
    j["offending_point"] = nullptr;
  }
  const std::string cpx_path = cfg.out_dir + "/complexity.json";
  std::ofstream cpx(cpx_path, std::ios::binary);
  if (!cpx) throw std::runtime_error("cannot open for writing: " + cpx_path);
  cpx << j.dump(2) << "\n";

  std::cout << "entries " << lang.entries.size() << ", complexity "
            << format_g9(complexity.value) << " nats\n";
  std::cout << "wrote " << lang_path << "\n";
  std::cout << "wrote " << cpx_path << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  SweepConfig sc;
  sc.mixture = cfg.mixture;
  sc.mixture.points = cfg.sweep_points;
  sc.train = cfg.train;  // m_clusters <= 0 stays auto, resolved per point
  sc.train.epochs = cfg.sweep_epochs;
  sc.threshold = cfg.split_threshold;
  sc.auto_thresh = cfg.split_auto;
  sc.bits_per_dim = cfg.bits_per_dim;
  sc.channel = cfg.channel;
  const std::vector<Scheme> schemes = {Scheme::Classical, Scheme::VanillaSemantic,
                                       Scheme::Contrastive};
  const std::vector<KpiRecord> records =
      run_sweep(cfg.sweep_complexities, schemes, sc, cfg.seed, cfg.policy);
  write_kpi_files(records, cfg.out_dir + "/kpi.csv", cfg.out_dir + "/kpi.json");
  std::cout << "wrote " << cfg.out_dir << "/kpi.csv (" << records.size() << " rows)\n";
  std::cout << "wrote " << cfg.out_dir << "/kpi.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive learnable/memorizable datastream split and semantic KPI simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool seed_given = false;
  std::uint64_t seed_value = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "flat key=value config file")->expected(1);
  app.add_option("--seed", seed_value, "run seed (overrides config)")
      ->expected(1)
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", out_dir, "output directory (overrides config)")->expected(1);
  app.add_option("--set", overrides, "key=value override, repeatable");
  app.fallthrough();

  CLI::App* train = app.add_subcommand("train", "train the encoder, write checkpoint + metrics");
  CLI::App* split = app.add_subcommand("split", "rank clusters and split the datastream");
  CLI::App* build_lang =
      app.add_subcommand("build-lang", "build the semantic language from a checkpoint");
  CLI::App* sweep = app.add_subcommand("sweep", "KPI sweep over content complexities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = semcl::default_config();
    if (!config_path.empty()) semcl::load_config_file(cfg, config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      }
      semcl::apply_kv(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given) cfg.seed = seed_value;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    semcl::validate(cfg);

    if (train->parsed()) return cmd_train(cfg);
    if (split->parsed()) return cmd_split(cfg);
    if (build_lang->parsed()) return cmd_build_lang(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
