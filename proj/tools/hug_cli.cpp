// Command-line front end: synth, detect, cluster, evaluate.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <stdexcept>

#include "hug/pipeline.hpp"

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kDomainError = 4 };

struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
  std::optional<std::size_t> chains;
  std::string data;
  std::string change;
  std::optional<double> r, T1, c, T_min, p_b, p_d, p_c, r_c, cell_length, level;
  std::optional<double> N;
  std::optional<std::size_t> G, M, save_every, keep_last;
  std::vector<double> delta;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "TOML run configuration");
  app->add_option("--preset", f.preset, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--chains", f.chains, "Independent chains run concurrently");
  app->add_option("--data", f.data, "Input CSV (header row of parameter names)");
  app->add_option("--r", f.r, "Interaction radius");
  app->add_option("--N", f.N, "Annealing iterations");
  app->add_option("--G", f.G, "Gibbs applications per iteration (0 = number of planes)");
  app->add_option("--M", f.M, "Metropolis-Hastings steps per Gibbs application");
  app->add_option("--T1", f.T1, "Initial temperature");
  app->add_option("--c", f.c, "Cooling coefficient");
  app->add_option("--T_min", f.T_min, "Temperature floor");
  app->add_option("--p_b", f.p_b, "Birth probability");
  app->add_option("--p_d", f.p_d, "Death probability");
  app->add_option("--p_c", f.p_c, "Change probability");
  app->add_option("--r_c", f.r_c, "Change proposal radius");
  app->add_option("--change", f.change, "Change proposal support: plane or ball")
      ->check(CLI::IsMember({"plane", "ball"}));
  app->add_option("--delta", f.delta, "Per-dimension normalization margins")->delimiter(',');
  app->add_option("--save_every", f.save_every, "Iterations between saved records");
  app->add_option("--keep_last", f.keep_last, "Saved records used for inference");
  app->add_option("--cell_length", f.cell_length, "Level-set grid cell length");
  app->add_option("--level", f.level, "Level-set threshold lambda");
}

hug::RunConfig resolve(const CommonFlags& f) {
  json doc = f.config.empty() ? json::object() : hug::load_toml(f.config);
  if (!f.preset.empty()) doc["preset"] = f.preset;
  if (f.seed) doc["seed"] = *f.seed;
  if (f.chains) doc["chains"] = *f.chains;
  if (!f.data.empty()) doc["data"]["path"] = f.data;
  if (!f.delta.empty()) doc["data"]["margins"] = f.delta;
  auto set = [&doc](const char* table, const char* key, const auto& v) {
    if (v) doc[table][key] = *v;
  };
  set("model", "r", f.r);
  set("schedule", "N", f.N);
  set("schedule", "G", f.G);
  set("schedule", "T1", f.T1);
  set("schedule", "c", f.c);
  set("schedule", "T_min", f.T_min);
  set("schedule", "save_every", f.save_every);
  set("schedule", "keep_last", f.keep_last);
  set("sampler", "M", f.M);
  set("sampler", "p_b", f.p_b);
  set("sampler", "p_d", f.p_d);
  set("sampler", "p_c", f.p_c);
  set("sampler", "r_c", f.r_c);
  if (!f.change.empty()) doc["sampler"]["change"] = f.change;
  set("grid", "cell_length", f.cell_length);
  set("grid", "level", f.level);
  auto cfg = hug::RunConfig::from_json(doc);
  cfg.validate();
  return cfg;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const hug::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const hug::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomainError;
  } catch (const std::out_of_range& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomainError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source detection in multidimensional hydrochemical data"};
  app.require_subcommand(1);

  CommonFlags synth_flags, detect_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic mixing dataset and its truth file");
  add_common(synth, synth_flags);
  auto* detect = app.add_subcommand("detect", "Run simulated annealing and write a run directory");
  add_common(detect, detect_flags);

  std::string run_dir = "run";
  std::string cluster_config;
  std::vector<std::size_t> k_per_plane;
  std::optional<std::size_t> k_global, k_min, k_max, top;
  std::optional<std::uint64_t> cluster_seed;
  std::string plane_order;
  auto* cluster = app.add_subcommand("cluster", "Cluster the saved source patterns of a run");
  cluster->add_option("--run", run_dir, "Run directory (trace.jsonl)")->required();
  cluster->add_option("--config", cluster_config, "TOML config with a [cluster] table");
  cluster->add_option("--k-per-plane", k_per_plane, "Sequential k-means cluster counts, one per plane")
      ->delimiter(',');
  cluster->add_option("--k-global", k_global, "Clusters for the k-means on the whole space");
  cluster->add_option("--k-min", k_min, "Smallest k for the cluster-mass check");
  cluster->add_option("--k-max", k_max, "Largest k for the cluster-mass check");
  cluster->add_option("--top", top, "Largest clusters counted by the mass check");
  cluster->add_option("--seed", cluster_seed, "Clustering seed");
  cluster->add_option("--plane-order", plane_order, "random or fixed")
      ->check(CLI::IsMember({"random", "fixed"}));

  std::string eval_run = "run";
  std::string truth;
  std::string matching = "optimal";
  auto* evaluate = app.add_subcommand("evaluate", "Relative errors of proposed vs. true sources");
  evaluate->add_option("--run", eval_run, "Run directory (sources.csv)")->required();
  evaluate->add_option("--truth", truth, "CSV of true sources")->required();
  evaluate->add_option("--matching", matching, "optimal or greedy")
      ->check(CLI::IsMember({"optimal", "greedy"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (*synth) {
    return guarded([&] {
      const auto cfg = resolve(synth_flags);
      const auto out = hug::cmd_synth(cfg, synth_flags.out);
      std::cout << "wrote " << out.data_csv.string() << " (" << out.dataset.size() << " x "
                << out.dataset.dims() << ") and " << out.truth_csv.string() << '\n';
    });
  }
  if (*detect) {
    return guarded([&] {
      const auto cfg = resolve(detect_flags);
      hug::cmd_detect(cfg, detect_flags.out, std::cout);
      std::cout << "run directory: " << detect_flags.out << '\n';
    });
  }
  if (*cluster) {
    return guarded([&] {
      json doc = cluster_config.empty() ? json::object() : hug::load_toml(cluster_config);
      if (!k_per_plane.empty()) doc["cluster"]["k_per_plane"] = k_per_plane;
      if (k_global) doc["cluster"]["k_global"] = *k_global;
      if (k_min) doc["cluster"]["k_min"] = *k_min;
      if (k_max) doc["cluster"]["k_max"] = *k_max;
      if (top) doc["cluster"]["top"] = *top;
      if (cluster_seed) doc["cluster"]["seed"] = *cluster_seed;
      if (!plane_order.empty()) doc["cluster"]["plane_order"] = plane_order;
      const auto cfg = hug::RunConfig::from_json(doc);
      cfg.validate();
      hug::cmd_cluster(run_dir, cfg.cluster, std::cout);
    });
  }
  if (*evaluate) {
    return guarded([&] {
      hug::cmd_evaluate(eval_run, truth,
                        matching == "greedy" ? hug::Matching::Greedy : hug::Matching::Optimal,
                        std::cout);
    });
  }
  return kOk;
}
