#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "hug/config.hpp"
#include "hug/data.hpp"
#include "hug/inference.hpp"
#include "hug/sampler.hpp"
#include "hug/trace_io.hpp"

namespace hug {

namespace fs = std::filesystem;

/// Raw dataset named by the config: the CSV path, else the synthetic spec.
Dataset load_run_dataset(const RunConfig& config);

struct SynthOutput {
  Dataset dataset;
  fs::path data_csv;
  fs::path truth_csv;
};

/// Writes data.csv and truth.csv (ground-truth sources) into out_dir.
SynthOutput cmd_synth(const RunConfig& config, const fs::path& out_dir);

struct ChainOutput {
  fs::path dir;
  ChainTrace trace;
  std::vector<LevelSetGrid> grids;  // one per active plane
  std::vector<std::size_t> level_clusters;
};

/// Normalizes, anneals (one chain per seed), and writes trace.jsonl,
/// levelset_plane<v>.csv, cumulative_plane<v>.csv, config.toml and summary.txt.
/// With several chains each gets a chain<i>/ subdirectory.
std::vector<ChainOutput> cmd_detect(const RunConfig& config, const fs::path& out_dir,
                                    std::ostream& log);

struct ClusterReport {
  std::vector<std::string> names;
  std::size_t pooled = 0;
  std::optional<SequentialKMeansResult> sequential;  // normalized units
  std::vector<Vec> sequential_raw;
  ClusterResult global;                             // normalized units
  std::vector<Vec> medians_raw;
  std::vector<Vec> means_raw;
  std::vector<Vec> sd_raw;
  Dendrogram dendrogram;
  std::map<std::size_t, double> mass;
};

/// Sequential k-means (when k_per_plane is set), global k-means with median
/// points, Ward dendrogram and the cluster-mass check on the last saved
/// configurations. Writes clusters.json, sources.csv and dendrogram.csv.
ClusterReport cmd_cluster(const fs::path& run_dir, const ClusterConfig& cfg, std::ostream& log);

/// Matches run_dir/sources.csv against a truth CSV and writes errors.csv.
ErrorTable cmd_evaluate(const fs::path& run_dir, const fs::path& truth_csv, Matching how,
                        std::ostream& log);

void write_level_set_csv(const fs::path& path, const LevelSetGrid& grid);

}  // namespace hug
