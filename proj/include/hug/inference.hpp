#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hug/model.hpp"
#include "hug/sampler.hpp"

namespace hug {

struct GridSpec {
  double cell_length = 0.02;
  PlaneIndex plane;

  /// Number of cells per axis; throws if cell_length does not tile [0, 1].
  std::size_t cells_per_axis() const;
};

struct GridCell {
  std::size_t ix = 0;
  std::size_t iy = 0;

  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

/// Monte Carlo contact probabilities of the projected source process.
struct LevelSetGrid {
  PlaneIndex plane;
  double cell_length = 0.02;
  std::size_t cells = 0;           // per axis
  std::size_t realizations = 0;
  std::vector<double> probability;  // row-major, index iy * cells + ix

  double at(std::size_t ix, std::size_t iy) const { return probability[iy * cells + ix]; }
};

LevelSetGrid contact_probability_grid(std::span<const TraceRecord> records, std::size_t dims,
                                      const GridSpec& grid);

/// Cells with probability strictly above lambda.
std::vector<GridCell> level_set(const LevelSetGrid& grid, double lambda);

/// Number of 8-connected components in a set of cells.
std::size_t count_cell_clusters(std::span<const GridCell> cells);

struct ClusterResult {
  std::vector<std::size_t> assignments;
  std::vector<Vec> centers;
  std::vector<Vec> medians;
  std::vector<std::size_t> sizes;
  /// Within-cluster sum of squares after every assignment step.
  std::vector<double> objective_history;
  std::size_t iterations = 0;
};

/// Coordinatewise median (mean of the two middle values for even counts).
Vec median_point(std::span<const Vec> points);

/// Lloyd iterations from k-means++ seeds, at most `max_iterations`.
ClusterResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                     std::size_t max_iterations = 300);

enum class PlaneOrder { Random, Fixed };

struct SequentialKMeansResult {
  /// Every input source after its coordinates were snapped to cluster centres.
  std::vector<Vec> sources;
  /// Distinct rows of `sources` (1e-9 tolerance) with their multiplicities.
  std::vector<Vec> distinct;
  std::vector<std::size_t> multiplicity;
  std::vector<PlaneIndex> order;
};

/// Clusters the projections plane by plane, overwriting both projected
/// coordinates of each source with its cluster centre. `clusters_per_plane[v-1]`
/// is k_v.
SequentialKMeansResult sequential_kmeans(const std::vector<Vec>& sources,
                                         const std::vector<std::size_t>& clusters_per_plane,
                                         std::uint64_t seed,
                                         PlaneOrder order = PlaneOrder::Random);

std::vector<Vec> deduplicate(const std::vector<Vec>& points, double tolerance,
                             std::vector<std::size_t>* multiplicity = nullptr);

struct Merge {
  std::size_t a = 0;  // cluster ids: leaves are 0..n-1, merge i creates n+i
  std::size_t b = 0;
  double height = 0.0;  // increase of the within-cluster sum of squares
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;  // nondecreasing heights

  /// Within-cluster sum of squares when cut into k clusters.
  double within_ss(std::size_t k) const;
  /// Leaf labels 0..k-1 for a cut into k clusters.
  std::vector<std::size_t> cut(std::size_t k) const;
};

/// Ward agglomerative clustering (nearest-neighbour chain).
Dendrogram ward_dendrogram(const std::vector<Vec>& points);

struct MeanStatistics {
  double g = 0.0;
  double n_e = 0.0;
  double n = 0.0;
  double n_r = 0.0;
};

/// Running means of the plane's statistics over the records.
std::vector<MeanStatistics> cumulative_means(std::span<const TraceRecord> records,
                                             PlaneIndex plane);

/// For each k, fraction of points in the `top` most populated k-means clusters.
std::map<std::size_t, double> cluster_mass_check(const std::vector<Vec>& points,
                                                 const std::vector<std::size_t>& k_candidates,
                                                 std::size_t top, std::uint64_t seed);

/// All sources of the given records, in record order.
std::vector<Vec> pooled_sources(std::span<const TraceRecord> records);

}  // namespace hug
