#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hug {

/// A point in the K-dimensional parameter space.
using Vec = std::vector<double>;

/// Raised for malformed input data (parse failures, shape errors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-dimension affine window mapped onto [0, 1].
struct NormalizationSpec {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dims() const { return lo.size(); }
};

/// m samples of K parameters. `normalized` is empty until normalize() runs.
struct Dataset {
  std::vector<std::string> names;
  std::vector<Vec> samples;
  std::vector<Vec> normalized;

  std::size_t size() const { return samples.size(); }
  std::size_t dims() const { return names.size(); }
};

struct SyntheticSpec {
  std::vector<Vec> sources;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  std::vector<std::string> names;  // defaults to solute1..soluteK
};

/// Normalization with margin delta_k = max_k - min_k on each side, or the
/// given per-dimension margins when `margins` is set.
NormalizationSpec normalization_for(const Dataset& raw,
                                    const std::optional<std::vector<double>>& margins = {});

/// Fills raw.normalized; throws std::domain_error on a constant dimension.
NormalizationSpec normalize(Dataset& raw,
                            const std::optional<std::vector<double>>& margins = {});

Vec normalize_point(std::span<const double> x, const NormalizationSpec& spec);
Vec denormalize_point(std::span<const double> u, const NormalizationSpec& spec);
std::vector<Vec> denormalize(const std::vector<Vec>& points, const NormalizationSpec& spec);

/// Convex combination sum_i gamma_i * sources_i.
Vec mix(const std::vector<Vec>& sources, std::span<const double> gamma);

/// Dirichlet(1, ..., 1) draw of length n (normalized unit exponentials).
std::vector<double> dirichlet_ones(std::size_t n, std::mt19937_64& rng);

/// Samples uniformly distributed in the simplex spanned by the sources.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Relative differences |p - t| / |t| * 100 between matched sources.
struct ErrorTable {
  /// cells[i][k] for the i-th matched pair; nullopt where the truth coordinate is 0.
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::size_t> proposed_index;
  std::vector<std::size_t> truth_index;
  std::vector<double> source_mean;     // mean over dimensions, per matched pair
  std::vector<double> dimension_mean;  // mean over pairs, per dimension
  double global_mean = 0.0;
  std::size_t undefined_cells = 0;
  std::vector<std::size_t> unmatched_proposed;
  std::vector<std::size_t> unmatched_truth;
};

enum class Matching { Optimal, Greedy };

/// Pairs proposed and true sources (minimum total Euclidean distance or greedy
/// nearest); returns (proposed, truth) index pairs. Cardinalities may differ.
std::vector<std::pair<std::size_t, std::size_t>> match_sources(const std::vector<Vec>& proposed,
                                                               const std::vector<Vec>& truth,
                                                               Matching how = Matching::Optimal);

ErrorTable relative_error_table(const std::vector<Vec>& proposed, const std::vector<Vec>& truth,
                                Matching how = Matching::Optimal);

/// Header row of names, then numeric rows. Datasets need at least 3 rows;
/// source tables pass a smaller `min_rows`.
Dataset load_csv(const std::filesystem::path& path, std::size_t min_rows = 3);
/// Header row of names then one row per point, written at full precision.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
               const std::vector<Vec>& rows);
void write_error_csv(const std::filesystem::path& path, const ErrorTable& table,
                     const std::vector<std::string>& names);

}  // namespace hug
