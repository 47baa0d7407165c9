#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hug/data.hpp"
#include "hug/geometry.hpp"

namespace hug {

/// Candidate sources, coordinates in the normalized window [0, 1]^K.
struct SourceConfig {
  std::vector<Vec> points;

  std::size_t size() const { return points.size(); }
};

/// Energy weights and interaction radius.
struct ModelParams {
  double theta1 = 11.25;  // hull-area mismatch g
  double theta2 = 250.0;  // unexplained fraction n_e
  double theta3 = 0.25;   // source count n
  double theta4 = 1.0;    // close pairs n_r
  double r = 0.01;
};

/// 1-based index of a coordinate plane; planes enumerate axis pairs (a, b),
/// a < b, in lexicographic order: (0,1), (0,2), ..., (1,2), ...
struct PlaneIndex {
  std::size_t v = 1;

  friend bool operator==(const PlaneIndex&, const PlaneIndex&) = default;
};

inline std::size_t plane_count(std::size_t dims) { return dims * (dims - 1) / 2; }
std::pair<std::size_t, std::size_t> plane_axes(PlaneIndex plane, std::size_t dims);

struct HugStatistics {
  double g = 0.0;
  double n_e = 0.0;
  std::size_t n = 0;
  std::size_t n_r = 0;
};

/// Independent Gaussian prior on (theta1..theta4).
struct ThetaPrior {
  std::array<double, 4> mean{11.25, 250.0, 0.25, 1.0};
  std::array<double, 4> variance{1.0, 10.0, 0.01, 0.01};
};

/// Normalized data projected on every plane, with the data-hull areas cached.
/// Immutable after construction.
class HugModel {
 public:
  explicit HugModel(const std::vector<Vec>& normalized_samples);

  std::size_t dims() const { return dims_; }
  std::size_t samples() const { return samples_; }
  std::size_t planes() const { return planes_.size(); }

  /// Zero data-hull area on this plane: g is undefined there.
  bool degenerate(PlaneIndex plane) const;
  double data_hull_area(PlaneIndex plane) const;
  /// Planes with a nondegenerate data hull.
  std::vector<PlaneIndex> active_planes() const;

  /// Throws std::domain_error when the plane is degenerate.
  HugStatistics statistics(const SourceConfig& s, PlaneIndex plane, double radius) const;
  HugStatistics statistics(std::span<const Vec> sources, PlaneIndex plane, double radius) const;

 private:
  struct Plane {
    std::size_t a = 0;
    std::size_t b = 1;
    std::vector<double> xs;
    std::vector<double> ys;
    double area = 0.0;
  };
  const Plane& plane_at(PlaneIndex plane) const;

  std::size_t dims_ = 0;
  std::size_t samples_ = 0;
  std::vector<Plane> planes_;
};

HugStatistics compute_statistics(const SourceConfig& s, const HugModel& model, PlaneIndex plane,
                                 const ModelParams& params);

inline double data_energy(const HugStatistics& st, const ModelParams& p) {
  return p.theta1 * st.g + p.theta2 * st.n_e;
}

inline double interaction_energy(const HugStatistics& st, const ModelParams& p) {
  return p.theta3 * static_cast<double>(st.n) + p.theta4 * static_cast<double>(st.n_r);
}

inline double energy(const HugStatistics& st, const ModelParams& p) {
  return data_energy(st, p) + interaction_energy(st, p);
}

double total_energy(const SourceConfig& s, const HugModel& model, PlaneIndex plane,
                    const ModelParams& params);

/// log p(s_new) - log p(s_old) = U(s_old) - U(s_new) on the given plane.
double log_density_ratio(const SourceConfig& s_new, const SourceConfig& s_old,
                         const HugModel& model, PlaneIndex plane, const ModelParams& params);

/// Pairs of sources whose projections on the plane lie within distance r (closed ball).
std::size_t close_pairs(std::span<const Vec> sources, std::size_t a, std::size_t b, double r);

/// log of the interaction-only Papangelou intensity exp(-[U_i(s + xi) - U_i(s)]).
double interaction_log_papangelou(const SourceConfig& s, const Vec& xi, PlaneIndex plane,
                                  std::size_t dims, const ModelParams& params);

double theta_prior_logpdf(const ModelParams& theta, const ThetaPrior& prior);

/// Draw from prior^(1/T): each coordinate N(mean, T * variance), redrawn until positive.
ModelParams sample_theta_tempered(const ThetaPrior& prior, double temperature, double radius,
                                  std::mt19937_64& rng);

}  // namespace hug
