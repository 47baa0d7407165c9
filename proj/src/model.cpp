#include "hug/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hug {

std::pair<std::size_t, std::size_t> plane_axes(PlaneIndex plane, std::size_t dims) {
  if (plane.v < 1 || plane.v > plane_count(dims)) {
    throw std::out_of_range("plane index " + std::to_string(plane.v) + " outside [1, " +
                            std::to_string(plane_count(dims)) + "]");
  }
  std::size_t remaining = plane.v - 1;
  for (std::size_t a = 0; a + 1 < dims; ++a) {
    const std::size_t row = dims - a - 1;
    if (remaining < row) return {a, a + 1 + remaining};
    remaining -= row;
  }
  throw std::logic_error("unreachable plane index");
}

HugModel::HugModel(const std::vector<Vec>& normalized_samples) {
  if (normalized_samples.empty()) throw std::domain_error("model needs at least one sample");
  dims_ = normalized_samples.front().size();
  samples_ = normalized_samples.size();
  if (dims_ < 2) throw std::domain_error("model needs at least two dimensions");
  std::vector<Point2> projected(samples_);
  for (std::size_t v = 1; v <= plane_count(dims_); ++v) {
    Plane p;
    std::tie(p.a, p.b) = plane_axes(PlaneIndex{v}, dims_);
    p.xs.reserve(samples_);
    p.ys.reserve(samples_);
    for (std::size_t j = 0; j < samples_; ++j) {
      const auto& row = normalized_samples[j];
      if (row.size() != dims_) throw std::domain_error("ragged sample matrix");
      p.xs.push_back(row[p.a]);
      p.ys.push_back(row[p.b]);
      projected[j] = {row[p.a], row[p.b]};
    }
    p.area = hull_area(monotone_chain_hull(projected));
    planes_.push_back(std::move(p));
  }
}

const HugModel::Plane& HugModel::plane_at(PlaneIndex plane) const {
  if (plane.v < 1 || plane.v > planes_.size()) {
    throw std::out_of_range("plane index " + std::to_string(plane.v) + " outside [1, " +
                            std::to_string(planes_.size()) + "]");
  }
  return planes_[plane.v - 1];
}

bool HugModel::degenerate(PlaneIndex plane) const { return !(plane_at(plane).area > 0.0); }

double HugModel::data_hull_area(PlaneIndex plane) const { return plane_at(plane).area; }

std::vector<PlaneIndex> HugModel::active_planes() const {
  std::vector<PlaneIndex> out;
  for (std::size_t v = 1; v <= planes_.size(); ++v) {
    if (!degenerate(PlaneIndex{v})) out.push_back(PlaneIndex{v});
  }
  return out;
}

std::size_t close_pairs(std::span<const Vec> sources, std::size_t a, std::size_t b, double r) {
  const double r2 = r * r;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = i + 1; j < sources.size(); ++j) {
      const double dx = sources[i][a] - sources[j][a];
      const double dy = sources[i][b] - sources[j][b];
      count += (dx * dx + dy * dy <= r2) ? 1 : 0;
    }
  }
  return count;
}

HugStatistics HugModel::statistics(std::span<const Vec> sources, PlaneIndex plane,
                                   double radius) const {
  const Plane& p = plane_at(plane);
  if (!(p.area > 0.0)) {
    throw std::domain_error("data hull has zero area on plane " + std::to_string(plane.v) +
                            "; drop this plane");
  }
  thread_local std::vector<Point2> projected, scratch, hull;
  HugStatistics st;
  st.n = sources.size();
  double area = 0.0;
  std::size_t explained = 0;
  if (!sources.empty()) {
    projected.clear();
    for (const auto& s : sources) projected.push_back({s[p.a], s[p.b]});
    monotone_chain_hull(projected, scratch, hull);
    area = polygon_area(hull);
    explained = count_inside(hull, p.xs, p.ys);
  }
  st.g = std::abs(area / p.area - 1.0);
  st.n_e = 1.0 - static_cast<double>(explained) / static_cast<double>(samples_);
  st.n_r = close_pairs(sources, p.a, p.b, radius);
  return st;
}

HugStatistics HugModel::statistics(const SourceConfig& s, PlaneIndex plane, double radius) const {
  return statistics(std::span<const Vec>(s.points), plane, radius);
}

HugStatistics compute_statistics(const SourceConfig& s, const HugModel& model, PlaneIndex plane,
                                 const ModelParams& params) {
  return model.statistics(s, plane, params.r);
}

double total_energy(const SourceConfig& s, const HugModel& model, PlaneIndex plane,
                    const ModelParams& params) {
  return energy(model.statistics(s, plane, params.r), params);
}

double log_density_ratio(const SourceConfig& s_new, const SourceConfig& s_old,
                         const HugModel& model, PlaneIndex plane, const ModelParams& params) {
  return total_energy(s_old, model, plane, params) - total_energy(s_new, model, plane, params);
}

double interaction_log_papangelou(const SourceConfig& s, const Vec& xi, PlaneIndex plane,
                                  std::size_t dims, const ModelParams& params) {
  const auto [a, b] = plane_axes(plane, dims);
  // difference of counts, not of energies, so the bound holds without rounding
  const double r2 = params.r * params.r;
  std::size_t new_pairs = 0;
  for (const auto& p : s.points) {
    const double dx = p[a] - xi[a];
    const double dy = p[b] - xi[b];
    new_pairs += (dx * dx + dy * dy <= r2) ? 1 : 0;
  }
  return -(params.theta3 + params.theta4 * static_cast<double>(new_pairs));
}

double theta_prior_logpdf(const ModelParams& theta, const ThetaPrior& prior) {
  const std::array<double, 4> x{theta.theta1, theta.theta2, theta.theta3, theta.theta4};
  double lp = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double var = prior.variance[i];
    if (!(var > 0.0)) throw std::domain_error("prior variance must be positive");
    const double z = x[i] - prior.mean[i];
    lp += -0.5 * std::log(2.0 * std::numbers::pi * var) - z * z / (2.0 * var);
  }
  return lp;
}

ModelParams sample_theta_tempered(const ThetaPrior& prior, double temperature, double radius,
                                  std::mt19937_64& rng) {
  if (!(temperature > 0.0)) throw std::domain_error("temperature must be positive");
  std::array<double, 4> draw{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(prior.variance[i] > 0.0)) throw std::domain_error("prior variance must be positive");
    std::normal_distribution<double> normal(prior.mean[i],
                                            std::sqrt(temperature * prior.variance[i]));
    int attempts = 0;
    do {
      if (++attempts > 100000) {
        throw std::domain_error("tempered prior has negligible mass on positive weights");
      }
      draw[i] = normal(rng);
    } while (!(draw[i] > 0.0));
  }
  return ModelParams{draw[0], draw[1], draw[2], draw[3], radius};
}

}  // namespace hug
