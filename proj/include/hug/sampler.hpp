#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hug/model.hpp"

namespace hug {

enum class MoveKind { Birth, Death, Change, None };

/// Plane: the change proposal moves the two coordinates of the current plane
/// inside a disc. Ball: all K coordinates move inside a K-ball.
enum class ChangeSupport { Plane, Ball };

struct SamplerConfig {
  double p_birth = 0.2;
  double p_death = 0.2;
  double p_change = 0.6;
  double change_radius = 0.3;
  ChangeSupport change_support = ChangeSupport::Plane;
  std::size_t mh_steps = 200;
  /// Deaths that would leave fewer than `min_sources` points are rejected.
  bool min_source_rule = true;
  std::size_t min_sources = 3;

  /// Throws std::invalid_argument when probabilities or radius are invalid.
  void validate() const;
};

/// Geometric cooling T <- max(c T, T_min).
struct AnnealingSchedule {
  double initial_temperature = 1e4;
  double cooling = 0.99999;
  double min_temperature = 1e-6;
  std::uint64_t iterations = 3'500'000;
  /// Gibbs applications per iteration; 0 means one per active plane (G = L).
  std::size_t gibbs_steps = 0;
  std::uint64_t save_every = 1000;
  std::size_t keep_last = 500;

  static AnnealingSchedule paper();
  /// Shortened run: 3.5e5 iterations with c = 0.9999, still cooling to T_min.
  static AnnealingSchedule desk();

  void validate() const;
  /// Temperature applied at 1-based iteration k.
  double temperature_at(std::uint64_t k) const;
};

/// Iterates T_1, T_2, ... by repeated multiplication, clamped at the floor.
class Cooling {
 public:
  explicit Cooling(const AnnealingSchedule& s)
      : t_(s.initial_temperature), c_(s.cooling), floor_(s.min_temperature) {}
  double current() const { return t_; }
  void advance() { t_ = std::max(c_ * t_, floor_); }

 private:
  double t_;
  double c_;
  double floor_;
};

/// log acceptance ratios; `delta_energy` is U(proposal) - U(current).
double birth_log_ratio(double delta_energy, std::size_t n_current, const SamplerConfig& cfg,
                       double temperature, double window_volume = 1.0);
double death_log_ratio(double delta_energy, std::size_t n_current, const SamplerConfig& cfg,
                       double temperature, double window_volume = 1.0);
double change_log_ratio(double delta_energy, double temperature);

struct StepOutcome {
  MoveKind kind = MoveKind::None;
  bool accepted = false;
};

/// Metropolis-Hastings kernel for p(s | theta, v)^(1/T) on one plane. Holds
/// the current energy so that each step evaluates only the proposal.
class MhKernel {
 public:
  MhKernel(const HugModel& model, PlaneIndex plane, const ModelParams& params, double temperature,
           const SamplerConfig& cfg, const SourceConfig& current);

  StepOutcome step(SourceConfig& s, std::mt19937_64& rng);
  double current_energy() const { return energy_; }

 private:
  double proposal_energy(const std::vector<Vec>& proposal) const;

  const HugModel& model_;
  PlaneIndex plane_;
  ModelParams params_;
  double temperature_;
  const SamplerConfig& cfg_;
  std::pair<std::size_t, std::size_t> axes_;
  double energy_;
};

ChangeSupport parse_change_support(const std::string& name);
std::string change_support_name(ChangeSupport c);

/// One kernel application.
SourceConfig mh_step(const SourceConfig& s, const HugModel& model, PlaneIndex plane,
                     const ModelParams& params, double temperature, const SamplerConfig& cfg,
                     std::mt19937_64& rng);

struct ChainState {
  SourceConfig sources;
  ModelParams theta;
  PlaneIndex plane;
};

/// theta ~ prior^(1/T) once, then G times: v uniform over the active planes
/// followed by M kernel steps on v.
void gibbs_sweep(ChainState& state, const HugModel& model, const ThetaPrior& prior,
                 double temperature, double radius, const SamplerConfig& cfg,
                 std::size_t gibbs_steps, std::mt19937_64& rng);

struct TraceRecord {
  std::uint64_t iteration = 0;
  double temperature = 0.0;
  ModelParams theta;
  PlaneIndex plane;
  SourceConfig sources;
  /// One entry per plane; nullopt on planes with a degenerate data hull.
  std::vector<std::optional<HugStatistics>> stats;
};

struct ChainTrace {
  std::uint64_t seed = 0;
  std::size_t dims = 0;
  SamplerConfig sampler;
  AnnealingSchedule schedule;
  ThetaPrior prior;
  double radius = 0.01;
  std::vector<TraceRecord> records;

  /// The last `keep_last` records (all of them when fewer were saved).
  std::vector<TraceRecord> tail(std::size_t keep_last) const;
};

struct AnnealingOptions {
  SamplerConfig sampler;
  AnnealingSchedule schedule;
  ThetaPrior prior;
  double radius = 0.01;
  std::size_t initial_sources = 4;
  /// Called with each saved record.
  std::function<void(const TraceRecord&)> on_record;
};

ChainTrace simulated_annealing(const HugModel& model, const AnnealingOptions& options,
                               std::uint64_t seed);

}  // namespace hug
