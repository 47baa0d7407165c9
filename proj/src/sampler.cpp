#include "hug/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hug {

void SamplerConfig::validate() const {
  for (const double p : {p_birth, p_death, p_change}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("move probabilities must lie in [0, 1]");
  }
  if (p_birth + p_death + p_change > 1.0 + 1e-12) {
    throw std::invalid_argument("p_b + p_d + p_c must not exceed 1");
  }
  if ((p_birth > 0.0) != (p_death > 0.0)) {
    throw std::invalid_argument("birth and death must both be enabled or both disabled");
  }
  if (!(change_radius > 0.0)) throw std::invalid_argument("change radius must be positive");
}

AnnealingSchedule AnnealingSchedule::paper() { return AnnealingSchedule{}; }

AnnealingSchedule AnnealingSchedule::desk() {
  AnnealingSchedule s;
  s.iterations = 350'000;
  s.cooling = 0.9999;
  s.save_every = 350;
  return s;
}

void AnnealingSchedule::validate() const {
  if (!(initial_temperature > 0.0)) throw std::invalid_argument("T1 must be positive");
  if (!(cooling > 0.0 && cooling < 1.0)) throw std::invalid_argument("cooling must lie in (0, 1)");
  if (!(min_temperature > 0.0 && min_temperature <= initial_temperature)) {
    throw std::invalid_argument("T_min must lie in (0, T1]");
  }
  if (save_every == 0) throw std::invalid_argument("save_every must be positive");
  if (iterations > 0 && iterations < keep_last * save_every) {
    throw std::invalid_argument("iterations (" + std::to_string(iterations) +
                                ") must be at least keep_last * save_every (" +
                                std::to_string(keep_last * save_every) + ")");
  }
}

double AnnealingSchedule::temperature_at(std::uint64_t k) const {
  Cooling c(*this);
  for (std::uint64_t i = 1; i < k; ++i) c.advance();
  return c.current();
}

double birth_log_ratio(double delta_energy, std::size_t n_current, const SamplerConfig& cfg,
                       double temperature, double window_volume) {
  return -delta_energy / temperature +
         std::log(cfg.p_death * window_volume /
                  (cfg.p_birth * static_cast<double>(n_current + 1)));
}

double death_log_ratio(double delta_energy, std::size_t n_current, const SamplerConfig& cfg,
                       double temperature, double window_volume) {
  return -delta_energy / temperature +
         std::log(cfg.p_birth * static_cast<double>(n_current) / (cfg.p_death * window_volume));
}

double change_log_ratio(double delta_energy, double temperature) {
  return -delta_energy / temperature;
}

namespace {

bool accept(double log_ratio, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  return log_ratio >= 0.0 || u < std::exp(log_ratio);
}

std::size_t uniform_index(std::size_t n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

MhKernel::MhKernel(const HugModel& model, PlaneIndex plane, const ModelParams& params,
                   double temperature, const SamplerConfig& cfg, const SourceConfig& current)
    : model_(model),
      plane_(plane),
      params_(params),
      temperature_(temperature),
      cfg_(cfg),
      axes_(plane_axes(plane, model.dims())),
      energy_(energy(model.statistics(current, plane, params.r), params)) {
  if (!(temperature > 0.0)) throw std::domain_error("temperature must be positive");
}

double MhKernel::proposal_energy(const std::vector<Vec>& proposal) const {
  return energy(model_.statistics(std::span<const Vec>(proposal), plane_, params_.r), params_);
}

StepOutcome MhKernel::step(SourceConfig& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto& pts = s.points;
  const std::size_t n = pts.size();
  const std::size_t k_dims = model_.dims();
  const double u = u01(rng);
  StepOutcome out;

  if (u < cfg_.p_birth) {
    out.kind = MoveKind::Birth;
    Vec eta(k_dims);
    for (auto& x : eta) x = u01(rng);
    pts.push_back(std::move(eta));
    const double e_new = proposal_energy(pts);
    out.accepted = accept(birth_log_ratio(e_new - energy_, n, cfg_, temperature_), rng);
    if (out.accepted) {
      energy_ = e_new;
    } else {
      pts.pop_back();
    }
  } else if (u < cfg_.p_birth + cfg_.p_death) {
    out.kind = MoveKind::Death;
    if (n == 0 || (cfg_.min_source_rule && n <= cfg_.min_sources)) return out;
    const std::size_t i = uniform_index(n, rng);
    std::swap(pts[i], pts.back());
    Vec removed = std::move(pts.back());
    pts.pop_back();
    const double e_new = proposal_energy(pts);
    out.accepted = accept(death_log_ratio(e_new - energy_, n, cfg_, temperature_), rng);
    if (out.accepted) {
      energy_ = e_new;
    } else {
      pts.push_back(std::move(removed));
      std::swap(pts[i], pts.back());
    }
  } else if (u < cfg_.p_birth + cfg_.p_death + cfg_.p_change) {
    out.kind = MoveKind::Change;
    if (n == 0) return out;
    const std::size_t i = uniform_index(n, rng);
    Vec zeta = pts[i];
    bool inside = true;
    if (cfg_.change_support == ChangeSupport::Plane) {
      const auto [a, b] = axes_;
      double dx = 0.0;
      double dy = 0.0;
      do {
        dx = 2.0 * u01(rng) - 1.0;
        dy = 2.0 * u01(rng) - 1.0;
      } while (dx * dx + dy * dy > 1.0);
      zeta[a] += cfg_.change_radius * dx;
      zeta[b] += cfg_.change_radius * dy;
      inside = zeta[a] >= 0.0 && zeta[a] <= 1.0 && zeta[b] >= 0.0 && zeta[b] <= 1.0;
    } else {
      Vec step(k_dims);
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (auto& x : step) {
          x = 2.0 * u01(rng) - 1.0;
          norm2 += x * x;
        }
      } while (norm2 > 1.0);
      for (std::size_t j = 0; j < k_dims; ++j) {
        zeta[j] += cfg_.change_radius * step[j];
        inside = inside && zeta[j] >= 0.0 && zeta[j] <= 1.0;
      }
    }
    // Proposals leaving W are rejected, not reflected.
    if (!inside) return out;
    std::swap(pts[i], zeta);
    const double e_new = proposal_energy(pts);
    out.accepted = accept(change_log_ratio(e_new - energy_, temperature_), rng);
    if (out.accepted) {
      energy_ = e_new;
    } else {
      std::swap(pts[i], zeta);
    }
  }
  return out;
}

ChangeSupport parse_change_support(const std::string& name) {
  if (name == "plane") return ChangeSupport::Plane;
  if (name == "ball") return ChangeSupport::Ball;
  throw std::invalid_argument("unknown change support '" + name + "' (expected plane or ball)");
}

std::string change_support_name(ChangeSupport c) {
  return c == ChangeSupport::Plane ? "plane" : "ball";
}

SourceConfig mh_step(const SourceConfig& s, const HugModel& model, PlaneIndex plane,
                     const ModelParams& params, double temperature, const SamplerConfig& cfg,
                     std::mt19937_64& rng) {
  SourceConfig next = s;
  MhKernel kernel(model, plane, params, temperature, cfg, next);
  kernel.step(next, rng);
  return next;
}

void gibbs_sweep(ChainState& state, const HugModel& model, const ThetaPrior& prior,
                 double temperature, double radius, const SamplerConfig& cfg,
                 std::size_t gibbs_steps, std::mt19937_64& rng) {
  const auto active = model.active_planes();
  if (active.empty()) throw std::domain_error("every plane has a degenerate data hull");
  state.theta = sample_theta_tempered(prior, temperature, radius, rng);
  for (std::size_t g = 0; g < gibbs_steps; ++g) {
    // A uniform prior on v stays uniform under tempering.
    state.plane = active[uniform_index(active.size(), rng)];
    if (cfg.mh_steps == 0) continue;
    MhKernel kernel(model, state.plane, state.theta, temperature, cfg, state.sources);
    for (std::size_t m = 0; m < cfg.mh_steps; ++m) kernel.step(state.sources, rng);
  }
}

std::vector<TraceRecord> ChainTrace::tail(std::size_t keep_last) const {
  const std::size_t start = records.size() > keep_last ? records.size() - keep_last : 0;
  return {records.begin() + static_cast<std::ptrdiff_t>(start), records.end()};
}

namespace {

TraceRecord make_record(const HugModel& model, const ChainState& state, std::uint64_t iteration,
                        double temperature) {
  TraceRecord rec;
  rec.iteration = iteration;
  rec.temperature = temperature;
  rec.theta = state.theta;
  rec.plane = state.plane;
  rec.sources = state.sources;
  for (std::size_t v = 1; v <= model.planes(); ++v) {
    if (model.degenerate(PlaneIndex{v})) {
      rec.stats.emplace_back(std::nullopt);
    } else {
      rec.stats.emplace_back(model.statistics(state.sources, PlaneIndex{v}, state.theta.r));
    }
  }
  return rec;
}

}  // namespace

ChainTrace simulated_annealing(const HugModel& model, const AnnealingOptions& options,
                               std::uint64_t seed) {
  options.sampler.validate();
  options.schedule.validate();
  if (!(options.radius > 0.0)) throw std::invalid_argument("interaction radius must be positive");
  const auto active = model.active_planes();
  if (active.empty()) throw std::domain_error("every plane has a degenerate data hull");

  ChainTrace trace;
  trace.seed = seed;
  trace.dims = model.dims();
  trace.sampler = options.sampler;
  trace.schedule = options.schedule;
  trace.prior = options.prior;
  trace.radius = options.radius;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ChainState state;
  for (std::size_t i = 0; i < options.initial_sources; ++i) {
    Vec p(model.dims());
    for (auto& x : p) x = u01(rng);
    state.sources.points.push_back(std::move(p));
  }
  const auto& mean = options.prior.mean;
  state.theta = ModelParams{mean[0], mean[1], mean[2], mean[3], options.radius};
  state.plane = active.front();

  const std::size_t gibbs_steps =
      options.schedule.gibbs_steps ? options.schedule.gibbs_steps : model.planes();

  auto save = [&](std::uint64_t k, double t) {
    trace.records.push_back(make_record(model, state, k, t));
    if (options.on_record) options.on_record(trace.records.back());
  };

  Cooling cooling(options.schedule);
  save(0, cooling.current());
  for (std::uint64_t k = 1; k <= options.schedule.iterations; ++k) {
    const double t = cooling.current();
    gibbs_sweep(state, model, options.prior, t, options.radius, options.sampler, gibbs_steps, rng);
    if (k % options.schedule.save_every == 0) save(k, t);
    cooling.advance();
  }
  return trace;
}

}  // namespace hug
