#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "hug/sampler.hpp"

using hug::HugModel;
using hug::ModelParams;
using hug::PlaneIndex;
using hug::SamplerConfig;
using hug::SourceConfig;
using hug::Vec;

namespace {

std::vector<Vec> random_points(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> out(n, Vec(k));
  for (auto& p : out)
    for (auto& x : p) x = u(rng);
  return out;
}

std::vector<Vec> blob_data(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.0 / 3.0, 2.0 / 3.0);
  std::vector<Vec> d(60, Vec(k));
  for (auto& p : d)
    for (auto& x : p) x = u(rng);
  return d;
}

double poisson_tv(const std::map<std::size_t, std::size_t>& counts, std::size_t total,
                  double mean) {
  double tv = 0.0;
  double covered = 0.0;
  for (std::size_t n = 0; n < 60; ++n) {
    const double p = std::exp(-mean + static_cast<double>(n) * std::log(mean) - std::lgamma(n + 1.0));
    const auto it = counts.find(n);
    const double q = it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
    tv += std::abs(p - q);
    covered += p;
  }
  return 0.5 * (tv + (1.0 - covered));
}

// Empirical law of n(s) under the interaction-only target with weight theta3.
double run_poisson(double theta3, std::uint64_t seed, std::size_t samples) {
  const HugModel m(blob_data(2, 1));
  ModelParams p{0.0, 0.0, theta3, 0.0, 0.01};
  SamplerConfig cfg;
  cfg.min_source_rule = false;
  SourceConfig s;
  hug::MhKernel k(m, PlaneIndex{1}, p, 1.0, cfg, s);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 2000; ++i) k.step(s, rng);
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t i = 0; i < samples; ++i) {
    for (int j = 0; j < 5; ++j) k.step(s, rng);
    ++counts[s.size()];
  }
  return poisson_tv(counts, samples, std::exp(-theta3));
}

}  // namespace

TEST_CASE("acceptance ratio with zero energy change is the proposal ratio") {
  SamplerConfig cfg;
  CHECK(std::exp(hug::birth_log_ratio(0.0, 3, cfg, 1.0)) == doctest::Approx(0.25));
  CHECK(std::exp(hug::death_log_ratio(0.0, 4, cfg, 1.0)) == doctest::Approx(4.0));

  // empirically: theta = 0 everywhere, births from n = 3
  const HugModel m(blob_data(2, 2));
  ModelParams zero{0, 0, 0, 0, 0.01};
  SamplerConfig bd;
  bd.p_birth = 0.5;
  bd.p_death = 0.5;
  bd.p_change = 0.0;
  std::mt19937_64 rng(5);
  const auto start = random_points(3, 2, rng);
  int trials = 0;
  int accepted = 0;
  while (trials < 40000) {
    SourceConfig s{start};
    hug::MhKernel k(m, PlaneIndex{1}, zero, 1.0, bd, s);
    const auto out = k.step(s, rng);
    if (out.kind != hug::MoveKind::Birth) continue;  // deaths from n = 3 are refused
    ++trials;
    accepted += out.accepted ? 1 : 0;
  }
  const double se = std::sqrt(0.25 * 0.75 / trials);
  CHECK(std::abs(accepted / double(trials) - 0.25) <= 4.0 * se);
}

TEST_CASE("birth and death ratios are reciprocal") {
  SamplerConfig cfg;
  cfg.p_birth = 0.3;
  cfg.p_death = 0.1;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double du = u(rng);
    const std::size_t n = static_cast<std::size_t>(i % 20);
    const double t = 0.01 + std::abs(u(rng));
    CHECK(hug::birth_log_ratio(du, n, cfg, t) + hug::death_log_ratio(-du, n + 1, cfg, t) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("detailed balance of birth/death and change with real energies") {
  // pi(s) b(s, eta) a(s -> s + eta) == pi(s + eta) d(s + eta, eta) a(s + eta -> s)
  std::mt19937_64 rng(9);
  const HugModel m(blob_data(3, 3));
  SamplerConfig cfg;
  ModelParams p;
  for (int rep = 0; rep < 300; ++rep) {
    SourceConfig s{random_points(3 + rep % 4, 3, rng)};
    SourceConfig t = s;
    t.points.push_back(random_points(1, 3, rng).front());
    const PlaneIndex v{1 + static_cast<std::size_t>(rep % 3)};
    const double temp = std::pow(10.0, (rep % 7) - 3.0);
    const double us = hug::total_energy(s, m, v, p);
    const double ut = hug::total_energy(t, m, v, p);
    const double n = static_cast<double>(s.size());
    const double forward =
        -us / temp + std::log(cfg.p_birth) + std::min(0.0, hug::birth_log_ratio(ut - us, s.size(), cfg, temp));
    const double backward = -ut / temp + std::log(cfg.p_death / (n + 1.0)) +
                            std::min(0.0, hug::death_log_ratio(us - ut, t.size(), cfg, temp));
    CHECK(forward == doctest::Approx(backward).epsilon(1e-9));

    // change: symmetric proposal, Metropolis ratio only
    const double fc = -us / temp + std::min(0.0, hug::change_log_ratio(ut - us, temp));
    const double bc = -ut / temp + std::min(0.0, hug::change_log_ratio(us - ut, temp));
    CHECK(fc == doctest::Approx(bc).epsilon(1e-9));
  }
}

TEST_CASE("death below the minimum source count is rejected") {
  const HugModel m(blob_data(2, 4));
  SamplerConfig cfg;
  cfg.p_birth = 0.0;
  cfg.p_death = 1.0;
  cfg.p_change = 0.0;
  ModelParams zero{0, 0, 0, 0, 0.01};
  std::mt19937_64 rng(11);
  SourceConfig s{random_points(3, 2, rng)};
  hug::MhKernel k(m, PlaneIndex{1}, zero, 1.0, cfg, s);
  for (int i = 0; i < 1000; ++i) {
    const auto o = k.step(s, rng);
    CHECK(o.kind == hug::MoveKind::Death);
    CHECK_FALSE(o.accepted);
  }
  CHECK(s.size() == 3);
}

TEST_CASE("kernel keeps sources in the window and n >= 3; cached energy is exact") {
  const HugModel m(blob_data(3, 5));
  ModelParams p;
  for (const auto support : {hug::ChangeSupport::Plane, hug::ChangeSupport::Ball}) {
    SamplerConfig cfg;
    cfg.change_support = support;
    std::mt19937_64 rng(13);
    SourceConfig s{random_points(4, 3, rng)};
    for (std::size_t v = 1; v <= 3; ++v) {
      hug::MhKernel k(m, PlaneIndex{v}, p, 0.5, cfg, s);
      for (int i = 0; i < 5000; ++i) {
        k.step(s, rng);
        REQUIRE(s.size() >= 3);
        if (i % 50 == 0) {
          CHECK(std::abs(k.current_energy() - hug::total_energy(s, m, PlaneIndex{v}, p)) <= 1e-9);
        }
      }
      for (const auto& pt : s.points) {
        for (const double x : pt) {
          CHECK(x >= 0.0);
          CHECK(x <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("in-plane change leaves the other coordinates untouched") {
  const HugModel m(blob_data(4, 6));
  SamplerConfig cfg;
  cfg.p_birth = 0.0;
  cfg.p_death = 0.0;
  cfg.p_change = 1.0;
  ModelParams p;
  std::mt19937_64 rng(15);
  SourceConfig s{random_points(5, 4, rng)};
  const auto before = s.points;
  const PlaneIndex v{4};  // axes (1, 2)
  hug::MhKernel k(m, v, p, 10.0, cfg, s);
  for (int i = 0; i < 2000; ++i) k.step(s, rng);
  bool moved = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.points[i][0] == before[i][0]);
    CHECK(s.points[i][3] == before[i][3]);
    moved = moved || s.points[i][1] != before[i][1];
  }
  CHECK(moved);
}

TEST_CASE("n(s) follows the Poisson law of the interaction-only target") {
  CHECK(run_poisson(0.25, 17, 40000) < 0.05);
  CHECK(run_poisson(0.0, 19, 40000) < 0.05);
  CHECK(run_poisson(-0.5, 23, 40000) < 0.05);
}

TEST_CASE("cooling is geometric, floors at T_min and stays there") {
  hug::AnnealingSchedule s;
  s.initial_temperature = 1.0;
  s.cooling = 0.5;
  s.min_temperature = 0.01;
  hug::Cooling c(s);
  double prev = c.current();
  CHECK(prev == 1.0);
  for (int i = 0; i < 20; ++i) {
    c.advance();
    CHECK(c.current() <= prev);
    prev = c.current();
  }
  CHECK(c.current() == 0.01);
  CHECK(s.temperature_at(1) == 1.0);
  CHECK(s.temperature_at(2) == 0.5);
  CHECK(s.temperature_at(100) == 0.01);

  const auto desk = hug::AnnealingSchedule::desk();
  CHECK(desk.iterations == 350000);
  CHECK(desk.cooling == 0.9999);
  // the desk schedule reaches the floor before the run ends
  CHECK(desk.initial_temperature * std::pow(desk.cooling, desk.iterations) < desk.min_temperature);
}

TEST_CASE("schedule and sampler validation") {
  hug::AnnealingSchedule s;
  s.iterations = 1000;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // < keep_last * save_every
  s.iterations = 0;
  CHECK_NOTHROW(s.validate());
  s.cooling = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  SamplerConfig cfg;
  cfg.p_change = 0.7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SamplerConfig{};
  cfg.change_radius = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(hug::parse_change_support("ball") == hug::ChangeSupport::Ball);
  CHECK_THROWS_AS(hug::parse_change_support("cube"), std::invalid_argument);
}

TEST_CASE("Gibbs sweep with M = 0 only resamples theta and the plane") {
  const HugModel m(blob_data(3, 7));
  hug::ThetaPrior prior;
  SamplerConfig cfg;
  cfg.mh_steps = 0;
  std::mt19937_64 rng(29);
  hug::ChainState st{SourceConfig{random_points(4, 3, rng)}, ModelParams{}, PlaneIndex{1}};
  const auto before = st.sources.points;
  std::map<std::size_t, std::size_t> freq;
  const std::size_t sweeps = 100000;
  for (std::size_t i = 0; i < sweeps; ++i) {
    hug::gibbs_sweep(st, m, prior, 1.0, 0.01, cfg, 1, rng);
    ++freq[st.plane.v];
  }
  CHECK(st.sources.points == before);
  CHECK(freq.size() == 3);
  const double sigma = std::sqrt(sweeps * (1.0 / 3.0) * (2.0 / 3.0));
  for (const auto& [v, c] : freq) {
    CHECK(v >= 1);
    CHECK(v <= 3);
    CHECK(std::abs(static_cast<double>(c) - sweeps / 3.0) <= 3.0 * sigma);
  }
}

TEST_CASE("Gibbs sweep skips degenerate planes") {
  // axes 0 and 1 are identical: plane 1 is degenerate
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.3, 0.7);
  std::vector<Vec> d;
  for (int i = 0; i < 30; ++i) {
    const double x = u(rng);
    d.push_back({x, x, u(rng)});
  }
  const HugModel m(d);
  hug::ThetaPrior prior;
  SamplerConfig cfg;
  hug::ChainState st{SourceConfig{random_points(4, 3, rng)}, ModelParams{}, PlaneIndex{2}};
  for (int i = 0; i < 200; ++i) {
    cfg.mh_steps = 5;
    hug::gibbs_sweep(st, m, prior, 1.0, 0.01, cfg, 3, rng);
    CHECK(st.plane.v != 1);
  }
}

TEST_CASE("annealing with N = 0 keeps the initial configuration") {
  const HugModel m(blob_data(3, 8));
  hug::AnnealingOptions o;
  o.schedule.iterations = 0;
  const auto tr = hug::simulated_annealing(m, o, 3);
  REQUIRE(tr.records.size() == 1);
  CHECK(tr.records[0].iteration == 0);
  CHECK(tr.records[0].sources.size() == 4);
  CHECK(tr.records[0].stats.size() == 3);
  CHECK(tr.records[0].theta.theta2 == 250.0);
}

TEST_CASE("annealing is deterministic for a fixed seed") {
  const HugModel m(blob_data(3, 9));
  hug::AnnealingOptions o;
  o.schedule.iterations = 300;
  o.schedule.cooling = 0.97;
  o.schedule.initial_temperature = 10.0;
  o.schedule.save_every = 10;
  o.schedule.keep_last = 10;
  o.sampler.mh_steps = 20;
  const auto a = hug::simulated_annealing(m, o, 42);
  const auto b = hug::simulated_annealing(m, o, 42);
  const auto c = hug::simulated_annealing(m, o, 43);
  REQUIRE(a.records.size() == 31);
  REQUIRE(b.records.size() == 31);
  bool differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].sources.points == b.records[i].sources.points);
    CHECK(a.records[i].temperature == b.records[i].temperature);
    CHECK(a.records[i].theta.theta1 == b.records[i].theta.theta1);
    CHECK(a.records[i].plane == b.records[i].plane);
    differs = differs || a.records[i].sources.points != c.records[i].sources.points;
  }
  CHECK(differs);
  CHECK(a.tail(10).size() == 10);
  CHECK(a.tail(10).front().iteration == 210);
}

TEST_CASE("annealing on all-degenerate data is a domain error") {
  std::vector<Vec> d{{0.1, 0.2}, {0.2, 0.3}, {0.3, 0.4}};
  const HugModel m(d);
  hug::AnnealingOptions o;
  o.schedule.iterations = 0;
  CHECK_THROWS_AS(hug::simulated_annealing(m, o, 1), std::domain_error);
}
