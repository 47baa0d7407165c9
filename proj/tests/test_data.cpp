#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hug/assignment.hpp"
#include "hug/data.hpp"

using hug::Dataset;
using hug::Vec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hug_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

Dataset random_dataset(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Dataset d;
  for (std::size_t j = 0; j < k; ++j) d.names.push_back("p" + std::to_string(j));
  for (std::size_t i = 0; i < m; ++i) {
    Vec row(k);
    for (auto& x : row) x = u(rng);
    d.samples.push_back(row);
  }
  return d;
}

}  // namespace

TEST_CASE("normalization maps min and max to 1/3 and 2/3") {
  Dataset d{{"a", "b"}, {{2.0, 0.0}, {10.0, 1.0}, {6.0, 0.5}}, {}};
  const auto spec = hug::normalize(d);
  CHECK(spec.lo[0] == -6.0);
  CHECK(spec.hi[0] == 18.0);
  CHECK(d.normalized[0][0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(d.normalized[1][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(d.normalized[2][0] == doctest::Approx(0.5).epsilon(1e-15));
  const auto lo = hug::denormalize_point(Vec{0.0, 0.0}, spec);
  const auto hi = hug::denormalize_point(Vec{1.0, 1.0}, spec);
  CHECK(lo == spec.lo);
  CHECK(hi == spec.hi);
}

TEST_CASE("user margins") {
  Dataset d{{"a", "b"}, {{2.0, 0.0}, {10.0, 1.0}}, {}};
  const auto spec = hug::normalize(d, std::vector<double>{0.0, 1.0});
  CHECK(spec.lo[0] == 2.0);
  CHECK(spec.hi[0] == 10.0);
  CHECK(spec.lo[1] == -1.0);
  CHECK_THROWS_AS(hug::normalize(d, std::vector<double>{1.0}), hug::DataError);
}

TEST_CASE("constant dimension is a domain error") {
  Dataset d{{"a", "b"}, {{1.0, 3.0}, {2.0, 3.0}, {4.0, 3.0}}, {}};
  CHECK_THROWS_AS(hug::normalize(d), std::domain_error);
}

TEST_CASE("normalize / denormalize round trip") {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 50; ++rep) {
    auto d = random_dataset(40, 4, rng);
    const auto spec = hug::normalize(d);
    const auto back = hug::denormalize(d.normalized, spec);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(back[i][k] - d.samples[i][k]) <= 1e-12 * std::max(1.0, std::abs(d.samples[i][k])));
        CHECK(d.normalized[i][k] >= 1.0 / 3.0 - 1e-12);
        CHECK(d.normalized[i][k] <= 2.0 / 3.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("mixing with a unit weight vector returns that source") {
  const std::vector<Vec> src{{0.3, 0.78, 0.8}, {0.8, 0.13, 0.8}, {0.7, 0.7, 0.1}};
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::vector<double> e(src.size(), 0.0);
    e[i] = 1.0;
    CHECK(hug::mix(src, e) == src[i]);
  }
}

TEST_CASE("Dirichlet weights lie on the simplex") {
  std::mt19937_64 rng(67);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto g = hug::dirichlet_ones(4, rng);
    CHECK(std::accumulate(g.begin(), g.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (const double x : g) CHECK(x >= 0.0);
  }
}

TEST_CASE("synthetic mean approaches the centroid of the sources") {
  hug::SyntheticSpec spec;
  spec.sources = {{0.3, 0.78, 0.8}, {0.8, 0.13, 0.8}, {0.7, 0.7, 0.1}, {0.2, 0.2, 0.2}};
  spec.samples = 100000;
  spec.seed = 3;
  const auto d = hug::generate_synthetic(spec);
  CHECK(d.names == std::vector<std::string>{"solute1", "solute2", "solute3"});
  for (std::size_t k = 0; k < 3; ++k) {
    double centroid = 0.0;
    for (const auto& s : spec.sources) centroid += s[k] / 4.0;
    double mean = 0.0;
    double sq = 0.0;
    for (const auto& row : d.samples) {
      mean += row[k];
      sq += row[k] * row[k];
    }
    mean /= spec.samples;
    const double var = sq / spec.samples - mean * mean;
    CHECK(std::abs(mean - centroid) <= 3.0 * std::sqrt(var / spec.samples));
  }
}

TEST_CASE("two sources in two dimensions give samples on the segment") {
  hug::SyntheticSpec spec;
  spec.sources = {{0.0, 1.0}, {2.0, 3.0}};
  spec.samples = 500;
  const auto d = hug::generate_synthetic(spec);
  for (const auto& row : d.samples) {
    CHECK(row[1] - row[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row[0] >= 0.0);
    CHECK(row[0] <= 2.0);
  }
}

TEST_CASE("synthetic generation is seeded") {
  hug::SyntheticSpec spec;
  spec.sources = {{0.29, 0.32, 0.33}, {0.67, 0.32, 0.33}, {0.67, 0.67, 0.33}, {0.67, 0.67, 0.76}};
  spec.samples = 100;
  spec.seed = 9;
  CHECK(hug::generate_synthetic(spec).samples == hug::generate_synthetic(spec).samples);
  auto other = spec;
  other.seed = 10;
  CHECK(hug::generate_synthetic(spec).samples != hug::generate_synthetic(other).samples);
}

TEST_CASE("relative errors") {
  const std::vector<Vec> truth{{0.3, 0.78, 0.8}, {0.8, 0.13, 0.8}};
  auto t = hug::relative_error_table(truth, truth);
  CHECK(t.global_mean == 0.0);
  for (const auto& row : t.cells)
    for (const auto& c : row) CHECK(*c == 0.0);

  auto off = truth;
  off[1][0] = 0.88;  // 10% too high
  std::reverse(off.begin(), off.end());
  t = hug::relative_error_table(off, truth);
  REQUIRE(t.cells.size() == 2);
  CHECK(t.truth_index == std::vector<std::size_t>{0, 1});
  CHECK(t.proposed_index == std::vector<std::size_t>{1, 0});
  CHECK(*t.cells[1][0] == doctest::Approx(10.0));
  CHECK(t.source_mean[1] == doctest::Approx(10.0 / 3.0));
  CHECK(t.dimension_mean[0] == doctest::Approx(5.0));
  CHECK(t.global_mean == doctest::Approx(10.0 / 6.0));
}

TEST_CASE("zero truth coordinates are undefined cells") {
  const std::vector<Vec> truth{{0.0, 1.0}};
  const std::vector<Vec> prop{{0.1, 1.1}};
  const auto t = hug::relative_error_table(prop, truth);
  CHECK(t.undefined_cells == 1);
  CHECK_FALSE(t.cells[0][0].has_value());
  CHECK(t.global_mean == doctest::Approx(10.0));
}

TEST_CASE("mismatched cardinalities flag unmatched sources") {
  const std::vector<Vec> truth{{0.1, 0.1}, {0.9, 0.9}, {0.1, 0.9}};
  const std::vector<Vec> prop{{0.88, 0.91}, {0.12, 0.1}};
  auto t = hug::relative_error_table(prop, truth);
  CHECK(t.cells.size() == 2);
  CHECK(t.unmatched_truth == std::vector<std::size_t>{2});
  CHECK(t.unmatched_proposed.empty());
  t = hug::relative_error_table(truth, prop);
  CHECK(t.unmatched_proposed == std::vector<std::size_t>{2});
}

TEST_CASE("optimal matching agrees with exhaustive permutations") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 6);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t rows = static_cast<std::size_t>(size(rng));
    const std::size_t cols = static_cast<std::size_t>(size(rng));
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
    for (auto& r : cost)
      for (auto& c : r) c = u(rng);
    const auto a = hug::min_cost_assignment(cost);
    double got = 0.0;
    std::size_t assigned = 0;
    std::vector<bool> used(cols, false);
    for (std::size_t i = 0; i < rows; ++i) {
      if (!a[i]) continue;
      CHECK_FALSE(used[*a[i]]);
      used[*a[i]] = true;
      got += cost[i][*a[i]];
      ++assigned;
    }
    CHECK(assigned == std::min(rows, cols));
    // brute force over injections of the smaller side into the larger
    double best = 1e300;
    const std::size_t small = std::min(rows, cols);
    const std::size_t big = std::max(rows, cols);
    std::vector<std::size_t> perm(big);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < small; ++i) {
        s += rows <= cols ? cost[i][perm[i]] : cost[perm[i]][i];
      }
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("greedy matching pairs the globally closest first") {
  const std::vector<Vec> truth{{0.0}, {1.0}};
  const std::vector<Vec> prop{{0.9}, {2.5}};
  // greedy takes (0, 1) at 0.1 and is left with 2.5; the optimum costs 0.9 + 1.5
  using Pair = std::pair<std::size_t, std::size_t>;
  const auto has = [](const std::vector<Pair>& v, Pair p) {
    return std::find(v.begin(), v.end(), p) != v.end();
  };
  const auto greedy = hug::match_sources(prop, truth, hug::Matching::Greedy);
  REQUIRE(greedy.size() == 2);
  CHECK(has(greedy, {0, 1}));
  CHECK(has(greedy, {1, 0}));
  const auto optimal = hug::match_sources(prop, truth, hug::Matching::Optimal);
  REQUIRE(optimal.size() == 2);
  CHECK(has(optimal, {0, 0}));
  CHECK(has(optimal, {1, 1}));
}

TEST_CASE("load a 3-column 200-row CSV") {
  const auto p = temp_file("table.csv");
  std::ostringstream text;
  text << "solute1,solute2,solute3\n";
  for (int i = 0; i < 200; ++i) text << i << "," << i * 0.5 << ",-" << i << "e-3\n";
  write_text(p, text.str());
  const auto d = hug::load_csv(p);
  CHECK(d.dims() == 3);
  CHECK(d.size() == 200);
  CHECK(d.samples[10][2] == doctest::Approx(-0.01));
}

TEST_CASE("CSV errors name the row") {
  const auto p = temp_file("bad.csv");
  write_text(p, "a,b\n1,2\n3,\n5,6\n");
  try {
    hug::load_csv(p);
    FAIL("expected a DataError");
  } catch (const hug::DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  write_text(p, "a,b\n1,2\n3,x\n5,6\n");
  CHECK_THROWS_AS(hug::load_csv(p), hug::DataError);
  write_text(p, "a,b\n1,2\n3,4,5\n5,6\n");
  CHECK_THROWS_AS(hug::load_csv(p), hug::DataError);
  write_text(p, "a\n1\n2\n3\n");
  CHECK_THROWS_AS(hug::load_csv(p), hug::DataError);
  write_text(p, "a,b\n1,2\n");
  CHECK_THROWS_AS(hug::load_csv(p), hug::DataError);
  CHECK_NOTHROW(hug::load_csv(p, 1));
  CHECK_THROWS_AS(hug::load_csv(temp_file("missing.csv")), hug::DataError);
}

TEST_CASE("CSV round trip is exact") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> rows(50, Vec(3));
  for (auto& r : rows)
    for (auto& x : r) x = u(rng) * std::pow(10.0, 20.0 * u(rng));
  const auto p = temp_file("round.csv");
  hug::write_csv(p, {"x", "y", "z"}, rows);
  const auto d = hug::load_csv(p);
  CHECK(d.names == std::vector<std::string>{"x", "y", "z"});
  CHECK(d.samples == rows);
}
