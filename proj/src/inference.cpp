#include "hug/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace hug {

std::size_t GridSpec::cells_per_axis() const {
  if (!(cell_length > 0.0 && cell_length <= 1.0)) {
    throw std::invalid_argument("cell length must lie in (0, 1]");
  }
  const double n = std::round(1.0 / cell_length);
  if (std::abs(n * cell_length - 1.0) > 1e-9) {
    throw std::invalid_argument("cell length must divide 1 into an integer number of cells");
  }
  return static_cast<std::size_t>(n);
}

namespace {

std::size_t cell_of(double x, double len, std::size_t cells) {
  if (!(x > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(std::floor(x / len));
  return std::min(i, cells - 1);
}

}  // namespace

LevelSetGrid contact_probability_grid(std::span<const TraceRecord> records, std::size_t dims,
                                      const GridSpec& spec) {
  if (records.empty()) throw std::domain_error("contact probabilities need a non-empty trace");
  LevelSetGrid grid;
  grid.plane = spec.plane;
  grid.cell_length = spec.cell_length;
  grid.cells = spec.cells_per_axis();
  grid.realizations = records.size();
  const auto [a, b] = plane_axes(spec.plane, dims);
  std::vector<std::size_t> hits(grid.cells * grid.cells, 0);
  std::vector<std::size_t> stamp(grid.cells * grid.cells, 0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (const auto& s : records[r].sources.points) {
      const std::size_t idx = cell_of(s[b], spec.cell_length, grid.cells) * grid.cells +
                              cell_of(s[a], spec.cell_length, grid.cells);
      // Count a cell once per realization.
      if (stamp[idx] != r + 1) {
        stamp[idx] = r + 1;
        ++hits[idx];
      }
    }
  }
  grid.probability.resize(hits.size());
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    grid.probability[i] = static_cast<double>(hits[i]) / n;
  }
  return grid;
}

std::vector<GridCell> level_set(const LevelSetGrid& grid, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  std::vector<GridCell> cells;
  for (std::size_t iy = 0; iy < grid.cells; ++iy) {
    for (std::size_t ix = 0; ix < grid.cells; ++ix) {
      if (grid.at(ix, iy) > lambda) cells.push_back({ix, iy});
    }
  }
  return cells;
}

std::size_t count_cell_clusters(std::span<const GridCell> cells) {
  std::vector<std::size_t> parent(cells.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const auto dx = static_cast<long long>(cells[i].ix) - static_cast<long long>(cells[j].ix);
      const auto dy = static_cast<long long>(cells[i].iy) - static_cast<long long>(cells[j].iy);
      if (std::llabs(dx) <= 1 && std::llabs(dy) <= 1) parent[find(i)] = find(j);
    }
  }
  std::size_t roots = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) roots += find(i) == i ? 1 : 0;
  return roots;
}

namespace {

double squared_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double median_of(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Vec median_point(std::span<const Vec> points) {
  if (points.empty()) return {};
  Vec med(points.front().size());
  std::vector<double> column(points.size());
  for (std::size_t k = 0; k < med.size(); ++k) {
    for (std::size_t i = 0; i < points.size(); ++i) column[i] = points[i][k];
    med[k] = median_of(column);
  }
  return med;
}

ClusterResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                     std::size_t max_iterations) {
  if (k == 0) throw std::domain_error("k-means needs at least one cluster");
  if (points.size() < k) {
    throw std::domain_error("k-means with " + std::to_string(k) + " clusters on " +
                            std::to_string(points.size()) + " points");
  }
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // k-means++ seeding.
  ClusterResult res;
  std::vector<bool> chosen(n, false);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  res.centers.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], res.centers[0]);
  while (res.centers.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = u01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc >= target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Remaining points coincide with existing centres.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    chosen[pick] = true;
    res.centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], res.centers.back()));
    }
  }

  // Lloyd iterations.
  const std::size_t dims = points.front().size();
  res.assignments.assign(n, k);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i], res.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      objective += best_d;
      if (res.assignments[i] != best) {
        res.assignments[i] = best;
        changed = true;
      }
    }
    res.objective_history.push_back(objective);
    res.iterations = iter + 1;
    if (!changed) break;
    std::vector<Vec> sums(k, Vec(dims, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[res.assignments[i]];
      for (std::size_t d = 0; d < dims; ++d) sums[res.assignments[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      // An emptied cluster keeps its previous centre.
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dims; ++d) {
        res.centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
  }

  res.sizes.assign(k, 0);
  std::vector<std::vector<Vec>> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    ++res.sizes[res.assignments[i]];
    members[res.assignments[i]].push_back(points[i]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    res.medians.push_back(members[c].empty() ? res.centers[c] : median_point(members[c]));
  }
  return res;
}

std::vector<Vec> deduplicate(const std::vector<Vec>& points, double tolerance,
                             std::vector<std::size_t>* multiplicity) {
  std::vector<Vec> distinct;
  std::vector<std::size_t> counts;
  for (const auto& p : points) {
    bool found = false;
    for (std::size_t j = 0; j < distinct.size() && !found; ++j) {
      bool same = true;
      for (std::size_t k = 0; k < p.size() && same; ++k) {
        same = std::abs(p[k] - distinct[j][k]) <= tolerance;
      }
      if (same) {
        ++counts[j];
        found = true;
      }
    }
    if (!found) {
      distinct.push_back(p);
      counts.push_back(1);
    }
  }
  if (multiplicity) *multiplicity = std::move(counts);
  return distinct;
}

SequentialKMeansResult sequential_kmeans(const std::vector<Vec>& sources,
                                         const std::vector<std::size_t>& clusters_per_plane,
                                         std::uint64_t seed, PlaneOrder order) {
  SequentialKMeansResult res;
  res.sources = sources;
  if (sources.empty()) return res;
  const std::size_t dims = sources.front().size();
  const std::size_t planes = plane_count(dims);
  if (clusters_per_plane.size() != planes) {
    throw std::invalid_argument("expected " + std::to_string(planes) +
                                " per-plane cluster counts, got " +
                                std::to_string(clusters_per_plane.size()));
  }
  for (std::size_t v = 1; v <= planes; ++v) res.order.push_back(PlaneIndex{v});
  std::mt19937_64 rng(seed);
  if (order == PlaneOrder::Random) std::shuffle(res.order.begin(), res.order.end(), rng);

  for (const auto plane : res.order) {
    const auto [a, b] = plane_axes(plane, dims);
    std::vector<Vec> projected;
    projected.reserve(res.sources.size());
    for (const auto& s : res.sources) projected.push_back({s[a], s[b]});
    const std::size_t k = clusters_per_plane[plane.v - 1];
    const auto distinct = deduplicate(projected, 0.0);
    if (k > distinct.size()) {
      throw std::domain_error("plane " + std::to_string(plane.v) + " asks for " +
                              std::to_string(k) + " clusters but has only " +
                              std::to_string(distinct.size()) + " distinct projections");
    }
    const auto clusters = kmeans(projected, k, rng());
    for (std::size_t i = 0; i < res.sources.size(); ++i) {
      const auto& c = clusters.centers[clusters.assignments[i]];
      res.sources[i][a] = c[0];
      res.sources[i][b] = c[1];
    }
  }
  res.distinct = deduplicate(res.sources, 1e-9, &res.multiplicity);
  return res;
}

namespace {

struct WardCluster {
  Vec centroid;
  std::size_t size = 0;
  std::size_t leaf = 0;  // representative leaf
  bool active = false;
};

double ward_cost(const WardCluster& x, const WardCluster& y) {
  const double sx = static_cast<double>(x.size);
  const double sy = static_cast<double>(y.size);
  return sx * sy / (sx + sy) * squared_distance(x.centroid, y.centroid);
}

}  // namespace

Dendrogram ward_dendrogram(const std::vector<Vec>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw std::domain_error("a dendrogram needs at least two points");
  std::vector<WardCluster> cl(n);
  for (std::size_t i = 0; i < n; ++i) cl[i] = {points[i], 1, i, true};

  struct RawMerge {
    std::size_t leaf_a, leaf_b;
    double height;
  };
  std::vector<RawMerge> raw;
  std::vector<std::size_t> chain;
  std::size_t active = n;
  std::size_t next_start = 0;
  while (active > 1) {
    if (chain.empty()) {
      while (!cl[next_start].active) ++next_start;
      chain.push_back(next_start);
    }
    const std::size_t a = chain.back();
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    if (chain.size() >= 2) {
      best = chain[chain.size() - 2];
      best_d = ward_cost(cl[a], cl[best]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a || !cl[j].active) continue;
      const double d = ward_cost(cl[a], cl[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (chain.size() >= 2 && best == chain[chain.size() - 2]) {
      chain.pop_back();
      chain.pop_back();
      auto& x = cl[a];
      auto& y = cl[best];
      raw.push_back({x.leaf, y.leaf, best_d});
      const double sx = static_cast<double>(x.size);
      const double sy = static_cast<double>(y.size);
      for (std::size_t k = 0; k < x.centroid.size(); ++k) {
        x.centroid[k] = (sx * x.centroid[k] + sy * y.centroid[k]) / (sx + sy);
      }
      x.size += y.size;
      y.active = false;
      --active;
    } else {
      chain.push_back(best);
    }
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& l, const RawMerge& r) { return l.height < r.height; });
  // Replay in height order to assign dendrogram ids.
  std::vector<std::size_t> parent(n), id(n), size(n, 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::iota(id.begin(), id.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  Dendrogram dg;
  dg.leaves = n;
  for (const auto& m : raw) {
    const std::size_t ra = find(m.leaf_a);
    const std::size_t rb = find(m.leaf_b);
    Merge out{std::min(id[ra], id[rb]), std::max(id[ra], id[rb]), m.height, size[ra] + size[rb]};
    parent[rb] = ra;
    size[ra] = out.size;
    id[ra] = n + dg.merges.size();
    dg.merges.push_back(out);
  }
  return dg;
}

double Dendrogram::within_ss(std::size_t k) const {
  if (k == 0 || k > leaves) throw std::invalid_argument("cut outside [1, leaves]");
  double ss = 0.0;
  for (std::size_t i = 0; i < leaves - k; ++i) ss += merges[i].height;
  return ss;
}

std::vector<std::size_t> Dendrogram::cut(std::size_t k) const {
  if (k == 0 || k > leaves) throw std::invalid_argument("cut outside [1, leaves]");
  std::vector<std::size_t> parent(2 * leaves - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < leaves - k; ++i) {
    parent[find(merges[i].a)] = leaves + i;
    parent[find(merges[i].b)] = leaves + i;
  }
  std::vector<std::size_t> labels(leaves);
  std::vector<std::size_t> root_label(2 * leaves - 1, leaves);
  std::size_t next = 0;
  for (std::size_t i = 0; i < leaves; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] == leaves) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

std::vector<MeanStatistics> cumulative_means(std::span<const TraceRecord> records,
                                             PlaneIndex plane) {
  if (records.empty()) throw std::domain_error("cumulative means need a non-empty trace");
  std::vector<MeanStatistics> out;
  out.reserve(records.size());
  MeanStatistics sum;
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& stats = records[t].stats;
    if (plane.v < 1 || plane.v > stats.size() || !stats[plane.v - 1]) {
      throw std::domain_error("no statistics recorded for plane " + std::to_string(plane.v));
    }
    const auto& st = *stats[plane.v - 1];
    sum.g += st.g;
    sum.n_e += st.n_e;
    sum.n += static_cast<double>(st.n);
    sum.n_r += static_cast<double>(st.n_r);
    const double c = static_cast<double>(t + 1);
    out.push_back({sum.g / c, sum.n_e / c, sum.n / c, sum.n_r / c});
  }
  return out;
}

std::map<std::size_t, double> cluster_mass_check(const std::vector<Vec>& points,
                                                 const std::vector<std::size_t>& k_candidates,
                                                 std::size_t top, std::uint64_t seed) {
  std::map<std::size_t, double> out;
  if (points.empty()) throw std::domain_error("cluster mass check needs points");
  for (const std::size_t k : k_candidates) {
    auto res = kmeans(points, k, seed);
    std::sort(res.sizes.begin(), res.sizes.end(), std::greater<>());
    const std::size_t take = std::min(top, res.sizes.size());
    const auto mass = std::accumulate(res.sizes.begin(), res.sizes.begin() + take, std::size_t{0});
    out[k] = static_cast<double>(mass) / static_cast<double>(points.size());
  }
  return out;
}

std::vector<Vec> pooled_sources(std::span<const TraceRecord> records) {
  std::vector<Vec> out;
  for (const auto& r : records) {
    out.insert(out.end(), r.sources.points.begin(), r.sources.points.end());
  }
  return out;
}

}  // namespace hug
