#include "hug/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hug/assignment.hpp"

namespace hug {

NormalizationSpec normalization_for(const Dataset& raw,
                                    const std::optional<std::vector<double>>& margins) {
  const std::size_t k_dims = raw.dims();
  if (raw.samples.empty()) throw DataError("cannot normalize an empty dataset");
  if (margins && margins->size() != k_dims) {
    throw DataError("expected " + std::to_string(k_dims) + " normalization margins, got " +
                    std::to_string(margins->size()));
  }
  NormalizationSpec spec;
  spec.lo.resize(k_dims);
  spec.hi.resize(k_dims);
  for (std::size_t k = 0; k < k_dims; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : raw.samples) {
      lo = std::min(lo, row[k]);
      hi = std::max(hi, row[k]);
    }
    if (!(hi > lo)) {
      throw std::domain_error("dimension '" + raw.names[k] + "' is constant; cannot normalize");
    }
    const double delta = margins ? (*margins)[k] : hi - lo;
    if (!(delta >= 0.0)) throw DataError("normalization margin must be nonnegative");
    spec.lo[k] = lo - delta;
    spec.hi[k] = hi + delta;
  }
  return spec;
}

Vec normalize_point(std::span<const double> x, const NormalizationSpec& spec) {
  Vec u(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    u[k] = (x[k] - spec.lo[k]) / (spec.hi[k] - spec.lo[k]);
  }
  return u;
}

Vec denormalize_point(std::span<const double> u, const NormalizationSpec& spec) {
  Vec x(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    x[k] = spec.lo[k] + u[k] * (spec.hi[k] - spec.lo[k]);
  }
  return x;
}

NormalizationSpec normalize(Dataset& raw, const std::optional<std::vector<double>>& margins) {
  auto spec = normalization_for(raw, margins);
  raw.normalized.clear();
  raw.normalized.reserve(raw.size());
  for (const auto& row : raw.samples) raw.normalized.push_back(normalize_point(row, spec));
  return spec;
}

std::vector<Vec> denormalize(const std::vector<Vec>& points, const NormalizationSpec& spec) {
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(denormalize_point(p, spec));
  return out;
}

Vec mix(const std::vector<Vec>& sources, std::span<const double> gamma) {
  if (sources.empty()) return {};
  Vec d(sources.front().size(), 0.0);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += gamma[i] * sources[i][k];
  }
  return d;
}

std::vector<double> dirichlet_ones(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> unit_exp(1.0);
  std::vector<double> gamma(n);
  double total = 0.0;
  for (auto& g : gamma) {
    g = unit_exp(rng);
    total += g;
  }
  for (auto& g : gamma) g /= total;
  return gamma;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.sources.size() < 2) throw DataError("synthetic mixing needs at least two sources");
  const std::size_t k_dims = spec.sources.front().size();
  for (const auto& s : spec.sources) {
    if (s.size() != k_dims) throw DataError("synthetic sources have inconsistent dimensions");
  }
  Dataset d;
  d.names = spec.names;
  if (d.names.empty()) {
    for (std::size_t k = 0; k < k_dims; ++k) d.names.push_back("solute" + std::to_string(k + 1));
  }
  if (d.names.size() != k_dims) throw DataError("synthetic names do not match dimension");
  std::mt19937_64 rng(spec.seed);
  d.samples.reserve(spec.samples);
  for (std::size_t j = 0; j < spec.samples; ++j) {
    const auto gamma = dirichlet_ones(spec.sources.size(), rng);
    d.samples.push_back(mix(spec.sources, gamma));
  }
  return d;
}

namespace {

double distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> match_sources(const std::vector<Vec>& proposed,
                                                               const std::vector<Vec>& truth,
                                                               Matching how) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (proposed.empty() || truth.empty()) return pairs;
  std::vector<std::vector<double>> cost(proposed.size(), std::vector<double>(truth.size()));
  for (std::size_t i = 0; i < proposed.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) cost[i][j] = distance(proposed[i], truth[j]);
  }
  if (how == Matching::Optimal) {
    const auto assignment = min_cost_assignment(cost);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i]) pairs.emplace_back(i, *assignment[i]);
    }
    return pairs;
  }
  // Greedy: repeatedly take the globally closest unmatched pair.
  std::vector<bool> used_p(proposed.size()), used_t(truth.size());
  const std::size_t count = std::min(proposed.size(), truth.size());
  for (std::size_t step = 0; step < count; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < proposed.size(); ++i) {
      if (used_p[i]) continue;
      for (std::size_t j = 0; j < truth.size(); ++j) {
        if (!used_t[j] && cost[i][j] < best) {
          best = cost[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    used_p[bi] = used_t[bj] = true;
    pairs.emplace_back(bi, bj);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

ErrorTable relative_error_table(const std::vector<Vec>& proposed, const std::vector<Vec>& truth,
                                Matching how) {
  ErrorTable t;
  auto pairs = match_sources(proposed, truth, how);
  // Rows follow the order of the true sources.
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  const std::size_t k_dims = truth.empty() ? 0 : truth.front().size();

  std::vector<bool> seen_p(proposed.size()), seen_t(truth.size());
  std::vector<double> dim_sum(k_dims, 0.0);
  std::vector<std::size_t> dim_count(k_dims, 0);
  double total = 0.0;
  std::size_t total_count = 0;
  for (const auto& [i, j] : pairs) {
    seen_p[i] = seen_t[j] = true;
    t.proposed_index.push_back(i);
    t.truth_index.push_back(j);
    std::vector<std::optional<double>> row(k_dims);
    double row_sum = 0.0;
    std::size_t row_count = 0;
    for (std::size_t k = 0; k < k_dims; ++k) {
      const double ref = truth[j][k];
      if (ref == 0.0) {
        ++t.undefined_cells;
        continue;
      }
      const double pct = std::abs(proposed[i][k] - ref) / std::abs(ref) * 100.0;
      row[k] = pct;
      row_sum += pct;
      ++row_count;
      dim_sum[k] += pct;
      ++dim_count[k];
      total += pct;
      ++total_count;
    }
    t.cells.push_back(std::move(row));
    t.source_mean.push_back(row_count ? row_sum / static_cast<double>(row_count)
                                      : std::numeric_limits<double>::quiet_NaN());
  }
  for (std::size_t k = 0; k < k_dims; ++k) {
    t.dimension_mean.push_back(dim_count[k] ? dim_sum[k] / static_cast<double>(dim_count[k])
                                            : std::numeric_limits<double>::quiet_NaN());
  }
  t.global_mean = total_count ? total / static_cast<double>(total_count)
                              : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < proposed.size(); ++i) {
    if (!seen_p[i]) t.unmatched_proposed.push_back(i);
  }
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (!seen_t[j]) t.unmatched_truth.push_back(j);
  }
  return t;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::size_t min_rows) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (!have_header) {
      d.names = std::move(cells);
      if (d.names.size() < 2) {
        throw DataError(path.string() + ": need at least 2 columns, found " +
                        std::to_string(d.names.size()));
      }
      have_header = true;
      continue;
    }
    if (cells.size() != d.names.size()) {
      throw DataError(path.string() + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(d.names.size()));
    }
    Vec row(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto& c = cells[k];
      if (c.empty()) {
        throw DataError(path.string() + ": row " + std::to_string(line_no) + " has a blank cell in column '" +
                        d.names[k] + "'");
      }
      const char* first = c.data();
      const char* last = c.data() + c.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, row[k]);
      if (ec != std::errc() || ptr != last || !std::isfinite(row[k])) {
        throw DataError(path.string() + ": row " + std::to_string(line_no) + " column '" + d.names[k] +
                        "' is not numeric: '" + c + "'");
      }
    }
    d.samples.push_back(std::move(row));
  }
  if (!have_header) throw DataError(path.string() + ": empty file");
  if (d.samples.size() < min_rows) {
    throw DataError(path.string() + ": need at least " + std::to_string(min_rows) +
                    " data rows, found " +
                    std::to_string(d.samples.size()));
  }
  return d;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
               const std::vector<Vec>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
}

void write_error_csv(const std::filesystem::path& path, const ErrorTable& table,
                     const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  auto cell = [](std::optional<double> v) {
    return v && std::isfinite(*v) ? format_double(*v) : std::string("NA");
  };
  out << "source,proposed_index";
  for (const auto& n : names) out << ',' << n;
  out << ",mean_error_source\n";
  for (std::size_t r = 0; r < table.cells.size(); ++r) {
    out << table.truth_index[r] + 1 << ',' << table.proposed_index[r] + 1;
    for (const auto& c : table.cells[r]) out << ',' << cell(c);
    out << ',' << cell(table.source_mean[r]) << '\n';
  }
  out << "mean_error_dimension,";
  for (const auto v : table.dimension_mean) out << ',' << cell(v);
  out << ',' << cell(table.global_mean) << '\n';
  for (const auto j : table.unmatched_truth) out << "unmatched_truth," << j + 1 << '\n';
  for (const auto i : table.unmatched_proposed) out << "unmatched_proposed," << i + 1 << '\n';
}

}  // namespace hug
