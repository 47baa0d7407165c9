#include "hug/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace hug {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

Dataset load_run_dataset(const RunConfig& config) {
  if (config.data_path) return load_csv(*config.data_path);
  if (config.synthetic) return generate_synthetic(*config.synthetic);
  throw ConfigError("no dataset: set data.path or a [synthetic] table");
}

SynthOutput cmd_synth(const RunConfig& config, const fs::path& out_dir) {
  if (!config.synthetic) throw ConfigError("synth needs a [synthetic] table in the config");
  fs::create_directories(out_dir);
  SynthOutput out;
  out.dataset = generate_synthetic(*config.synthetic);
  out.data_csv = out_dir / "data.csv";
  out.truth_csv = out_dir / "truth.csv";
  write_csv(out.data_csv, out.dataset.names, out.dataset.samples);
  write_csv(out.truth_csv, out.dataset.names, config.synthetic->sources);
  return out;
}

void write_level_set_csv(const fs::path& path, const LevelSetGrid& grid) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "cell_x,cell_y,probability\n";
  for (std::size_t iy = 0; iy < grid.cells; ++iy) {
    for (std::size_t ix = 0; ix < grid.cells; ++ix) {
      out << fmt((static_cast<double>(ix) + 0.5) * grid.cell_length) << ','
          << fmt((static_cast<double>(iy) + 0.5) * grid.cell_length) << ','
          << fmt(grid.at(ix, iy)) << '\n';
    }
  }
}

namespace {

ChainOutput run_chain(const RunConfig& config, const Dataset& data, const HugModel& model,
                      const NormalizationSpec& norm, std::uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  RunConfig effective = config;
  effective.seed = seed;
  effective.chains = 1;
  write_text(dir / "config.toml", to_toml(effective.to_json()));

  AnnealingOptions opts;
  opts.sampler = config.sampler;
  opts.schedule = config.schedule;
  opts.prior = config.prior;
  opts.radius = config.model.r;

  TraceHeader header{seed, data.names, norm, effective.to_json()};
  ChainTrace meta;
  meta.dims = model.dims();
  TraceWriter writer(dir / "trace.jsonl", header, meta);
  opts.on_record = [&writer](const TraceRecord& r) { writer.write(r); };

  ChainOutput out;
  out.dir = dir;
  out.trace = simulated_annealing(model, opts, seed);

  const auto tail = out.trace.tail(config.schedule.keep_last);
  std::ostringstream summary;
  summary << "seed " << seed << "\n";
  summary << "samples " << data.size() << ", dimensions " << data.dims() << ", planes "
          << model.planes() << "\n";
  summary << "saved records " << out.trace.records.size() << ", used for inference "
          << tail.size() << "\n\n";
  summary << "plane axes data_hull_area mean_g mean_n_e mean_n mean_n_r suggested_k level_set_"
          << config.level << "_clusters\n";
  for (const auto plane : model.active_planes()) {
    const auto [a, b] = plane_axes(plane, model.dims());
    const auto grid = contact_probability_grid(tail, model.dims(), {config.cell_length, plane});
    write_level_set_csv(dir / ("levelset_plane" + std::to_string(plane.v) + ".csv"), grid);
    const auto cells = level_set(grid, config.level);
    out.level_clusters.push_back(count_cell_clusters(cells));
    out.grids.push_back(grid);

    const auto means = cumulative_means(tail, plane);
    std::ofstream cm(dir / ("cumulative_plane" + std::to_string(plane.v) + ".csv"));
    cm << "index,iter,g,n_e,n,n_r\n";
    for (std::size_t t = 0; t < means.size(); ++t) {
      cm << t + 1 << ',' << tail[t].iteration << ',' << fmt(means[t].g) << ','
         << fmt(means[t].n_e) << ',' << fmt(means[t].n) << ',' << fmt(means[t].n_r) << '\n';
    }
    const auto& last = means.back();
    summary << plane.v << ' ' << data.names[a] << '/' << data.names[b] << ' '
            << fixed(model.data_hull_area(plane), 6) << ' ' << fixed(last.g, 6) << ' '
            << fixed(last.n_e, 6) << ' ' << fixed(last.n, 3) << ' ' << fixed(last.n_r, 3) << ' '
            << std::lround(last.n) << ' ' << out.level_clusters.back() << '\n';
  }
  for (std::size_t v = 1; v <= model.planes(); ++v) {
    if (model.degenerate(PlaneIndex{v})) {
      summary << v << " skipped: data hull has zero area on this plane\n";
    }
  }
  summary << "\nsuggested_k is the rounded mean source count; confirm it against the level-set "
             "maps before clustering.\n";
  write_text(dir / "summary.txt", summary.str());
  return out;
}

}  // namespace

std::vector<ChainOutput> cmd_detect(const RunConfig& config, const fs::path& out_dir,
                                    std::ostream& log) {
  config.validate();
  Dataset data = load_run_dataset(config);
  const auto norm = normalize(data, config.margins);
  const HugModel model(data.normalized);
  if (model.active_planes().empty()) {
    throw std::domain_error("every plane has a degenerate data hull");
  }
  fs::create_directories(out_dir);
  write_csv(out_dir / "data.csv", data.names, data.samples);
  write_text(out_dir / "config.toml", to_toml(config.to_json()));

  std::vector<ChainOutput> chains(config.chains);
  const auto start = std::chrono::steady_clock::now();
  if (config.chains == 1) {
    chains[0] = run_chain(config, data, model, norm, config.seed, out_dir);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(config.chains);
    for (std::size_t c = 0; c < config.chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          chains[c] = run_chain(config, data, model, norm, config.seed + c,
                                out_dir / ("chain" + std::to_string(c + 1)));
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << "annealing finished in " << fixed(secs, 1) << " s\n";
  for (const auto& c : chains) {
    log << c.dir.string() << ": level-set clusters per plane:";
    for (const auto n : c.level_clusters) log << ' ' << n;
    log << '\n';
  }
  return chains;
}

ClusterReport cmd_cluster(const fs::path& run_dir, const ClusterConfig& cfg, std::ostream& log) {
  const auto loaded = read_trace(run_dir / "trace.jsonl");
  std::size_t keep_last = 500;
  if (loaded.header.config.contains("schedule")) {
    keep_last = loaded.header.config["schedule"].value("keep_last", keep_last);
  }
  const auto tail = loaded.trace.tail(keep_last);
  const auto& norm = loaded.header.normalization;

  ClusterReport rep;
  rep.names = loaded.header.names;
  const auto pooled = pooled_sources(tail);
  rep.pooled = pooled.size();
  if (pooled.size() < cfg.k_global) {
    throw std::domain_error("only " + std::to_string(pooled.size()) +
                            " saved sources for k-means with " + std::to_string(cfg.k_global) +
                            " clusters");
  }
  json doc;
  doc["names"] = rep.names;
  doc["records"] = tail.size();
  doc["pooled_sources"] = pooled.size();

  if (!cfg.k_per_plane.empty()) {
    rep.sequential = sequential_kmeans(pooled, cfg.k_per_plane, cfg.seed, cfg.plane_order);
    rep.sequential_raw = denormalize(rep.sequential->distinct, norm);
    json order = json::array();
    for (const auto p : rep.sequential->order) order.push_back(p.v);
    doc["sequential"] = {{"k_per_plane", cfg.k_per_plane},
                         {"plane_order", order},
                         {"sources", rep.sequential_raw},
                         {"sources_normalized", rep.sequential->distinct},
                         {"multiplicity", rep.sequential->multiplicity}};
    log << "sequential k-means: " << rep.sequential->distinct.size() << " distinct sources\n";
  }

  rep.global = kmeans(pooled, cfg.k_global, cfg.seed);
  rep.medians_raw = denormalize(rep.global.medians, norm);
  std::vector<std::vector<Vec>> members(cfg.k_global);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    members[rep.global.assignments[i]].push_back(denormalize_point(pooled[i], norm));
  }
  for (const auto& m : members) {
    const std::size_t dims = norm.dims();
    Vec mean(dims, 0.0), sd(dims, 0.0);
    for (const auto& p : m) {
      for (std::size_t k = 0; k < dims; ++k) mean[k] += p[k];
    }
    for (auto& x : mean) x /= static_cast<double>(std::max<std::size_t>(m.size(), 1));
    for (const auto& p : m) {
      for (std::size_t k = 0; k < dims; ++k) sd[k] += (p[k] - mean[k]) * (p[k] - mean[k]);
    }
    for (auto& x : sd) x = m.size() > 1 ? std::sqrt(x / static_cast<double>(m.size() - 1)) : 0.0;
    rep.means_raw.push_back(mean);
    rep.sd_raw.push_back(sd);
  }
  doc["global"] = {{"k", cfg.k_global},
                   {"sizes", rep.global.sizes},
                   {"medians", rep.medians_raw},
                   {"means", rep.means_raw},
                   {"sd", rep.sd_raw},
                   {"centers_normalized", rep.global.centers},
                   {"medians_normalized", rep.global.medians}};

  rep.dendrogram = ward_dendrogram(pooled);
  json within = json::object();
  const std::size_t max_k = std::min<std::size_t>(rep.dendrogram.leaves, 20);
  for (std::size_t k = 1; k <= max_k; ++k) within[std::to_string(k)] = rep.dendrogram.within_ss(k);
  doc["dendrogram"] = {{"leaves", rep.dendrogram.leaves}, {"within_ss", within}};
  {
    std::ofstream out(run_dir / "dendrogram.csv");
    out << "a,b,height,size\n";
    for (const auto& m : rep.dendrogram.merges) {
      out << m.a << ',' << m.b << ',' << fmt(m.height) << ',' << m.size << '\n';
    }
  }

  std::vector<std::size_t> ks;
  for (std::size_t k = cfg.k_min; k <= cfg.k_max && k <= pooled.size(); ++k) ks.push_back(k);
  rep.mass = cluster_mass_check(pooled, ks, cfg.top, cfg.seed);
  json mass = json::object();
  for (const auto& [k, p] : rep.mass) mass[std::to_string(k)] = p;
  doc["mass_check"] = {{"top", cfg.top}, {"proportion", mass}};

  write_text(run_dir / "clusters.json", doc.dump(2) + "\n");
  write_csv(run_dir / "sources.csv", rep.names, rep.medians_raw);
  log << "global k-means (k=" << cfg.k_global << ") median points written to "
      << (run_dir / "sources.csv").string() << '\n';
  return rep;
}

ErrorTable cmd_evaluate(const fs::path& run_dir, const fs::path& truth_csv, Matching how,
                        std::ostream& log) {
  const auto proposed = load_csv(run_dir / "sources.csv", 1);
  const auto truth = load_csv(truth_csv, 1);
  if (!proposed.samples.empty() && !truth.samples.empty() &&
      proposed.dims() != truth.dims()) {
    throw DataError("proposed and true sources have different dimensions");
  }
  auto table = relative_error_table(proposed.samples, truth.samples, how);
  write_error_csv(run_dir / "errors.csv", table, truth.names);
  log << "mean error per dimension:";
  for (const auto v : table.dimension_mean) log << ' ' << fixed(v, 2);
  log << "; global " << fixed(table.global_mean, 2) << " %\n";
  if (table.undefined_cells) {
    log << "warning: " << table.undefined_cells
        << " cells undefined (zero true coordinate) and excluded from the means\n";
  }
  for (const auto j : table.unmatched_truth) log << "unmatched true source " << j + 1 << '\n';
  for (const auto i : table.unmatched_proposed) log << "unmatched proposed source " << i + 1 << '\n';
  return table;
}

}  // namespace hug
