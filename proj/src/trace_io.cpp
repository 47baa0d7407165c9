#include "hug/trace_io.hpp"

#include <fstream>
#include <memory>

namespace hug {

using nlohmann::json;

json record_to_json(const TraceRecord& rec) {
  json stats = json::array();
  for (const auto& st : rec.stats) {
    if (st) {
      stats.push_back({{"g", st->g}, {"n_e", st->n_e}, {"n", st->n}, {"n_r", st->n_r}});
    } else {
      stats.push_back(nullptr);
    }
  }
  return {{"iter", rec.iteration},
          {"temperature", rec.temperature},
          {"theta", {rec.theta.theta1, rec.theta.theta2, rec.theta.theta3, rec.theta.theta4}},
          {"r", rec.theta.r},
          {"plane", rec.plane.v},
          {"sources", rec.sources.points},
          {"stats_per_plane", stats}};
}

TraceRecord record_from_json(const json& j) {
  TraceRecord rec;
  rec.iteration = j.at("iter").get<std::uint64_t>();
  rec.temperature = j.at("temperature").get<double>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != 4) throw DataError("trace record needs 4 theta values");
  rec.theta = ModelParams{theta[0], theta[1], theta[2], theta[3], j.value("r", 0.01)};
  rec.plane = PlaneIndex{j.at("plane").get<std::size_t>()};
  rec.sources.points = j.at("sources").get<std::vector<Vec>>();
  for (const auto& s : j.at("stats_per_plane")) {
    if (s.is_null()) {
      rec.stats.emplace_back(std::nullopt);
    } else {
      rec.stats.emplace_back(HugStatistics{s.at("g").get<double>(), s.at("n_e").get<double>(),
                                           s.at("n").get<std::size_t>(),
                                           s.at("n_r").get<std::size_t>()});
    }
  }
  return rec;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const TraceHeader& header,
                         const ChainTrace& meta)
    : path_(path), stream_(std::make_unique<std::ofstream>(path)) {
  if (!*stream_) throw DataError("cannot write trace '" + path.string() + "'");
  json h = {{"type", "header"},
            {"seed", header.seed},
            {"dims", meta.dims},
            {"names", header.names},
            {"normalization", {{"lo", header.normalization.lo}, {"hi", header.normalization.hi}}},
            {"config", header.config}};
  *stream_ << h.dump() << '\n';
}

void TraceWriter::write(const TraceRecord& rec) {
  *stream_ << record_to_json(rec).dump() << '\n';
  stream_->flush();
}

LoadedTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace '" + path.string() + "'");
  LoadedTrace out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("type", "") != "header") throw DataError("trace does not start with a header");
        out.header.seed = j.at("seed").get<std::uint64_t>();
        out.header.names = j.at("names").get<std::vector<std::string>>();
        out.header.normalization.lo = j.at("normalization").at("lo").get<std::vector<double>>();
        out.header.normalization.hi = j.at("normalization").at("hi").get<std::vector<double>>();
        out.header.config = j.value("config", json::object());
        out.trace.seed = out.header.seed;
        out.trace.dims = j.at("dims").get<std::size_t>();
        have_header = true;
        continue;
      }
      out.trace.records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw DataError("empty trace '" + path.string() + "'");
  return out;
}

}  // namespace hug
