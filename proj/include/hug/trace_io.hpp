#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hug/data.hpp"
#include "hug/sampler.hpp"

namespace hug {

/// Run metadata stored as the first line of trace.jsonl.
struct TraceHeader {
  std::uint64_t seed = 0;
  std::vector<std::string> names;
  NormalizationSpec normalization;
  nlohmann::json config;  // effective run config
};

nlohmann::json record_to_json(const TraceRecord& rec);
TraceRecord record_from_json(const nlohmann::json& j);

/// Streams a JSON-lines trace: one header line, then one line per record.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, const TraceHeader& header, const ChainTrace& meta);
  void write(const TraceRecord& rec);

 private:
  std::filesystem::path path_;
  std::unique_ptr<std::ofstream> stream_;
};

struct LoadedTrace {
  TraceHeader header;
  ChainTrace trace;
};

LoadedTrace read_trace(const std::filesystem::path& path);

}  // namespace hug
