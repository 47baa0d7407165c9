#include "hug/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hug {

using nlohmann::json;

namespace {

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_ws();
        json* t = &root;
        while (true) {
          const std::string key = parse_key();
          json& next = (*t)[key];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + key + "' is not a table");
          t = &next;
          skip_ws();
          if (peek() == '.') {
            ++pos_;
            skip_ws();
            continue;
          }
          break;
        }
        expect(']');
        table = t;
        end_of_line();
        continue;
      }
      const std::string key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      if (table->contains(key)) fail("duplicate key '" + key + "'");
      (*table)[key] = parse_value();
      end_of_line();
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_all() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() == '\r') ++pos_;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_;
  }

  std::string parse_key() {
    if (peek() == '"') return parse_string();
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string parse_string() {
    expect('"');
    std::string out;
    while (!eof() && peek() != '"') {
      char c = s_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    expect('"');
    return out;
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      skip_all();
      while (peek() != ']') {
        arr.push_back(parse_value());
        skip_all();
        if (peek() == ',') {
          ++pos_;
          skip_all();
        } else if (peek() != ']') {
          fail("expected ',' or ']'");
        }
      }
      ++pos_;
      return arr;
    }
    const std::size_t start = pos_;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' &&
           peek() != ']' && peek() != '#') {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");
    std::string digits;
    for (const char ch : tok) {
      if (ch != '_') digits.push_back(ch);
    }
    const char* first = digits.data() + (digits[0] == '+' ? 1 : 0);
    const char* last = digits.data() + digits.size();
    const bool is_float = digits.find_first_of(".eE") != std::string::npos ||
                          digits == "inf" || digits == "nan";
    if (!is_float) {
      long long i = 0;
      const auto [p, ec] = std::from_chars(first, last, i);
      if (ec == std::errc() && p == last) return i;
    }
    double d = 0.0;
    const auto [p, ec] = std::from_chars(first, last, d);
    if (ec != std::errc() || p != last) fail("invalid value '" + tok + "'");
    return d;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string toml_scalar(const json& v) {
  if (v.is_string()) return json(v.get<std::string>()).dump();
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_scalar(v[i]);
    return out + "]";
  }
  return v.dump();
}

void emit_table(std::ostringstream& out, const json& t, const std::string& prefix) {
  for (const auto& [k, v] : t.items()) {
    if (!v.is_object() && !v.is_null()) out << k << " = " << toml_scalar(v) << '\n';
  }
  for (const auto& [k, v] : t.items()) {
    if (v.is_object()) {
      const std::string name = prefix.empty() ? k : prefix + "." + k;
      out << "\n[" << name << "]\n";
      emit_table(out, v, name);
    }
  }
}

template <typename T>
void read(const json& t, const char* key, T& out) {
  if (!t.contains(key)) return;
  try {
    out = t.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void read_array4(const json& t, const char* key, std::array<T, 4>& out) {
  if (!t.contains(key)) return;
  std::vector<T> v;
  read(t, key, v);
  if (v.size() != 4) throw ConfigError(std::string("config key '") + key + "' needs 4 values");
  std::copy(v.begin(), v.end(), out.begin());
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  const json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string("'") + name + "' must be a table");
  return s;
}

}  // namespace

json parse_toml(std::string_view text) { return TomlReader(text).parse(); }

json load_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

std::string to_toml(const json& config) {
  std::ostringstream out;
  emit_table(out, config, "");
  return out.str();
}

Preset parse_preset(std::string_view name) {
  if (name == "paper") return Preset::Paper;
  if (name == "desk") return Preset::Desk;
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected paper or desk)");
}

std::string_view preset_name(Preset p) { return p == Preset::Paper ? "paper" : "desk"; }

RunConfig RunConfig::defaults(Preset preset) {
  RunConfig c;
  c.preset = preset;
  c.schedule = preset == Preset::Paper ? AnnealingSchedule::paper() : AnnealingSchedule::desk();
  return c;
}

RunConfig RunConfig::from_json(const json& doc, Preset fallback) {
  Preset preset = fallback;
  if (doc.contains("preset")) preset = parse_preset(doc.at("preset").get<std::string>());
  RunConfig c = defaults(preset);
  read(doc, "seed", c.seed);
  read(doc, "chains", c.chains);

  const json& data = section(doc, "data");
  if (data.contains("path")) c.data_path = data.at("path").get<std::string>();
  if (data.contains("margins")) {
    std::vector<double> m;
    read(data, "margins", m);
    c.margins = m;
  }

  const json& synth = section(doc, "synthetic");
  if (!synth.empty()) {
    SyntheticSpec s;
    read(synth, "sources", s.sources);
    read(synth, "samples", s.samples);
    read(synth, "seed", s.seed);
    read(synth, "names", s.names);
    c.synthetic = s;
  }

  read(section(doc, "model"), "r", c.model.r);

  const json& prior = section(doc, "prior");
  read_array4(prior, "mean", c.prior.mean);
  read_array4(prior, "variance", c.prior.variance);

  const json& s = section(doc, "sampler");
  read(s, "p_b", c.sampler.p_birth);
  read(s, "p_d", c.sampler.p_death);
  read(s, "p_c", c.sampler.p_change);
  read(s, "r_c", c.sampler.change_radius);
  read(s, "M", c.sampler.mh_steps);
  read(s, "min_source_rule", c.sampler.min_source_rule);
  if (s.contains("change")) {
    try {
      c.sampler.change_support = parse_change_support(s.at("change").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  const json& a = section(doc, "schedule");
  read(a, "T1", c.schedule.initial_temperature);
  read(a, "c", c.schedule.cooling);
  read(a, "T_min", c.schedule.min_temperature);
  if (a.contains("N")) {
    const double n = a.at("N").get<double>();
    if (!(n >= 0.0) || n != std::floor(n)) throw ConfigError("N must be a nonnegative integer");
    c.schedule.iterations = static_cast<std::uint64_t>(n);
  }
  read(a, "G", c.schedule.gibbs_steps);
  read(a, "save_every", c.schedule.save_every);
  read(a, "keep_last", c.schedule.keep_last);

  const json& g = section(doc, "grid");
  read(g, "cell_length", c.cell_length);
  read(g, "level", c.level);

  const json& cl = section(doc, "cluster");
  read(cl, "k_per_plane", c.cluster.k_per_plane);
  read(cl, "k_global", c.cluster.k_global);
  read(cl, "k_min", c.cluster.k_min);
  read(cl, "k_max", c.cluster.k_max);
  read(cl, "top", c.cluster.top);
  read(cl, "seed", c.cluster.seed);
  if (cl.contains("plane_order")) {
    const auto o = cl.at("plane_order").get<std::string>();
    if (o == "random") {
      c.cluster.plane_order = PlaneOrder::Random;
    } else if (o == "fixed") {
      c.cluster.plane_order = PlaneOrder::Fixed;
    } else {
      throw ConfigError("plane_order must be 'random' or 'fixed'");
    }
  }
  return c;
}

json RunConfig::to_json() const {
  json doc;
  doc["preset"] = preset_name(preset);
  doc["seed"] = seed;
  doc["chains"] = chains;
  json data = json::object();
  if (data_path) data["path"] = data_path->string();
  if (margins) data["margins"] = *margins;
  if (!data.empty()) doc["data"] = data;
  if (synthetic) {
    doc["synthetic"] = {{"sources", synthetic->sources},
                        {"samples", synthetic->samples},
                        {"seed", synthetic->seed}};
    if (!synthetic->names.empty()) doc["synthetic"]["names"] = synthetic->names;
  }
  doc["model"] = {{"r", model.r}};
  doc["prior"] = {{"mean", prior.mean}, {"variance", prior.variance}};
  doc["sampler"] = {{"p_b", sampler.p_birth},
                    {"p_d", sampler.p_death},
                    {"p_c", sampler.p_change},
                    {"r_c", sampler.change_radius},
                    {"M", sampler.mh_steps},
                    {"min_source_rule", sampler.min_source_rule},
                    {"change", change_support_name(sampler.change_support)}};
  doc["schedule"] = {{"T1", schedule.initial_temperature},
                     {"c", schedule.cooling},
                     {"T_min", schedule.min_temperature},
                     {"N", schedule.iterations},
                     {"G", schedule.gibbs_steps},
                     {"save_every", schedule.save_every},
                     {"keep_last", schedule.keep_last}};
  doc["grid"] = {{"cell_length", cell_length}, {"level", level}};
  doc["cluster"] = {{"k_per_plane", cluster.k_per_plane},
                    {"k_global", cluster.k_global},
                    {"k_min", cluster.k_min},
                    {"k_max", cluster.k_max},
                    {"top", cluster.top},
                    {"seed", cluster.seed},
                    {"plane_order",
                     cluster.plane_order == PlaneOrder::Random ? "random" : "fixed"}};
  return doc;
}

void RunConfig::validate() const {
  try {
    sampler.validate();
    schedule.validate();
    GridSpec{cell_length, PlaneIndex{1}}.cells_per_axis();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(model.r > 0.0)) throw ConfigError("interaction radius r must be positive");
  for (const double v : prior.variance) {
    if (!(v > 0.0)) throw ConfigError("prior variances must be positive");
  }
  if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("level must lie in [0, 1]");
  if (chains == 0) throw ConfigError("chains must be at least 1");
  if (cluster.k_global == 0 || cluster.top == 0 || cluster.k_min == 0 ||
      cluster.k_min > cluster.k_max) {
    throw ConfigError("invalid cluster counts");
  }
}

}  // namespace hug
