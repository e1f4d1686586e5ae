#pragma once

// Line-oriented key=value experiment configuration. '#' starts a comment,
// keys outside the documented set are rejected, and every parse error names
// the offending line. Required keys: a, source.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "enclosure/certification.hpp"
#include "enclosure/types.hpp"

namespace enclosure {

enum class RunMode {
  forward,
  indicator,
  certify,
  region,
  reproduce_fig1,
  reproduce_fig2,
  reproduce_fig3,
};

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::forward: return "forward";
    case RunMode::indicator: return "indicator";
    case RunMode::certify: return "certify";
    case RunMode::region: return "region";
    case RunMode::reproduce_fig1: return "reproduce-fig1";
    case RunMode::reproduce_fig2: return "reproduce-fig2";
    case RunMode::reproduce_fig3: return "reproduce-fig3";
  }
  return "?";
}

/// A fully validated experiment description.
struct ExperimentConfig {
  Geometry geometry;
  SourceTerm source;
  int series_modes = 1000;
  std::vector<std::int64_t> n_t_list;  ///< empty: mode-specific default
  FrequencyGrid grid;
  double bound = 0.01;
  std::filesystem::path output_dir = ".";
  RunMode mode = RunMode::region;
  bool stream = false;
  double delta = 5.0;
  double tau0 = 3.0;
  std::optional<double> epsilon;  ///< computed as G(tau0) when absent
  std::optional<double> eta;      ///< computed as H(tau0) when absent

  ExperimentConfig(Geometry g, SourceTerm s)
      : geometry(g), source(std::move(s)) {}
};

namespace detail {

struct RawEntry {
  std::string value;
  std::size_t line;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double to_double(const std::string& v, const std::string& key,
                        std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' has unparsable number '" + v + "'",
                      line);
  return out;
}

inline std::int64_t to_int(const std::string& v, const std::string& key,
                           std::size_t line) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' has unparsable integer '" + v + "'",
                      line);
  return out;
}

inline bool to_bool(const std::string& v, const std::string& key,
                    std::size_t line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                        "' expects true/false, got '" + v + "'",
                    line);
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "a",      "a_L",      "a_U",      "T",       "source", "nu",
      "c",      "N",        "N_t",      "tau_start", "tau_step", "tau_end",
      "bound",  "delta",    "epsilon",  "eta",     "tau0",   "mode",
      "output_dir", "stream"};
  return keys;
}

}  // namespace detail

/// Parse key=value configuration text into a validated ExperimentConfig.
/// Later assignments win; unknown keys, unparsable values, and invariant
/// violations raise ConfigError naming the offending line.
inline ExperimentConfig parse_config(std::string_view text) {
  using detail::RawEntry;
  std::map<std::string, RawEntry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(
        start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = (end == std::string_view::npos) ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value",
                        line_no);
    const std::string key{detail::trim(line.substr(0, eq))};
    const std::string value{detail::trim(line.substr(eq + 1))};
    bool known = false;
    for (const auto& k : detail::known_keys()) known = known || (k == key);
    if (!known)
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                            key + "'",
                        line_no);
    if (value.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                            "' has empty value",
                        line_no);
    entries[key] = RawEntry{value, line_no};
  }

  const auto lookup = [&](const char* key) -> const RawEntry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  std::string missing;
  if (!lookup("a")) missing += "'a'";
  if (!lookup("source")) missing += std::string(missing.empty() ? "" : ", ") + "'source'";
  if (!missing.empty())
    throw ConfigError("required key(s) missing: " + missing, 0);

  const RawEntry* e = lookup("a");
  const double a = detail::to_double(e->value, "a", e->line);
  const std::size_t a_line = e->line;
  double T = 5.0;
  if ((e = lookup("T"))) T = detail::to_double(e->value, "T", e->line);
  double a_L = a, a_U = a;
  if ((e = lookup("a_L"))) a_L = detail::to_double(e->value, "a_L", e->line);
  if ((e = lookup("a_U"))) a_U = detail::to_double(e->value, "a_U", e->line);
  if (!(a_L > 0.0 && a_L <= a && a <= a_U))
    throw ConfigError("line " + std::to_string(a_line) +
                          ": geometry violates 0 < a_L <= a <= a_U (a=" +
                          std::to_string(a) + ", a_L=" + std::to_string(a_L) +
                          ", a_U=" + std::to_string(a_U) + ")",
                      a_line);
  if (!(T > 0.0))
    throw ConfigError("T must be positive", lookup("T") ? lookup("T")->line : 0);
  const Geometry geometry(a, a_L, a_U, T);

  e = lookup("source");
  const std::string& src = e->value;
  const std::size_t src_line = e->line;
  SourceTerm source = Monomial{0};
  if (src.size() == 3 && src[0] == 't' && src[1] == '^' && src[2] >= '0' &&
      src[2] <= '9') {
    source = Monomial{src[2] - '0'};
  } else if (src == "t^2*exp(-NU*t)" || src == "t^2*exp(-nu*t)") {
    double nu = 1.0, c = 1.0;
    if ((e = lookup("nu"))) nu = detail::to_double(e->value, "nu", e->line);
    if ((e = lookup("c"))) c = detail::to_double(e->value, "c", e->line);
    if (!(nu > 0.0))
      throw ConfigError("line " + std::to_string(src_line) +
                            ": exponential source needs nu > 0",
                        src_line);
    source = ExpMonomial{c, nu};
  } else {
    throw ConfigError("line " + std::to_string(src_line) +
                          ": source must be one of t^0..t^9 or t^2*exp(-NU*t), got '" +
                          src + "'",
                      src_line);
  }

  ExperimentConfig cfg(geometry, source);

  if ((e = lookup("N"))) {
    const std::int64_t n = detail::to_int(e->value, "N", e->line);
    if (n < 1)
      throw ConfigError("line " + std::to_string(e->line) + ": N must be >= 1",
                        e->line);
    cfg.series_modes = static_cast<int>(n);
  }
  if ((e = lookup("N_t"))) {
    std::string field;
    std::string buf = e->value + ",";
    for (char ch : buf) {
      if (ch != ',') {
        field.push_back(ch);
        continue;
      }
      const std::string item{detail::trim(field)};
      field.clear();
      if (item.empty())
        throw ConfigError("line " + std::to_string(e->line) +
                              ": empty entry in N_t list",
                          e->line);
      const std::int64_t n = detail::to_int(item, "N_t", e->line);
      if (n < 1)
        throw ConfigError("line " + std::to_string(e->line) +
                              ": N_t entries must be >= 1",
                          e->line);
      cfg.n_t_list.push_back(n);
    }
  }
  if ((e = lookup("tau_start"))) cfg.grid.tau_start = detail::to_double(e->value, "tau_start", e->line);
  if ((e = lookup("tau_step"))) cfg.grid.tau_step = detail::to_double(e->value, "tau_step", e->line);
  if ((e = lookup("tau_end"))) cfg.grid.tau_end = detail::to_double(e->value, "tau_end", e->line);
  try {
    cfg.grid.validate();
  } catch (const std::invalid_argument& ex) {
    const std::size_t ln = lookup("tau_start") ? lookup("tau_start")->line : 0;
    throw ConfigError(std::string("frequency grid invalid: ") + ex.what(), ln);
  }
  if ((e = lookup("bound"))) {
    cfg.bound = detail::to_double(e->value, "bound", e->line);
    if (!(cfg.bound > 0.0))
      throw ConfigError("line " + std::to_string(e->line) + ": bound must be > 0",
                        e->line);
  }
  if ((e = lookup("delta"))) {
    cfg.delta = detail::to_double(e->value, "delta", e->line);
    if (!(cfg.delta > 0.0))
      throw ConfigError("line " + std::to_string(e->line) + ": delta must be > 0",
                        e->line);
  }
  if ((e = lookup("tau0"))) {
    cfg.tau0 = detail::to_double(e->value, "tau0", e->line);
    if (!(cfg.tau0 > 0.0))
      throw ConfigError("line " + std::to_string(e->line) + ": tau0 must be > 0",
                        e->line);
  }
  if ((e = lookup("epsilon"))) {
    cfg.epsilon = detail::to_double(e->value, "epsilon", e->line);
    if (!(*cfg.epsilon > 0.0 && *cfg.epsilon < 1.0))
      throw ConfigError("line " + std::to_string(e->line) +
                            ": epsilon must lie in (0,1)",
                        e->line);
  }
  if ((e = lookup("eta"))) {
    cfg.eta = detail::to_double(e->value, "eta", e->line);
    if (!(*cfg.eta > 0.0 && *cfg.eta < 1.0))
      throw ConfigError("line " + std::to_string(e->line) + ": eta must lie in (0,1)",
                        e->line);
  }
  if ((e = lookup("mode"))) {
    const std::string& m = e->value;
    if (m == "forward") cfg.mode = RunMode::forward;
    else if (m == "indicator") cfg.mode = RunMode::indicator;
    else if (m == "certify") cfg.mode = RunMode::certify;
    else if (m == "region") cfg.mode = RunMode::region;
    else if (m == "reproduce-fig1") cfg.mode = RunMode::reproduce_fig1;
    else if (m == "reproduce-fig2") cfg.mode = RunMode::reproduce_fig2;
    else if (m == "reproduce-fig3") cfg.mode = RunMode::reproduce_fig3;
    else
      throw ConfigError("line " + std::to_string(e->line) + ": unknown mode '" +
                            m + "'",
                        e->line);
  }
  if ((e = lookup("output_dir"))) cfg.output_dir = e->value;
  if ((e = lookup("stream"))) cfg.stream = detail::to_bool(e->value, "stream", e->line);
  return cfg;
}

}  // namespace enclosure
