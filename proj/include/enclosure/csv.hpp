#pragma once

// CSV/plot-data serialization. Every number is printed with 17 significant
// digits so values round-trip bit-exactly through text; undefined estimates
// serialize as the literal token "NA". Lines always end in LF.

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "enclosure/certification.hpp"
#include "enclosure/indicator.hpp"
#include "enclosure/series_solution.hpp"
#include "enclosure/types.hpp"

namespace enclosure {

/// Shortest 17-significant-digit form; round-trips any finite double.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_g17(*v) : std::string("NA");
}

// ============================================================================
// Trace samples (columns t,u)
// ============================================================================

inline void write_trace_csv(std::ostream& os, const TraceSamples& samples) {
  os << "t,u\n";
  for (std::size_t j = 0; j < samples.t.size(); ++j)
    os << format_g17(samples.t[j]) << ',' << format_g17(samples.u[j]) << '\n';
}

namespace detail {

inline double parse_double_field(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("CSV: unparsable number '" + field + "'", line_no);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// Reads columns t,u back into TraceSamples; the geometry supplies T and the
/// equidistance contract is validated by the consumer.
inline TraceSamples read_trace_csv(std::istream& is, const Geometry& g) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> t, u;
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "t,u" && line != "t,u\r")
        throw ConfigError("CSV: expected header 't,u'", 1);
      continue;
    }
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2)
      throw ConfigError("CSV: expected two columns", line_no);
    t.push_back(detail::parse_double_field(fields[0], line_no));
    u.push_back(detail::parse_double_field(fields[1], line_no));
  }
  return TraceSamples(g, std::move(t), std::move(u));
}

// ============================================================================
// Indicator samples (columns tau,f_hat,u_hat,I,a_est)
// ============================================================================

inline void write_indicator_csv(std::ostream& os,
                                std::span<const IndicatorSample> rows) {
  os << "tau,f_hat,u_hat,I,a_est\n";
  for (const auto& r : rows)
    os << format_g17(r.tau) << ',' << format_g17(r.f_hat) << ','
       << format_g17(r.u_hat) << ',' << format_g17(r.indicator) << ','
       << format_optional(r.a_est) << '\n';
}

// ============================================================================
// Region diagnostics (columns tau,a_est,abs_err,inside,cancel_digits)
// ============================================================================

inline void write_region_csv(std::ostream& os, std::span<const SweepPoint> points,
                             double a_true, double bound) {
  os << "tau,a_est,abs_err,inside,cancel_digits\n";
  for (const auto& p : points) {
    const bool inside = p.a_nt.has_value() && std::abs(*p.a_nt - a_true) <= bound;
    os << format_g17(p.tau) << ',' << format_optional(p.a_nt) << ',';
    if (p.a_nt)
      os << format_g17(std::abs(*p.a_nt - a_true));
    else
      os << "NA";
    os << ',' << (inside ? 1 : 0) << ','
       << format_g17(cancellation_digits(a_true, p.tau)) << '\n';
  }
}

/// One-line region summary: kind, tau_lo, tau_hi, bound ("None" bounds when
/// the region is empty).
inline std::string region_summary_line(const TrustedRegion& r) {
  const char* kind =
      r.kind == TrustedRegion::Kind::theoretical ? "theoretical" : "empirical";
  if (r.is_empty)
    return std::string(kind) + ",None,None," + format_g17(r.error_bound);
  return std::string(kind) + ',' + format_g17(r.tau_lo) + ',' +
         format_g17(r.tau_hi) + ',' + format_g17(r.error_bound);
}

/// Human-readable interval, e.g. "[2, 5]" or "None".
inline std::string region_pretty(const TrustedRegion& r) {
  if (r.is_empty) return "None";
  return "[" + format_g17(r.tau_lo) + ", " + format_g17(r.tau_hi) + "]";
}

/// Two-column gnuplot-compatible curve.
inline void write_curve_csv(std::ostream& os, const char* xname, const char* yname,
                            std::span<const double> x, std::span<const double> y) {
  os << xname << ',' << yname << '\n';
  for (std::size_t i = 0; i < x.size(); ++i)
    os << format_g17(x[i]) << ',' << format_g17(y[i]) << '\n';
}

}  // namespace enclosure
