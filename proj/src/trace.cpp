#include "rvr/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rvr/errors.hpp"

namespace rvr {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("trace: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("trace: bad integer '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, bool header) {
  if (header) os << kTraceHeader << '\n';
  for (const auto& r : trace) {
    os << r.algorithm << ',' << r.rep << ',' << r.epoch << ',' << r.step << ',' << r.ifo << ','
       << optional_field(r.wall_ms) << ',' << format_double(r.cost) << ','
       << format_double(r.grad_norm) << ',' << optional_field(r.gap) << ','
       << optional_field(r.test_mse) << ',' << r.batch_size << ',' << format_double(r.step_size)
       << '\n';
  }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  write_trace_csv(os, trace, true);
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader)
    throw ConfigError("'" + path + "' does not start with the trace header");
  std::vector<TraceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 12) throw ConfigError("trace row has " + std::to_string(f.size()) + " fields");
    TraceRecord r;
    r.algorithm = f[0];
    r.rep = parse_uint(f[1]);
    r.epoch = parse_uint(f[2]);
    r.step = parse_uint(f[3]);
    r.ifo = parse_uint(f[4]);
    r.wall_ms = parse_optional(f[5]);
    r.cost = parse_double(f[6]);
    r.grad_norm = parse_double(f[7]);
    r.gap = parse_optional(f[8]);
    r.test_mse = parse_optional(f[9]);
    r.batch_size = parse_uint(f[10]);
    r.step_size = parse_double(f[11]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rvr
