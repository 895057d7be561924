#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rvr {

// One measurement row. Metrics that were not measured stay empty.
struct TraceRecord {
  std::string algorithm;
  std::size_t rep = 0;
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::uint64_t ifo = 0;
  std::optional<double> wall_ms;
  double cost = 0.0;
  double grad_norm = 0.0;
  std::optional<double> gap;
  std::optional<double> test_mse;
  std::size_t batch_size = 0;
  double step_size = 0.0;
  // ‖v‖ of the estimator used for the step leading here; not serialized.
  double estimator_norm = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kTraceHeader =
    "algorithm,rep,epoch,step,ifo,wall_ms,cost,grad_norm,gap,test_mse,batch_size,step_size";

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, bool header = true);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

}  // namespace rvr
