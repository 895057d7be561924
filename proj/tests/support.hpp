#pragma once

#include <memory>
#include <sstream>
#include <string>

#include "rvr/problems.hpp"
#include "rvr/trace.hpp"

namespace rvr::fixtures {

inline std::shared_ptr<const PcaDataset> pca_data(std::size_t n, Eigen::Index d, Eigen::Index r,
                                                  std::uint64_t seed) {
  Rng rng(seed, Stream::Dataset);
  return std::make_shared<const PcaDataset>(gen_pca(n, d, r, rng));
}

inline std::shared_ptr<const LrmcDataset> lrmc_data(std::size_t n, Eigen::Index d, Eigen::Index r,
                                                    double os, std::uint64_t seed, double cn = 50.0,
                                                    double eps = 1e-10) {
  Rng rng(seed, Stream::Dataset);
  LrmcOptions o;
  o.n = n;
  o.d = d;
  o.r = r;
  o.os = os;
  o.cn = cn;
  o.eps = eps;
  return std::make_shared<const LrmcDataset>(gen_lrmc(o, rng));
}

inline std::shared_ptr<const SpdDataset> spd_data(std::size_t n, Eigen::Index d, double cn,
                                                  std::uint64_t seed) {
  Rng rng(seed, Stream::Dataset);
  return std::make_shared<const SpdDataset>(gen_spd(n, d, cn, rng));
}

inline std::string csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace, true);
  return os.str();
}

}  // namespace rvr::fixtures
