// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Monte Carlo summaries and the CSV/JSON shapes shared by all studies.

#ifndef NLSQI_REPORT_HPP
#define NLSQI_REPORT_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlsqi/errors.hpp"
#include "nlsqi/parallel.hpp"

namespace nlsqi {

inline constexpr int kSchemaVersion = 1;

struct McReport {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<double> target;
  std::optional<double> z;  ///< (estimate - target) / stderr when a target is set

  McReport& against(double t) {
    target = t;
    z = stderr_ > 0.0 ? (estimate - t) / stderr_ : (estimate == t ? 0.0 : std::numeric_limits<double>::infinity());
    return *this;
  }
};

/// Sample mean and its standard error, both via pairwise sums.
inline McReport mean_report(std::span<const double> xs, std::uint64_t seed) {
  McReport r;
  r.n = xs.size();
  r.seed = seed;
  if (xs.empty()) return r;
  const double mean = pairwise_sum(xs) / static_cast<double>(xs.size());
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
  const double var = xs.size() > 1 ? pairwise_sum(sq) / static_cast<double>(xs.size() - 1) : 0.0;
  r.estimate = mean;
  r.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  return r;
}

inline nlohmann::json to_json(const McReport& r) {
  nlohmann::json j{{"estimate", r.estimate}, {"stderr", r.stderr_}, {"n", r.n}, {"seed", r.seed}};
  if (r.target) j["target"] = *r.target;
  if (r.z) j["z"] = *r.z;
  return j;
}

/// One row of a study table.
struct StudyRow {
  std::string study;
  double s = 0.0;
  int n_cut = 0;
  int m_ambient = 0;
  double t = 0.0;
  double p = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Shortest round-trip formatting: identical inputs give byte-identical files.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(std::span<const StudyRow> rows) {
  std::string out = "study,s,N,M,t,p,estimate,stderr,n,seed\n";
  for (const auto& r : rows) {
    out += r.study + ',' + format_double(r.s) + ',' + std::to_string(r.n_cut) + ',' + std::to_string(r.m_ambient) + ',' +
           format_double(r.t) + ',' + format_double(r.p) + ',' + format_double(r.estimate) + ',' +
           format_double(r.stderr_) + ',' + std::to_string(r.n) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace nlsqi

#endif  // NLSQI_REPORT_HPP
