#ifndef DEEPCHROMA_REPORT_HPP
#define DEEPCHROMA_REPORT_HPP

// Cross-feature summary tables and paired t-tests over per-song WCSR.

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "deepchroma/eval.hpp"

namespace deepchroma {

struct TTest {
  double t = 0.0;
  double p = 1.0;
  std::size_t dof = 0;
};

/// Two-sided paired t-test on a - b. Zero mean difference gives t = 0, p = 1.
inline TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("paired_t_test: sample sizes differ");
  if (a.size() < 2) throw UsageError("paired_t_test: need at least two pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  TTest r;
  r.dof = a.size() - 1;
  if (mean == 0.0) return r;
  const double se = std::sqrt(ss / (n - 1.0) / n);
  if (se == 0.0) {
    r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p = 0.0;
    return r;
  }
  r.t = mean / se;
  const boost::math::students_t dist(static_cast<double>(r.dof));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

namespace detail {

inline std::map<std::string, double> per_song(const EvalResult& r) {
  std::map<std::string, double> m;
  for (const auto& s : r.songs)
    if (!m.emplace(s.song_id, s.wcsr()).second) throw DataError("duplicate song '" + s.song_id + "' in " + r.feature);
  return m;
}

}  // namespace detail

/// Aligned table of total WCSR and per-song standard deviation per feature,
/// followed by pairwise paired t-tests. All result sets must cover the same songs.
inline std::string report(const std::vector<EvalResult>& results) {
  if (results.size() < 2) throw UsageError("report: need at least two result sets");
  std::vector<std::map<std::string, double>> songs;
  for (const auto& r : results) songs.push_back(detail::per_song(r));
  for (std::size_t i = 1; i < songs.size(); ++i) {
    bool same = songs[i].size() == songs[0].size();
    for (auto a = songs[i].begin(), b = songs[0].begin(); same && a != songs[i].end(); ++a, ++b) same = a->first == b->first;
    if (!same) throw DataError("report: '" + results[i].feature + "' and '" + results[0].feature + "' cover different songs");
  }
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %6s\n", "feature", "WCSR", "std", "songs");
  out += buf;
  for (std::size_t i = 0; i < results.size(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (const auto& [id, v] : songs[i]) mean += v;
    mean /= static_cast<double>(songs[i].size());
    for (const auto& [id, v] : songs[i]) sq += (v - mean) * (v - mean);
    const double sd = songs[i].size() > 1 ? std::sqrt(sq / static_cast<double>(songs[i].size() - 1)) : 0.0;
    std::snprintf(buf, sizeof buf, "%-10s %8.2f %8.2f %6zu\n", results[i].feature.c_str(), 100.0 * results[i].total(),
                  100.0 * sd, songs[i].size());
    out += buf;
  }
  out += "\npaired t-tests over per-song WCSR\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      std::vector<double> a, b;
      for (const auto& [id, v] : songs[i]) a.push_back(v);
      for (const auto& [id, v] : songs[j]) b.push_back(v);
      const TTest t = paired_t_test(a, b);
      std::snprintf(buf, sizeof buf, "%-10s vs %-10s t = %9.4f  dof = %3zu  p = %.3g\n", results[i].feature.c_str(),
                    results[j].feature.c_str(), t.t, t.dof, t.p);
      out += buf;
    }
  return out;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_REPORT_HPP
