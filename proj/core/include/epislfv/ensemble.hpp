#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace epislfv {

/// Welford accumulator.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const noexcept {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

/// Aggregates keyed by (observable, time).
class EnsembleStats {
 public:
  void add(const std::string& observable, double t, double value) { stats_[{observable, t}].add(value); }
  const RunningStats& at(const std::string& observable, double t) const { return stats_.at({observable, t}); }
  bool contains(const std::string& observable, double t) const { return stats_.count({observable, t}) > 0; }
  const std::map<std::pair<std::string, double>, RunningStats>& all() const noexcept { return stats_; }

 private:
  std::map<std::pair<std::string, double>, RunningStats> stats_;
};

/// Thread count: EPISLFV_THREADS if set, else `requested`, else hardware
/// concurrency. Always at least 1.
unsigned resolve_threads(unsigned requested = 0);

/// Calls body(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Runs fn(i) for every replicate and returns the results in index order.
template <class F>
auto map_replicates(std::size_t n, unsigned threads, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

/// Mean and standard error of a sample.
RunningStats summarize(const std::vector<double>& values);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace epislfv
