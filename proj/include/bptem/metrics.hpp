#pragma once

#include <bptem/grid.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace bptem {

struct SndrReport {
  double sndr_db = 0.0;       // +inf when the reconstruction is exact
  double trim_fraction = 0.9;
  std::size_t n_samples_compared = 0;
};

// Index range [lo, hi) of the samples inside the central `trim` fraction of the window.
inline std::pair<std::size_t, std::size_t> trimmed_range(const TimeGrid& g, double trim) {
  if (!(trim > 0.0 && trim <= 1.0)) throw ParameterError("trim fraction must be in (0, 1]");
  const double span = g.t_last() - g.t_start;
  const double lo_t = g.t_start + 0.5 * (1.0 - trim) * span;
  const double hi_t = g.t_last() - 0.5 * (1.0 - trim) * span;
  const auto lo = static_cast<std::size_t>(std::ceil((lo_t - g.t_start) / g.dt - 1e-9));
  const auto hi = static_cast<std::size_t>(std::floor((hi_t - g.t_start) / g.dt + 1e-9)) + 1;
  return {std::min(lo, g.n), std::min(hi, g.n)};
}

inline SndrReport sndr_db(std::span<const double> ref, std::span<const double> rec, const TimeGrid& g,
                          double trim = 0.9) {
  if (ref.size() != g.n || rec.size() != g.n) throw ShapeError("sndr_db: length mismatch");
  auto [lo, hi] = trimmed_range(g, trim);
  double ex = 0.0, ee = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    ex += ref[i] * ref[i];
    ee += (ref[i] - rec[i]) * (ref[i] - rec[i]);
  }
  if (!(ex > 0.0)) throw MetricError("sndr_db: reference has zero energy on the compared window");
  SndrReport r;
  r.trim_fraction = trim;
  r.n_samples_compared = hi - lo;
  r.sndr_db = ee == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(ex / ee);
  return r;
}

inline SndrReport sndr_db(const Signal& reference, const Signal& reconstructed, double trim = 0.9) {
  require_same_grid(reference.grid(), reconstructed.grid(), "sndr_db");
  return sndr_db(reference.values(), reconstructed.values(), reference.grid(), trim);
}

// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
// exception (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, count); ++t) pool.emplace_back(worker);
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct MonteCarloSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one trial
  std::vector<double> values;
};

// Runs run(base_seed + t) for t = 0..trials-1 and summarizes the results in trial order.
inline MonteCarloSummary monte_carlo(const std::function<double(std::uint64_t)>& run, std::size_t trials,
                                     std::uint64_t base_seed, unsigned threads = 1) {
  if (trials < 1) throw ParameterError("monte_carlo: trials must be >= 1");
  MonteCarloSummary s;
  s.values.resize(trials);
  std::vector<std::exception_ptr> errors(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    try {
      s.values[t] = run(base_seed + t);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  });
  for (std::size_t t = 0; t < trials; ++t) {
    if (!errors[t]) continue;
    try {
      std::rethrow_exception(errors[t]);
    } catch (const std::exception& e) {
      throw TrialError(base_seed + t, e.what());
    }
  }
  double sum = 0.0;
  for (double v : s.values) sum += v;
  s.mean = sum / static_cast<double>(trials);
  if (trials > 1 && std::isfinite(s.mean)) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(trials - 1));
  }
  return s;
}

} // namespace bptem
