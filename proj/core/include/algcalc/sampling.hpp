#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "algcalc/field.hpp"

namespace algcalc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SampleSpec {
  std::vector<Interval> x_box;
  std::vector<Interval> y_box;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  bool exclude_zero_section = false;
  double fiber_floor = 1e-3;
  int max_attempts = 1000;
};

struct SampleSet {
  SampleSpec spec;
  std::vector<Point> points;
};

// Stateless counter-based hash: the same (seed, index, attempt, coordinate) always gives the
// same 64 bits, independent of generation order.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt,
                           std::uint64_t coord);
double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt,
                       std::uint64_t coord);

SampleSet generate(const SampleSpec& spec);

struct Residual {
  std::string name;
  double max = 0.0;
  std::optional<Point> argmax;
  double tolerance = 0.0;
  bool pass = true;
};

struct ValidationReport {
  std::vector<Residual> residuals;
  std::uint64_t seed = 0;
  std::size_t points = 0;
  std::vector<std::pair<std::string, double>> durations_ms;

  bool pass() const;
  const Residual* find(const std::string& name) const;
  void add(Residual r) { residuals.push_back(std::move(r)); }
  void append(const ValidationReport& other);
};

// Max over per-point values. NaN dominates and fails; ties go to the lowest index.
struct PointMax {
  double value = 0.0;
  std::size_t index = 0;
  bool any = false;
};
PointMax reduce_max(std::span<const double> values);
Residual make_residual(std::string name, std::span<const double> per_point,
                       std::span<const Point> points, double tolerance);
inline bool within(double v, double tol) { return v <= tol; }

unsigned resolve_threads(unsigned requested);

// Evaluates fn(i) for i in [0, count) over contiguous chunks on `threads` threads. Results are
// stored by index; if any call throws, the exception of the lowest failing index is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t t = std::min<std::size_t>(resolve_threads(threads), count);
  if (t <= 1) {
    run(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + t - 1) / t;
    for (std::size_t b = 0; b < count; b += chunk)
      pool.emplace_back(run, b, std::min(count, b + chunk));
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace algcalc
