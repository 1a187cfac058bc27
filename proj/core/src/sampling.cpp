#include "algcalc/sampling.hpp"

#include <cmath>

#include "algcalc/error.hpp"

namespace algcalc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void check_box(const std::vector<Interval>& box, const char* what) {
  for (const auto& iv : box)
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw ShapeError(std::string("invalid interval in ") + what + " box");
}

double max_corner_norm(const std::vector<Interval>& box) {
  double s = 0.0;
  for (const auto& iv : box) {
    const double a = std::max(std::fabs(iv.lo), std::fabs(iv.hi));
    s += a * a;
  }
  return std::sqrt(s);
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt,
                           std::uint64_t coord) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ attempt);
  return splitmix64(h ^ coord);
}

double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt,
                       std::uint64_t coord) {
  return static_cast<double>(counter_hash(seed, index, attempt, coord) >> 11) * 0x1.0p-53;
}

SampleSet generate(const SampleSpec& spec) {
  if (spec.count < 1) throw ShapeError("sample count must be at least 1");
  check_box(spec.x_box, "x");
  check_box(spec.y_box, "y");
  if (spec.exclude_zero_section && max_corner_norm(spec.y_box) < spec.fiber_floor)
    throw EmptyBox("fiber floor excludes the whole y box");
  SampleSet set{spec, {}};
  set.points.reserve(spec.count);
  const std::size_t m = spec.x_box.size();
  for (std::size_t i = 0; i < spec.count; ++i) {
    bool accepted = false;
    for (int attempt = 0; attempt < spec.max_attempts && !accepted; ++attempt) {
      Point p;
      p.x.resize(m);
      p.y.resize(spec.y_box.size());
      double norm2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const auto& iv = spec.x_box[c];
        p.x[c] = iv.lo + counter_uniform(spec.seed, i, attempt, c) * (iv.hi - iv.lo);
      }
      for (std::size_t c = 0; c < spec.y_box.size(); ++c) {
        const auto& iv = spec.y_box[c];
        p.y[c] = iv.lo + counter_uniform(spec.seed, i, attempt, m + c) * (iv.hi - iv.lo);
        norm2 += p.y[c] * p.y[c];
      }
      if (spec.exclude_zero_section && std::sqrt(norm2) < spec.fiber_floor) continue;
      set.points.push_back(std::move(p));
      accepted = true;
    }
    if (!accepted)
      throw EmptyBox("could not draw a point off the zero section after " +
                     std::to_string(spec.max_attempts) + " attempts");
  }
  return set;
}

bool ValidationReport::pass() const {
  for (const auto& r : residuals)
    if (!r.pass) return false;
  return true;
}

const Residual* ValidationReport::find(const std::string& name) const {
  for (const auto& r : residuals)
    if (r.name == name) return &r;
  return nullptr;
}

void ValidationReport::append(const ValidationReport& other) {
  residuals.insert(residuals.end(), other.residuals.begin(), other.residuals.end());
  durations_ms.insert(durations_ms.end(), other.durations_ms.begin(), other.durations_ms.end());
}

PointMax reduce_max(std::span<const double> values) {
  PointMax best;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!best.any) {
      best = {v, i, true};
      continue;
    }
    if (std::isnan(best.value)) break;
    if (std::isnan(v) || v > best.value) best = {v, i, true};
  }
  return best;
}

Residual make_residual(std::string name, std::span<const double> per_point,
                       std::span<const Point> points, double tolerance) {
  Residual r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  const PointMax pm = reduce_max(per_point);
  if (pm.any) {
    r.max = pm.value;
    if (pm.index < points.size()) r.argmax = points[pm.index];
  }
  r.pass = within(r.max, tolerance);
  return r;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace algcalc
