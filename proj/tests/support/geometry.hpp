#pragma once

// Seeded generators of valid test geometries and the small named fixtures used across suites.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "algcalc/lagrange.hpp"
#include "algcalc/metric.hpp"

namespace testgeo {

using namespace algcalc;

class PolyGen {
 public:
  explicit PolyGen(std::uint64_t seed) : rng_(seed) {}
  double coef(double scale);
  // Random polynomial in x (and y unless x_only) with total degree <= degree.
  std::string poly(int m, int r, int degree, double scale, bool x_only = false);
  std::vector<std::string> polys(std::size_t n, int m, int r, int degree, double scale,
                                 bool x_only = false);

 private:
  std::mt19937_64 rng_;
};

std::vector<ScalarField> fields(const std::vector<std::string>& src, Dims d);

// theta = D (I + N) with N strictly upper triangular, and its exact inverse (I - N + N^2) D^-1.
FrameDiffeoData random_frame(PolyGen& gen, int m, int r);

// g = A^T A + I for a random polynomial A, as n*n expression strings.
std::vector<std::string> random_spd(PolyGen& gen, int n, int m, int r, bool x_only = false);

struct RandomGeometry {
  int m = 0, p = 0, r = 0;
  AlgebroidPtr A;
  ConnectionPtr C;
  std::shared_ptr<MetricStructure> G;
  ObataTensors XY;
  std::shared_ptr<DConnection> base;
};
RandomGeometry random_geometry(std::uint64_t seed, int m = 3, int r = 2);

std::vector<Point> sample_points(int m, int r, std::size_t count, std::uint64_t seed,
                                 double half_width = 1.0, bool exclude_zero = true);

AlgebroidPtr so3_algebroid(int r = 3);
AlgebroidPtr standard_algebroid(int m, int r);
// g = delta / (x2)^2 on the half plane, as expression strings.
std::vector<std::string> poincare_metric();

}  // namespace testgeo
