#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "algcalc/error.hpp"
#include "algcalc/lagrange.hpp"

namespace algcalc::cli {

inline constexpr const char* kConfigSchema = "algcalc-config/1";
inline constexpr const char* kReportSchema = "algcalc-report/1";

// A library error raised while reading one config field. The code is the underlying error's
// code; field() is the JSON path, e.g. "anchor[0][0]".
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::string field, const std::string& message)
      : Error(code, field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct MetricSpec {
  std::vector<ScalarField> h, v;  // full p*p and r*r, upper triangle used
  bool h_riemannian = false;
  bool v_riemannian = false;
};

enum class BaseKind { berwald, zero, blocks };
struct BaseSpec {
  BaseKind kind = BaseKind::berwald;
  std::vector<ScalarField> hh, hv, vh, vv;
};

struct Tolerances {
  double structure = 1e-8;
  double metric = 1e-10;
  double metrizability = 1e-8;
  double roundtrip = 1e-10;
  double torsion = 1e-8;
  double homogeneity = 1e-12;
  double euler = 1e-10;
  double hessian = 1e-8;  // y y g - F^2
  void set_all(double t);
};

struct GeometryConfig {
  std::string source;  // file name without directories
  int m = 0, p = 0, r = 0;
  AlgebroidPtr algebroid;
  ConnectionPtr connection;
  std::optional<MetricSpec> metric;
  std::optional<FundamentalFunction> fundamental;
  BaseSpec base;
  std::optional<ObataTensors> obata;
  std::optional<FrameChange> frame_change;
  std::optional<TorsionPair> torsions;
  SampleSpec sampling;
  unsigned threads = 1;
  Tolerances tol;
  std::vector<Point> probes;
  std::vector<double> lambdas{0.5, 2.0, 3.0};

  Dims dims() const { return {m, r}; }
};

// Throws ParseError for malformed JSON, ShapeError/DimensionMismatch for structural problems and
// ConfigError for problems inside one field (expression errors keep their code).
GeometryConfig parse_config(std::string_view text, std::string source = "");
GeometryConfig load_config(const std::string& path);

// Parses "x1,..,xm,y1,..,yr".
Point parse_probe(std::string_view text, int m, int r);

struct RunOptions {
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> points;
  std::optional<std::vector<Point>> probes;
  std::optional<unsigned> threads;
  bool dump_samples = false;
  std::string convention;  // "" = library default; obata: compatible|swapped; torsion: plus-structure|minus-structure
};

struct CommandResult {
  int exit_code = 0;        // 0 all checks pass, 1 a check failed, 2 configuration error
  std::string report;       // JSON text, ends with a newline
  std::string diagnostic;   // one line for exit code 2
};

inline const std::vector<std::string> kCommands = {"check-structure", "connection", "metrizability",
                                                   "finsler-check", "transform-check", "report"};
inline const std::vector<std::string> kConnectionKinds = {
    "berwald", "canonical", "obata", "base-deform", "levi-civita", "torsion-deform"};

// `kind` is used by the connection command only.
CommandResult run_command(const std::string& command, const std::string& kind,
                          const GeometryConfig& config, const RunOptions& options);
// Loads the config and runs; load failures become exit code 2.
CommandResult run_file(const std::string& command, const std::string& kind, const std::string& path,
                       const RunOptions& options);

}  // namespace algcalc::cli
