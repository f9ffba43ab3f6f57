#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace magspec::io {

/// Resolved settings for one CLI invocation. The text form is INI with the
/// sections [run], [band], [geometry], [beta], [predict], [validate] and
/// [model]; FORMATS.md lists every key and its default.
struct RunConfig {
  struct Run {
    std::string command;
    std::string out = "out";
    std::uint64_t seed = 1;
    bool strict = false;
    std::size_t threads = 0;  // 0: MAGSPEC_THREADS or 1
  } run;

  struct Band {
    std::vector<double> thetas;  // empty: the default 25-point grid
    double ds = 0.1;
    double dt = 0.1;
    std::string file;  // band_curve.json to reuse instead of recomputing
  } band;

  struct Geometry {
    std::string preset = "flat-quadratic";  // flat-quadratic, flat-constant, sphere, ellipsoid
    double theta0 = 0.7853981633974483;
    double a = 0.5, b = 1.0, k = 1.0;  // flat-quadratic coefficients
    std::vector<double> field{0.0, 0.0, 1.0};  // constant-field presets
    std::vector<double> axes{1.0, 1.5, 2.0};   // ellipsoid semi-axes
    int polar_axis = 2;
    std::vector<double> origin{0.0, 0.0};
    double r_half = 0.5, s_half = 0.5, step = 0.05;
    int substeps = 5;
    std::vector<double> gauge_linear{0.0, 0.0};
    std::vector<double> gauge_quadratic{0.0, 0.0, 0.0};
  } geometry;

  struct Beta {
    double margin = 0.999;
    double depth = 0.5;
    std::size_t depth_layers = 6;
    bool multistart = true;
  } beta;

  struct Predict {
    std::vector<double> h_list{0.1, 0.07, 0.05};
    int n_max = 4;
    bool fitted = false;
    double c0 = 0.0, c1 = 0.0;
  } predict;

  struct Validate {
    std::vector<double> h_list{0.1, 0.07, 0.05};
    std::size_t levels = 2;
    double lateral = 7.0, depth = 7.0, points_per_length = 6.0;
    double tol = 1e-8;
    double shift_fraction = 0.7;
    bool slices = false;
  } validate;

  struct Model {
    double d0 = 2.0;
    double p_eff0 = 0.6;
    double h = 0.1;
    std::size_t n_max = 5;
    std::size_t samples = 5;
    std::size_t n_grid = 0;
  } model;

  /// The five CLI commands.
  static const std::vector<std::string>& commands();

  /// ConfigError on unknown sections or keys, unparsable values, unknown
  /// presets or out-of-range numbers.
  static RunConfig parse(std::istream& is);
  static RunConfig parse_file(const std::string& path);
  /// Applies one "section.key = value" override on top of the current values.
  void set(const std::string& section, const std::string& key, const std::string& value);

  void check() const;
  /// INI text; parse(serialize()) reproduces every field.
  std::string serialize() const;
  nlohmann::json to_json() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Comma-separated reals, e.g. "0.1,0.07,0.05".
std::vector<double> parse_real_list(const std::string& text);

}  // namespace magspec::io
