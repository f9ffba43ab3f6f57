#include "magspec/io/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "magspec/beta/beta_minimum.hpp"
#include "magspec/beta/prediction.hpp"
#include "magspec/direct/campaign.hpp"
#include "magspec/error.hpp"
#include "magspec/log.hpp"
#include "magspec/model/model_operator.hpp"
#include "magspec/parallel.hpp"
#include "magspec/schema.hpp"

namespace magspec::io {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e))
    return kExitConfig;
  if (dynamic_cast<const AssumptionError*>(&e)) return kExitAssumption;
  return kExitSolver;
}

geometry::FrameSpec frame_spec(const RunConfig::Geometry& g) {
  using namespace geometry;
  FrameSpec spec;
  const Eigen::Vector3d b(g.field[0], g.field[1], g.field[2]);
  if (g.preset == "flat-quadratic") {
    spec.chart = std::make_shared<PlaneChart>();
    spec.field = flat_quadratic_field(g.theta0, g.a, g.b, g.k);
  } else if (g.preset == "flat-constant") {
    spec.chart = std::make_shared<PlaneChart>();
    spec.field = constant_field(b);
  } else if (g.preset == "sphere") {
    spec.chart = sphere_chart(g.polar_axis);
    spec.field = constant_field(b);
  } else if (g.preset == "ellipsoid") {
    spec.chart = std::make_shared<EllipsoidChart>(Eigen::Vector3d(g.axes[0], g.axes[1], g.axes[2]), g.polar_axis);
    spec.field = constant_field(b);
  } else {
    throw ConfigError("unknown geometry preset '" + g.preset + "'");
  }
  if (g.gauge_linear[0] != 0 || g.gauge_linear[1] != 0)
    spec.field = spec.field.with_gauge(linear_gauge(g.gauge_linear[0], g.gauge_linear[1]));
  if (g.gauge_quadratic[0] != 0 || g.gauge_quadratic[1] != 0 || g.gauge_quadratic[2] != 0)
    spec.field = spec.field.with_gauge(quadratic_gauge(g.gauge_quadratic[0], g.gauge_quadratic[1], g.gauge_quadratic[2]));
  spec.origin = {g.origin[0], g.origin[1]};
  spec.r_half = g.r_half;
  spec.s_half = g.s_half;
  spec.step = g.step;
  spec.substeps = g.substeps;
  return spec;
}

namespace {

model::BandCurve compute_band(const RunConfig& config) {
  model::AutoBoxOptions options;
  options.ds = config.band.ds;
  options.dt = config.band.dt;
  const std::vector<double> thetas = config.band.thetas.empty() ? model::default_band_thetas() : config.band.thetas;
  return model::build_band_curve_auto(thetas, options);
}

model::BandCurve read_band(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open band curve '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
    return model::BandCurve::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("band curve '" + path.string() + "' is not valid: " + e.what());
  }
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

template <class Writer>
std::string capture(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

beta::MinimizeOptions minimize_options(const RunConfig& config) {
  beta::MinimizeOptions o;
  o.margin = config.beta.margin;
  o.depth = config.beta.depth;
  o.depth_layers = config.beta.depth_layers;
  o.multistart = config.beta.multistart;
  return o;
}

struct BetaRun {
  geometry::FrameSpec spec;
  geometry::AdaptedFrame frame;
  beta::BetaMinimum minimum;
};

BetaRun run_beta(const RunConfig& config) {
  BetaRun r;
  r.spec = frame_spec(config.geometry);
  r.frame = geometry::build_frame(r.spec, resolve_band(config));
  r.minimum = beta::minimize_beta(r.frame, minimize_options(config));
  return r;
}

// Verdict block for a hypothesis failure that stopped the minimization.
nlohmann::json failed_verdicts(const std::string& message) {
  nlohmann::json v = {{"localized", nullptr},
                      {"hessian_spd", nullptr},
                      {"beta_below_b_min", nullptr},
                      {"theta_interior", nullptr},
                      {"unique", nullptr}};
  if (message.find("not localized") != std::string::npos) v["localized"] = false;
  if (message.find("degenerate") != std::string::npos) v["hessian_spd"] = false;
  if (message.find("inclination") != std::string::npos) v["theta_interior"] = false;
  return v;
}

}  // namespace

std::shared_ptr<const model::BandCurve> resolve_band(const RunConfig& config) {
  if (!config.band.file.empty()) return std::make_shared<model::BandCurve>(read_band(config.band.file));
  const fs::path cached = fs::path(config.run.out) / "band_curve.json";
  if (fs::exists(cached)) return std::make_shared<model::BandCurve>(read_band(cached));
  warn("no band curve given; computing one on the [band] grid (run 'magspec band' once to cache it)");
  return std::make_shared<model::BandCurve>(compute_band(config));
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

nlohmann::json stamp(nlohmann::json j, const RunConfig& config) {
  j["schema"] = kSchemaVersion;
  j["config"] = config.to_json();
  return j;
}

CommandOutcome cmd_band(const RunConfig& config) {
  const fs::path out(config.run.out);
  const model::BandCurve curve = compute_band(config);
  CommandOutcome r;
  r.files = {out / "band_curve.csv", out / "band_curve.json"};
  write_file(r.files[0], capture([&](std::ostream& os) { curve.write_csv(os); }));
  write_file(r.files[1], json_text(stamp(curve.to_json(), config)));
  return r;
}

CommandOutcome cmd_beta(const RunConfig& config) {
  const fs::path out(config.run.out);
  CommandOutcome r;
  r.files = {out / "beta_map.csv", out / "minimum.json"};

  const geometry::FrameSpec spec = frame_spec(config.geometry);
  const geometry::AdaptedFrame frame = geometry::build_frame(spec, resolve_band(config));
  write_file(r.files[0], capture([&](std::ostream& os) { geometry::write_frame_csv(frame, os); }));

  try {
    const beta::BetaMinimum bm = beta::minimize_beta(frame, minimize_options(config));
    nlohmann::json j = bm.to_json();
    j["status"] = bm.verdicts.all() ? "ok" : "verdicts-failed";
    write_file(r.files[1], json_text(stamp(std::move(j), config)));
    if (!bm.verdicts.all()) {
      warn("beta analysis: at least one hypothesis verdict is false (see minimum.json)");
      if (config.run.strict) r.exit_code = kExitAssumption;
    }
  } catch (const AssumptionError& e) {
    nlohmann::json j = {{"status", "assumption-failed"}, {"error", e.what()}, {"verdicts", failed_verdicts(e.what())}};
    write_file(r.files[1], json_text(stamp(std::move(j), config)));
    throw;
  }
  return r;
}

CommandOutcome cmd_predict(const RunConfig& config) {
  const fs::path out(config.run.out);
  const BetaRun b = run_beta(config);
  std::optional<beta::FittedConstants> fitted;
  if (config.predict.fitted) fitted = beta::FittedConstants{config.predict.c0, config.predict.c1};
  const beta::Prediction p = beta::predict_spectrum(b.minimum, config.predict.h_list, config.predict.n_max, fitted);

  CommandOutcome r;
  r.files = {out / "prediction.csv", out / "prediction.json"};
  write_file(r.files[0], capture([&](std::ostream& os) { p.write_csv(os); }));
  nlohmann::json j = p.to_json();
  j["d0"] = b.minimum.d0;
  j["verdicts"] = b.minimum.to_json()["verdicts"];
  write_file(r.files[1], json_text(stamp(std::move(j), config)));
  if (!b.minimum.verdicts.all() && config.run.strict) r.exit_code = kExitAssumption;
  return r;
}

CommandOutcome cmd_validate(const RunConfig& config) {
  const fs::path out(config.run.out);
  const BetaRun b = run_beta(config);

  direct::CampaignOptions options;
  options.h_list = config.validate.h_list;
  options.levels = config.validate.levels;
  options.rule = {config.validate.lateral, config.validate.depth, config.validate.points_per_length};
  options.tol = config.validate.tol;
  options.shift_fraction = config.validate.shift_fraction;
  if (config.validate.slices) options.slice_dir = (out / "slices").string();
  if (!options.slice_dir.empty()) fs::create_directories(options.slice_dir);

  const direct::ValidationTable table = direct::toy_validation(b.minimum, b.spec.field, options);
  CommandOutcome r;
  r.files = {out / "validation.csv", out / "validation_report.json"};
  write_file(r.files[0], capture([&](std::ostream& os) { table.write_csv(os); }));
  nlohmann::json j = table.to_json();
  j["beta_minimum"] = b.minimum.to_json();
  write_file(r.files[1], json_text(stamp(std::move(j), config)));
  return r;
}

CommandOutcome cmd_model(const RunConfig& config) {
  const fs::path out(config.run.out);
  const auto& m = config.model;
  std::mt19937_64 rng(config.run.seed);

  std::ostringstream csv;
  csv.precision(15);
  csv << "sample,n,alpha_re,alpha_im,beta_re,beta_im,formula,numeric_re,numeric_im,rel_mismatch\n";
  nlohmann::json samples = nlohmann::json::array();
  double worst = 0.0;
  for (std::size_t s = 0; s < m.samples; ++s) {
    const auto [alpha, beta] = model::sample_real_shift_pair(rng);
    const auto formula = model::model_spectrum_formula(m.d0, m.p_eff0, alpha, beta, m.h, m.n_max);
    const auto numeric = model::model_spectrum_numeric(m.d0, alpha, beta, m.h, m.n_grid, m.n_max, m.p_eff0);
    double sample_worst = 0.0;
    for (std::size_t n = 0; n < m.n_max; ++n) {
      const model::cdouble f = formula.eigenvalues[n], v = numeric.eigenvalues[n];
      const double rel = std::abs(v - f) / std::abs(f);
      sample_worst = std::max(sample_worst, rel);
      csv << s << ',' << n + 1 << ',' << alpha.real() << ',' << alpha.imag() << ',' << beta.real() << ','
          << beta.imag() << ',' << f.real() << ',' << v.real() << ',' << v.imag() << ',' << rel << '\n';
    }
    worst = std::max(worst, sample_worst);
    samples.push_back({{"alpha", {alpha.real(), alpha.imag()}},
                       {"beta", {beta.real(), beta.imag()}},
                       {"n_grid", numeric.n_grid},
                       {"window", numeric.window},
                       {"max_residual", numeric.max_residual},
                       {"max_rel_mismatch", sample_worst}});
  }

  CommandOutcome r;
  r.files = {out / "model_table.csv", out / "model_table.json"};
  write_file(r.files[0], csv.str());
  nlohmann::json j = {{"kind", "model_table"}, {"max_rel_mismatch", worst}, {"samples", samples}};
  write_file(r.files[1], json_text(stamp(std::move(j), config)));
  return r;
}

int run_command(const RunConfig& config, std::ostream& err) {
  try {
    config.check();
    if (config.run.threads > 0) set_thread_count(config.run.threads);
    const fs::path out(config.run.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw ConfigError("output directory '" + out.string() + "' cannot be created");
    {
      const fs::path probe = out / ".magspec_write_probe";
      std::ofstream p(probe);
      if (!p) throw ConfigError("output directory '" + out.string() + "' is not writable");
      p.close();
      fs::remove(probe, ec);
    }

    const std::string& c = config.run.command;
    CommandOutcome outcome;
    if (c == "band")
      outcome = cmd_band(config);
    else if (c == "beta")
      outcome = cmd_beta(config);
    else if (c == "predict")
      outcome = cmd_predict(config);
    else if (c == "validate")
      outcome = cmd_validate(config);
    else if (c == "model")
      outcome = cmd_model(config);
    else
      throw ConfigError("no command given (expected one of band, beta, predict, validate, model)");
    return outcome.exit_code;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const char* kind = code == kExitConfig   ? "configuration error"
                       : code == kExitSolver ? "solver error"
                                             : "assumption violated";
    err << "magspec " << config.run.command << ": " << kind << ": " << e.what() << '\n';
    return code;
  }
}

}  // namespace magspec::io
