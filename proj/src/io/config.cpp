#include "magspec/io/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "magspec/error.hpp"

namespace magspec::io {
namespace {

using Inputs = std::vector<std::string>;

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // Keep reals recognisable as reals in the text form.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

double parse_real(const std::string& where, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ConfigError("config: " + where + ": cannot parse '" + text + "' as a real number");
  return v;
}

template <class Int>
Int parse_integer(const std::string& where, const std::string& text) {
  Int v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config: " + where + ": cannot parse '" + text + "' as a non-negative integer");
  return v;
}

const std::string& single(const std::string& where, const Inputs& in) {
  if (in.size() != 1) throw ConfigError("config: " + where + " expects a single value");
  return in.front();
}

// Typed conversion between a field and its config text.
template <class T>
struct Codec;


template <>
struct Codec<double> {
  static void read(const std::string& w, const Inputs& in, double& v) { v = parse_real(w, single(w, in)); }
  static std::string write(double v) { return format_real(v); }
  static nlohmann::json json(double v) { return v; }
};

template <>
struct Codec<int> {
  static void read(const std::string& w, const Inputs& in, int& v) {
    const std::string& s = single(w, in);
    int out{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("config: " + w + ": cannot parse '" + s + "' as an integer");
    v = out;
  }
  static std::string write(int v) { return std::to_string(v); }
  static nlohmann::json json(int v) { return v; }
};

template <class T>
  requires(std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
struct Codec<T> {
  static void read(const std::string& w, const Inputs& in, T& v) { v = parse_integer<T>(w, single(w, in)); }
  static std::string write(T v) { return std::to_string(v); }
  static nlohmann::json json(T v) { return v; }
};

template <>
struct Codec<bool> {
  static void read(const std::string& w, const Inputs& in, bool& v) {
    std::string s = single(w, in);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on")
      v = true;
    else if (s == "false" || s == "0" || s == "no" || s == "off")
      v = false;
    else
      throw ConfigError("config: " + w + ": cannot parse '" + s + "' as a boolean");
  }
  static std::string write(bool v) { return v ? "true" : "false"; }
  static nlohmann::json json(bool v) { return v; }
};

template <>
struct Codec<std::string> {
  static void read(const std::string& w, const Inputs& in, std::string& v) {
    if (in.empty()) {
      v.clear();
      return;
    }
    v = single(w, in);
  }
  static std::string write(const std::string& v) {
    std::string out = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }
  static nlohmann::json json(const std::string& v) { return v; }
};

template <>
struct Codec<std::vector<double>> {
  static void read(const std::string& w, const Inputs& in, std::vector<double>& v) {
    v.clear();
    for (const std::string& s : in) v.push_back(parse_real(w, s));
  }
  static std::string write(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_real(v[i]);
    return out + "]";
  }
  static nlohmann::json json(const std::vector<double>& v) { return v; }
};

struct Field {
  std::string section, key;
  std::function<void(RunConfig&, const Inputs&)> read;
  std::function<std::string(const RunConfig&)> write;
  std::function<nlohmann::json(const RunConfig&)> json;
};

template <class S, class T>
Field field(const char* section, const char* key, S RunConfig::* group, T S::* member) {
  const std::string where = std::string(section) + "." + key;
  return Field{section, key,
               [=](RunConfig& c, const Inputs& in) { Codec<T>::read(where, in, c.*group.*member); },
               [=](const RunConfig& c) { return Codec<T>::write(c.*group.*member); },
               [=](const RunConfig& c) { return Codec<T>::json(c.*group.*member); }};
}

const std::vector<Field>& fields() {
  using C = RunConfig;
  static const std::vector<Field> table = {
      field("run", "command", &C::run, &C::Run::command),
      field("run", "out", &C::run, &C::Run::out),
      field("run", "seed", &C::run, &C::Run::seed),
      field("run", "strict", &C::run, &C::Run::strict),
      field("run", "threads", &C::run, &C::Run::threads),

      field("band", "thetas", &C::band, &C::Band::thetas),
      field("band", "ds", &C::band, &C::Band::ds),
      field("band", "dt", &C::band, &C::Band::dt),
      field("band", "file", &C::band, &C::Band::file),

      field("geometry", "preset", &C::geometry, &C::Geometry::preset),
      field("geometry", "theta0", &C::geometry, &C::Geometry::theta0),
      field("geometry", "a", &C::geometry, &C::Geometry::a),
      field("geometry", "b", &C::geometry, &C::Geometry::b),
      field("geometry", "k", &C::geometry, &C::Geometry::k),
      field("geometry", "field", &C::geometry, &C::Geometry::field),
      field("geometry", "axes", &C::geometry, &C::Geometry::axes),
      field("geometry", "polar_axis", &C::geometry, &C::Geometry::polar_axis),
      field("geometry", "origin", &C::geometry, &C::Geometry::origin),
      field("geometry", "r_half", &C::geometry, &C::Geometry::r_half),
      field("geometry", "s_half", &C::geometry, &C::Geometry::s_half),
      field("geometry", "step", &C::geometry, &C::Geometry::step),
      field("geometry", "substeps", &C::geometry, &C::Geometry::substeps),
      field("geometry", "gauge_linear", &C::geometry, &C::Geometry::gauge_linear),
      field("geometry", "gauge_quadratic", &C::geometry, &C::Geometry::gauge_quadratic),

      field("beta", "margin", &C::beta, &C::Beta::margin),
      field("beta", "depth", &C::beta, &C::Beta::depth),
      field("beta", "depth_layers", &C::beta, &C::Beta::depth_layers),
      field("beta", "multistart", &C::beta, &C::Beta::multistart),

      field("predict", "h_list", &C::predict, &C::Predict::h_list),
      field("predict", "n_max", &C::predict, &C::Predict::n_max),
      field("predict", "fitted", &C::predict, &C::Predict::fitted),
      field("predict", "c0", &C::predict, &C::Predict::c0),
      field("predict", "c1", &C::predict, &C::Predict::c1),

      field("validate", "h_list", &C::validate, &C::Validate::h_list),
      field("validate", "levels", &C::validate, &C::Validate::levels),
      field("validate", "lateral", &C::validate, &C::Validate::lateral),
      field("validate", "depth", &C::validate, &C::Validate::depth),
      field("validate", "points_per_length", &C::validate, &C::Validate::points_per_length),
      field("validate", "tol", &C::validate, &C::Validate::tol),
      field("validate", "shift_fraction", &C::validate, &C::Validate::shift_fraction),
      field("validate", "slices", &C::validate, &C::Validate::slices),

      field("model", "d0", &C::model, &C::Model::d0),
      field("model", "p_eff0", &C::model, &C::Model::p_eff0),
      field("model", "h", &C::model, &C::Model::h),
      field("model", "n_max", &C::model, &C::Model::n_max),
      field("model", "samples", &C::model, &C::Model::samples),
      field("model", "n_grid", &C::model, &C::Model::n_grid),
  };
  return table;
}

const Field& find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields())
    if (f.section == section && f.key == key) return f;
  bool known_section = false;
  for (const Field& f : fields()) known_section = known_section || f.section == section;
  if (!known_section) throw ConfigError("config: unknown section [" + section + "]");
  throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
}

const std::vector<std::string> kPresets{"flat-quadratic", "flat-constant", "sphere", "ellipsoid"};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

void require_positive_list(const std::vector<double>& v, const std::string& name) {
  require(!v.empty(), name + " must not be empty");
  for (double x : v) require(x > 0, name + " entries must be positive");
}

}  // namespace

const std::vector<std::string>& RunConfig::commands() {
  static const std::vector<std::string> names{"band", "beta", "predict", "validate", "model"};
  return names;
}

RunConfig RunConfig::parse(std::istream& is) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigBase().from_config(is);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig config;
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (item.parents.size() != 1)
      throw ConfigError("config: key '" + item.fullname() + "' must sit inside exactly one [section]");
    find_field(item.parents.front(), item.name).read(config, item.inputs);
  }
  config.check();
  return config;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse(in);
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  std::string text = value;
  if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
  Inputs in;
  if (find_field(section, key).write(*this).starts_with("[")) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) in.push_back(item);
    }
  } else {
    in.push_back(text);
  }
  find_field(section, key).read(*this, in);
}

void RunConfig::check() const {
  const auto& cmds = commands();
  require(run.command.empty() || std::find(cmds.begin(), cmds.end(), run.command) != cmds.end(),
          "unknown command '" + run.command + "'");
  require(!run.out.empty(), "run.out must name an output directory");

  for (std::size_t i = 0; i < band.thetas.size(); ++i) {
    require(band.thetas[i] > 0 && band.thetas[i] < std::numbers::pi / 2, "band.thetas must lie in (0, pi/2)");
    require(i == 0 || band.thetas[i] > band.thetas[i - 1], "band.thetas must be strictly increasing");
  }
  require(band.ds > 0 && band.dt > 0, "band.ds and band.dt must be positive");

  require(std::find(kPresets.begin(), kPresets.end(), geometry.preset) != kPresets.end(),
          "unknown geometry preset '" + geometry.preset +
              "' (known: flat-quadratic, flat-constant, sphere, ellipsoid)");
  require(geometry.theta0 > 0 && geometry.theta0 < std::numbers::pi / 2, "geometry.theta0 must lie in (0, pi/2)");
  require(geometry.field.size() == 3, "geometry.field needs three components");
  require(geometry.axes.size() == 3, "geometry.axes needs three semi-axes");
  for (double a : geometry.axes) require(a > 0, "geometry.axes must be positive");
  require(geometry.polar_axis >= 0 && geometry.polar_axis <= 2, "geometry.polar_axis must be 0, 1 or 2");
  require(geometry.origin.size() == 2, "geometry.origin needs two chart coordinates");
  require(geometry.r_half > 0 && geometry.s_half > 0 && geometry.step > 0,
          "geometry.r_half, s_half and step must be positive");
  require(geometry.substeps >= 1, "geometry.substeps must be at least 1");
  require(geometry.gauge_linear.size() == 2, "geometry.gauge_linear needs two coefficients");
  require(geometry.gauge_quadratic.size() == 3, "geometry.gauge_quadratic needs three coefficients");

  require(beta.margin > 0 && beta.margin <= 1, "beta.margin must lie in (0, 1]");
  require(beta.depth >= 0 && beta.depth_layers >= 1, "beta.depth must be >= 0 and beta.depth_layers >= 1");

  require_positive_list(predict.h_list, "predict.h_list");
  require(predict.n_max >= 1, "predict.n_max must be at least 1");

  require_positive_list(validate.h_list, "validate.h_list");
  require(validate.levels >= 1, "validate.levels must be at least 1");
  require(validate.lateral > 0 && validate.depth > 0 && validate.points_per_length > 0,
          "validate box factors must be positive");
  require(validate.tol > 0, "validate.tol must be positive");
  require(validate.shift_fraction >= 0 && validate.shift_fraction < 1, "validate.shift_fraction must lie in [0, 1)");

  require(model.d0 > 0 && model.h > 0, "model.d0 and model.h must be positive");
  require(model.n_max >= 1 && model.samples >= 1, "model.n_max and model.samples must be at least 1");
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    os << f.key << " = " << f.write(*this) << '\n';
  }
  return os.str();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const Field& f : fields()) j[f.section][f.key] = f.json(*this);
  return j;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.serialize() == b.serialize(); }

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw ConfigError("empty entry in list '" + text + "'");
    out.push_back(parse_real("list", item));
  }
  return out;
}

}  // namespace magspec::io
