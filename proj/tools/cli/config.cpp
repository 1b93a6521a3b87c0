#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "kolmo/error.hpp"

namespace kolmo::cli {
namespace {

using nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <class T>
constexpr const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

template <class T>
T convert(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, std::string("expected ") + type_name<T>());
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, std::string("expected ") + type_name<T>() + ", got '" + n.Scalar() + "'");
  }
}

// A mapping whose keys are checked off as they are read.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
  std::string key_path(const std::string& key) const { return join(path_, key); }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? node_[key] : YAML::Node();
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    return convert<T>(raw(key), key_path(key));
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(key_path(key), "required key is missing");
    return convert<T>(raw(key), key_path(key));
  }

  template <class T>
  std::vector<T> list(const std::string& key) {
    std::vector<T> out;
    if (!has(key)) {
      seen_.insert(key);
      return out;
    }
    const YAML::Node n = raw(key);
    if (!n.IsSequence()) throw ConfigError(key_path(key), "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(convert<T>(n[i], key_path(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!seen_.count(k)) throw ConfigError(key_path(k), "unknown key");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_decreasing(const std::vector<double>& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(std::isfinite(v[i]) && v[i] > 0.0)) throw ConfigError(path, "entries must be finite and > 0");
    if (i > 0 && !(v[i] < v[i - 1])) throw ConfigError(path, "must be strictly decreasing");
  }
}

TensorKind projection_from(const std::string& s, const std::string& path) {
  try {
    return parse_tensor_kind(s);
  } catch (const Error&) {
    throw ConfigError(path, "expected one of I, L, T, got '" + s + "'");
  }
}

std::array<int, 3> int_triple(const std::vector<int>& v, int dim, const std::string& path) {
  if (static_cast<int>(v.size()) != dim) throw ConfigError(path, "expected " + std::to_string(dim) + " entries");
  std::array<int, 3> out{0, 0, 0};
  for (int a = 0; a < dim; ++a) out[a] = v[a];
  return out;
}

Vec real_triple(const std::vector<double>& v, int dim, const std::string& path) {
  if (static_cast<int>(v.size()) != dim) throw ConfigError(path, "expected " + std::to_string(dim) + " entries");
  Vec out{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) out[a] = v[a];
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void check_length_exponent(double L, double alpha, const std::string& key_path) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("sweep.alpha", "must lie in (0, 1]");
  if (!(L > 0.0)) throw ConfigError(key_path, "must be > 0");
  if (alpha < 1.0 && !(L < 1.0 / (2.0 * (1.0 - alpha)))) {
    std::ostringstream msg;
    msg << "L = " << L << " violates L < 1/(2(1-alpha)) = " << 1.0 / (2.0 * (1.0 - alpha)) << " for alpha = " << alpha;
    throw ConfigError(key_path, msg.str());
  }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("malformed YAML: ") + e.what());
  }
  RunConfig c;
  Section top(root, "");
  ordered_json& echo = c.echo;

  {
    Section s = top.child("grid");
    const int dim = s.require<int>("dim");
    const int n = s.require<int>("n");
    if (dim != 2 && dim != 3) throw ConfigError("grid.dim", "must be 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("grid.n", "must be a power of two >= 8");
    c.grid = Grid(dim, n);
    s.finish();
    echo["grid"] = {{"dim", dim}, {"n", n}};
  }
  const int dim = c.grid.dim();

  {
    Section s = top.child("solver");
    SolverParams& p = c.solver;
    p.nu = s.require<double>("nu");
    p.dt = s.require<double>("dt");
    p.t_end = s.require<double>("t_end");
    p.snapshot_stride = s.get<int>("snapshot_stride", p.snapshot_stride);
    p.dealias_fraction = s.get<double>("dealias", p.dealias_fraction);
    p.integrating_factor = s.get<bool>("integrating_factor", p.integrating_factor);
    const std::string cfl = s.get<std::string>("cfl_policy", "abort");
    if (cfl == "abort") p.cfl_policy = CflPolicy::abort;
    else if (cfl == "warn") p.cfl_policy = CflPolicy::warn;
    else throw ConfigError("solver.cfl_policy", "expected abort or warn, got '" + cfl + "'");
    p.cfl_limit = s.get<double>("cfl_limit", p.cfl_limit);
    p.max_n_3d = s.get<int>("max_n_3d", p.max_n_3d);
    s.finish();
    p.validate(c.grid);
    if (p.step_count() % static_cast<std::uint64_t>(p.snapshot_stride) != 0) {
      throw ConfigError("solver.snapshot_stride", "must divide the step count t_end / dt = " + std::to_string(p.step_count()));
    }
    echo["solver"] = {{"nu", p.nu},
                      {"dt", p.dt},
                      {"t_end", p.t_end},
                      {"snapshot_stride", p.snapshot_stride},
                      {"dealias", p.dealias_fraction},
                      {"integrating_factor", p.integrating_factor},
                      {"cfl_policy", cfl},
                      {"cfl_limit", p.cfl_limit},
                      {"max_n_3d", p.max_n_3d}};
  }

  {
    Section s = top.child("init");
    InitSpec& i = c.initial;
    const std::string kind = s.get<std::string>("kind", "taylor_green");
    ordered_json e;
    e["kind"] = kind;
    if (kind == "taylor_green") {
      i.kind = InitSpec::Kind::taylor_green;
      i.mode = s.get<int>("mode", i.mode);
      i.amplitude = s.get<double>("amplitude", i.amplitude);
      e["mode"] = i.mode;
      e["amplitude"] = i.amplitude;
    } else if (kind == "random") {
      i.kind = InitSpec::Kind::random;
      i.seed = s.get<std::uint64_t>("seed", i.seed);
      i.kmin = s.get<int>("kmin", i.kmin);
      i.kmax = s.get<int>("kmax", i.kmax);
      i.slope = s.get<double>("slope", i.slope);
      i.energy = s.get<double>("energy", i.energy);
      e["seed"] = i.seed;
      e["kmin"] = i.kmin;
      e["kmax"] = i.kmax;
      e["slope"] = i.slope;
      e["energy"] = i.energy;
    } else if (kind == "file") {
      i.kind = InitSpec::Kind::file;
      i.file = resolve(base, s.require<std::string>("file"));
      e["file"] = i.file.string();
    } else {
      throw ConfigError("init.kind", "expected taylor_green, random or file, got '" + kind + "'");
    }
    s.finish();
    echo["init"] = e;
  }

  {
    Section s = top.child("forcing");
    ForcingSpec& f = c.forcing;
    const std::string kind = s.get<std::string>("kind", "none");
    ordered_json e;
    e["kind"] = kind;
    if (kind == "none") {
      f.kind = ForcingSpec::Kind::none;
    } else if (kind == "modes") {
      f.kind = ForcingSpec::Kind::modes;
      const YAML::Node modes = s.has("modes") ? s.raw("modes") : YAML::Node();
      if (!modes.IsSequence() || modes.size() == 0) throw ConfigError("forcing.modes", "expected a nonempty list");
      e["modes"] = ordered_json::array();
      for (std::size_t m = 0; m < modes.size(); ++m) {
        const std::string path = "forcing.modes[" + std::to_string(m) + "]";
        Section ms(modes[m], path);
        ForcingMode mode;
        mode.k = int_triple(ms.list<int>("k"), dim, path + ".k");
        mode.amplitude = real_triple(ms.list<double>("amplitude"), dim, path + ".amplitude");
        mode.phase = ms.get<double>("phase", 0.0);
        mode.omega = ms.get<double>("omega", 0.0);
        ms.finish();
        f.modes.push_back(mode);
        e["modes"].push_back({{"k", std::vector<int>(mode.k.begin(), mode.k.begin() + dim)},
                              {"amplitude", std::vector<double>(mode.amplitude.begin(), mode.amplitude.begin() + dim)},
                              {"phase", mode.phase},
                              {"omega", mode.omega}});
      }
    } else if (kind == "file") {
      f.kind = ForcingSpec::Kind::file;
      for (const auto& p : s.list<std::string>("files")) f.files.push_back(resolve(base, p));
      if (f.files.empty()) throw ConfigError("forcing.files", "expected a nonempty list");
      e["files"] = ordered_json::array();
      for (const auto& p : f.files) e["files"].push_back(p.string());
    } else {
      throw ConfigError("forcing.kind", "expected none, modes or file, got '" + kind + "'");
    }
    s.finish();
    echo["forcing"] = e;
  }

  {
    Section s = top.child("analysis");
    AnalysisConfig& a = c.analysis;
    a.scales = s.list<double>("scales");
    for (std::size_t i = 0; i < a.scales.size(); ++i) {
      const double l = a.scales[i];
      if (!(l > 0.0 && l <= std::numbers::pi / 2 + 1e-15)) {
        throw ConfigError("analysis.scales[" + std::to_string(i) + "]", "scale " + fmt::format("{}", l) + " must lie in (0, pi/2]");
      }
    }
    if (s.has("projections")) {
      a.projections.clear();
      for (const auto& p : s.list<std::string>("projections")) a.projections.push_back(projection_from(p, "analysis.projections"));
    }
    a.sphere_order = s.get<int>("sphere_order", 0);
    if (a.sphere_order < 0) throw ConfigError("analysis.sphere_order", "must be >= 0");
    s.finish();
    ordered_json e;
    e["scales"] = a.scales;
    e["projections"] = ordered_json::array();
    for (auto k : a.projections) e["projections"].push_back(std::string(name(k)));
    e["sphere_order"] = a.sphere_order;
    echo["analysis"] = e;
  }

  {
    Section s = top.child("balance");
    BalanceConfig& b = c.balance;
    b.ell = s.list<double>("ell");
    for (double l : b.ell) {
      if (!(l > 0.0 && l <= std::numbers::pi / 2 + 1e-15)) throw ConfigError("balance.ell", "scale must lie in (0, pi/2]");
    }
    b.projection = projection_from(s.get<std::string>("projection", "I"), "balance.projection");
    b.alpha = s.get<double>("alpha", b.alpha);
    if (!(b.alpha > 0.0 && b.alpha <= 1.0)) throw ConfigError("balance.alpha", "must lie in (0, 1]");
    s.finish();
    echo["balance"] = {{"ell", b.ell}, {"projection", std::string(name(b.projection))}, {"alpha", b.alpha}};
  }

  if (top.has("sweep")) {
    Section s = top.child("sweep");
    SweepConfig w;
    w.nu = s.list<double>("nu");
    if (w.nu.empty()) throw ConfigError("sweep.nu", "expected a nonempty list");
    require_decreasing(w.nu, "sweep.nu");
    if (!s.has("alpha")) throw ConfigError("sweep.alpha", "required key is missing (a number or 'measured')");
    const YAML::Node alpha = s.raw("alpha");
    if (alpha.IsScalar() && alpha.Scalar() == "measured") {
      w.alpha.reset();
    } else {
      w.alpha = convert<double>(alpha, "sweep.alpha");
    }
    w.L = s.require<double>("L");
    w.ell_I = s.list<double>("ell_I");
    if (w.ell_I.empty()) throw ConfigError("sweep.ell_I", "expected a nonempty list");
    require_decreasing(w.ell_I, "sweep.ell_I");
    if (w.ell_I.front() > std::numbers::pi / 2 + 1e-15) throw ConfigError("sweep.ell_I", "scales must lie in (0, pi/2]");
    w.p = s.get<double>("p", w.p);
    if (!(w.p >= 1.0)) throw ConfigError("sweep.p", "must be >= 1");
    w.uniform_in_time = s.get<bool>("uniform_in_time", false);
    w.projection = projection_from(s.get<std::string>("projection", "I"), "sweep.projection");
    s.finish();
    if (w.alpha) check_length_exponent(w.L, *w.alpha);
    else if (!(w.L > 0.0)) throw ConfigError("sweep.L", "must be > 0");
    ordered_json e;
    e["nu"] = w.nu;
    e["alpha"] = w.alpha ? ordered_json(*w.alpha) : ordered_json("measured");
    e["L"] = w.L;
    e["ell_I"] = w.ell_I;
    e["p"] = w.p;
    e["uniform_in_time"] = w.uniform_in_time;
    e["projection"] = std::string(name(w.projection));
    echo["sweep"] = e;
    c.sweep = w;
  } else {
    top.raw("sweep");
  }

  c.threads = top.get<int>("threads", 0);
  if (c.threads < 0) throw ConfigError("threads", "must be >= 0");
  top.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace kolmo::cli
