#include "kirchhoff/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kirchhoff {

namespace {

using nlohmann::json;

void require_known_keys(const json& obj, const std::string& path,
                        std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) { known = true; break; }
    if (!known)
      throw ConfigError(path.empty() ? item.key() : path + "." + item.key(),
                        "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path,
                         const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

NonlinearityConfig parse_nonlinearity(const json& obj) {
  if (!obj.is_object()) throw ConfigError("nonlinearity", "expected an object");
  // Reject keys foreign to every family first so a typo like "famly" is
  // named; the per-family checks below then reject mismatched parameters.
  require_known_keys(obj, "nonlinearity", {"family", "C1", "C2", "a", "alpha", "m0"});
  NonlinearityConfig out;
  out.family = get_string(obj, "nonlinearity", "family", "");
  if (out.family == "pokhozhaev") {
    require_known_keys(obj, "nonlinearity", {"family", "C1", "C2"});
    out.C1 = get_number(obj, "nonlinearity", "C1", 1.0);
    out.C2 = get_number(obj, "nonlinearity", "C2", 1.0);
    if (out.C1 == 0 && out.C2 == 0)
      throw ConfigError("nonlinearity", "C1, C2 must not both be zero");
  } else if (out.family == "affine_plus") {
    require_known_keys(obj, "nonlinearity", {"family", "a"});
    out.a = get_number(obj, "nonlinearity", "a", 1.0);
    if (!(out.a >= 0)) throw ConfigError("nonlinearity.a", "must be >= 0");
  } else if (out.family == "power_alpha") {
    require_known_keys(obj, "nonlinearity", {"family", "alpha"});
    out.alpha = get_number(obj, "nonlinearity", "alpha", 1.0);
    if (!(out.alpha > 0)) throw ConfigError("nonlinearity.alpha", "must be > 0");
  } else if (out.family == "constant") {
    require_known_keys(obj, "nonlinearity", {"family", "m0"});
    out.m0 = get_number(obj, "nonlinearity", "m0", 1.0);
    if (!(out.m0 > 0)) throw ConfigError("nonlinearity.m0", "must be > 0");
  } else if (out.family.empty()) {
    throw ConfigError("nonlinearity.family", "missing");
  } else {
    throw ConfigError("nonlinearity.family",
                      "unknown family '" + out.family +
                          "' (pokhozhaev|affine_plus|power_alpha|constant)");
  }
  return out;
}

InitialDataSpec parse_initial_data(const json& obj, std::uint64_t seed) {
  if (!obj.is_object()) throw ConfigError("initial_data", "expected an object");
  require_known_keys(obj, "initial_data", {"epsilon", "dim", "modes", "random"});
  InitialDataSpec out;
  out.epsilon = get_number(obj, "initial_data", "epsilon", 1.0);
  if (!(out.epsilon >= 0)) throw ConfigError("initial_data.epsilon", "must be >= 0");
  const int dim = static_cast<int>(get_integer(obj, "initial_data", "dim", 1));
  if (dim != 1 && dim != 2) throw ConfigError("initial_data.dim", "must be 1 or 2");

  const bool has_modes = obj.contains("modes");
  const bool has_random = obj.contains("random");
  if (has_modes == has_random)
    throw ConfigError("initial_data", "give exactly one of 'modes' or 'random'");

  if (has_modes) {
    const json& modes = obj.at("modes");
    if (!modes.is_array() || modes.empty())
      throw ConfigError("initial_data.modes", "expected a non-empty array");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::string path = "initial_data.modes[" + std::to_string(i) + "]";
      const json& m = modes.at(i);
      if (!m.is_object()) throw ConfigError(path, "expected an object");
      require_known_keys(m, path, {"k", "c", "v"});
      if (!m.contains("k") || !m.at("k").is_array())
        throw ConfigError(path + ".k", "expected an index array");
      const json& k = m.at("k");
      if (static_cast<int>(k.size()) != dim)
        throw ConfigError(path + ".k", "index length must match dim");
      for (const auto& ki : k)
        if (!ki.is_number_integer() || ki.get<int>() < 1)
          throw ConfigError(path + ".k", "indices must be integers >= 1");
      ExplicitMode em;
      em.k = dim == 1 ? ModeIndex(k.at(0).get<int>())
                      : ModeIndex(k.at(0).get<int>(), k.at(1).get<int>());
      em.c = get_number(m, path, "c", 0.0);
      em.v = get_number(m, path, "v", 0.0);
      if (!std::isfinite(em.c) || !std::isfinite(em.v))
        throw ConfigError(path, "coefficients must be finite");
      out.explicit_modes.push_back(em);
    }
  } else {
    const json& r = obj.at("random");
    if (!r.is_object()) throw ConfigError("initial_data.random", "expected an object");
    require_known_keys(r, "initial_data.random", {"cutoff", "decay"});
    RandomProfile rp;
    rp.seed = seed;
    rp.dim = dim;
    rp.cutoff = static_cast<int>(get_integer(r, "initial_data.random", "cutoff", 8));
    rp.decay = get_number(r, "initial_data.random", "decay", 2.0);
    if (rp.cutoff < 1) throw ConfigError("initial_data.random.cutoff", "must be >= 1");
    if (!(rp.decay > 1.0 + dim / 4.0))
      throw ConfigError("initial_data.random.decay",
                        "too small for H^2 data (need > 1 + dim/4)");
    out.random = rp;
  }
  return out;
}

IntegratorConfig parse_integrator(const json& obj) {
  if (!obj.is_object()) throw ConfigError("integrator", "expected an object");
  require_known_keys(obj, "integrator",
                     {"rel_tol", "abs_tol", "h_init", "h_max", "max_steps",
                      "method_order", "sample_stride", "dense_dt"});
  IntegratorConfig out;
  out.rel_tol = get_number(obj, "integrator", "rel_tol", out.rel_tol);
  out.abs_tol = get_number(obj, "integrator", "abs_tol", out.abs_tol);
  out.h_init = get_number(obj, "integrator", "h_init", out.h_init);
  out.h_max = get_number(obj, "integrator", "h_max", out.h_max);
  out.max_steps = get_integer(obj, "integrator", "max_steps", out.max_steps);
  out.method_order =
      static_cast<int>(get_integer(obj, "integrator", "method_order", 5));
  out.sample_stride =
      static_cast<int>(get_integer(obj, "integrator", "sample_stride", 1));
  out.dense_dt = get_number(obj, "integrator", "dense_dt", 0.0);
  if (!(out.rel_tol > 0)) throw ConfigError("integrator.rel_tol", "must be > 0");
  if (!(out.abs_tol > 0)) throw ConfigError("integrator.abs_tol", "must be > 0");
  if (!(out.h_init > 0)) throw ConfigError("integrator.h_init", "must be > 0");
  if (!(out.h_max > 0)) throw ConfigError("integrator.h_max", "must be > 0");
  if (out.max_steps <= 0) throw ConfigError("integrator.max_steps", "must be > 0");
  if (out.method_order < 5)
    throw ConfigError("integrator.method_order", "must be >= 5");
  if (out.method_order != 5)
    throw ConfigError("integrator.method_order",
                      "only the built-in 5(4) pair is available");
  if (out.sample_stride < 0)
    throw ConfigError("integrator.sample_stride", "must be >= 0");
  if (!(out.dense_dt >= 0)) throw ConfigError("integrator.dense_dt", "must be >= 0");
  return out;
}

ExperimentConfig parse_experiment(const json& obj) {
  if (!obj.is_object()) throw ConfigError("experiment", "expected an object");
  require_known_keys(obj, "experiment",
                     {"kind", "t_end", "tolerance", "eps_list", "kappa",
                      "cap_mult", "eps0", "grid", "fd_h"});
  ExperimentConfig out;
  if (obj.contains("kind")) {
    const std::string name = get_string(obj, "experiment", "kind", "");
    const auto kind = experiment_kind_from(name);
    if (!kind)
      throw ConfigError("experiment.kind", "unknown experiment '" + name + "'");
    out.kind = kind;
  }
  out.t_end = get_number(obj, "experiment", "t_end", out.t_end);
  if (!(out.t_end > 0)) throw ConfigError("experiment.t_end", "must be > 0");
  if (obj.contains("tolerance")) {
    out.tolerance = get_number(obj, "experiment", "tolerance", 0.0);
    if (!(*out.tolerance > 0)) throw ConfigError("experiment.tolerance", "must be > 0");
  }
  if (obj.contains("eps_list")) {
    const json& lst = obj.at("eps_list");
    if (!lst.is_array() || lst.empty())
      throw ConfigError("experiment.eps_list", "expected a non-empty array");
    for (const auto& e : lst) {
      if (!e.is_number()) throw ConfigError("experiment.eps_list", "expected numbers");
      out.eps_list.push_back(e.get<double>());
    }
    for (std::size_t i = 0; i + 1 < out.eps_list.size(); ++i)
      if (!(out.eps_list[i] > out.eps_list[i + 1]))
        throw ConfigError("experiment.eps_list", "must be strictly decreasing");
    if (!(out.eps_list.front() > 0))
      throw ConfigError("experiment.eps_list", "largest epsilon must be > 0");
    if (!(out.eps_list.back() >= 0))
      throw ConfigError("experiment.eps_list", "entries must be >= 0");
  }
  out.kappa = get_number(obj, "experiment", "kappa", out.kappa);
  if (!(out.kappa > 1)) throw ConfigError("experiment.kappa", "must be > 1");
  out.cap_mult = get_number(obj, "experiment", "cap_mult", out.cap_mult);
  if (!(out.cap_mult > 0)) throw ConfigError("experiment.cap_mult", "must be > 0");
  out.eps0 = get_number(obj, "experiment", "eps0", 0.0);
  if (obj.contains("grid")) {
    const json& g = obj.at("grid");
    if (!g.is_object()) throw ConfigError("experiment.grid", "expected an object");
    require_known_keys(g, "experiment.grid", {"lo", "hi", "step"});
    out.grid_lo = get_number(g, "experiment.grid", "lo", out.grid_lo);
    out.grid_hi = get_number(g, "experiment.grid", "hi", out.grid_hi);
    out.grid_step = get_number(g, "experiment.grid", "step", out.grid_step);
    if (!(out.grid_step > 0) || !(out.grid_hi >= out.grid_lo))
      throw ConfigError("experiment.grid", "need step > 0 and hi >= lo");
  }
  out.fd_h = get_number(obj, "experiment", "fd_h", out.fd_h);
  if (!(out.fd_h > 0)) throw ConfigError("experiment.fd_h", "must be > 0");
  return out;
}

OutputConfig parse_output(const json& obj) {
  if (!obj.is_object()) throw ConfigError("output", "expected an object");
  require_known_keys(obj, "output", {"csv", "verdict"});
  OutputConfig out;
  out.csv_path = get_string(obj, "output", "csv", "");
  out.verdict_path = get_string(obj, "output", "verdict", "");
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::first_order: return "first-order";
    case ExperimentKind::pokhozhaev: return "pokhozhaev";
    case ExperimentKind::identity: return "identity";
    case ExperimentKind::zero_crossing: return "zero-crossing";
    case ExperimentKind::gronwall: return "gronwall";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::check_derivs: return "check-derivs";
  }
  return "?";
}

std::optional<ExperimentKind> experiment_kind_from(std::string_view name) {
  for (ExperimentKind k :
       {ExperimentKind::simulate, ExperimentKind::first_order,
        ExperimentKind::pokhozhaev, ExperimentKind::identity,
        ExperimentKind::zero_crossing, ExperimentKind::gronwall,
        ExperimentKind::sweep, ExperimentKind::check_derivs})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

double default_tolerance(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::first_order: return 1e-8;
    case ExperimentKind::pokhozhaev: return 1e-6;
    case ExperimentKind::identity: return 1e-6;
    case ExperimentKind::zero_crossing: return 1e-6;
    case ExperimentKind::gronwall: return 1e-9;
    case ExperimentKind::check_derivs: return 1e-6;
    default: return 1e-6;
  }
}

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("top-level document must be an object");
  require_known_keys(doc, "",
                     {"nonlinearity", "initial_data", "integrator", "experiment",
                      "output", "seed"});
  if (!doc.contains("nonlinearity")) throw ConfigError("nonlinearity", "missing section");
  if (!doc.contains("initial_data")) throw ConfigError("initial_data", "missing section");

  RunConfig cfg;
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer())
      throw ConfigError("seed", "expected a non-negative integer");
    if (s.is_number_integer() && s.get<std::int64_t>() < 0)
      throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.nonlinearity = parse_nonlinearity(doc.at("nonlinearity"));
  cfg.initial_data = parse_initial_data(doc.at("initial_data"), cfg.seed);
  if (doc.contains("integrator")) cfg.integrator = parse_integrator(doc.at("integrator"));
  if (doc.contains("experiment")) cfg.experiment = parse_experiment(doc.at("experiment"));
  if (doc.contains("output")) cfg.output = parse_output(doc.at("output"));

  make_nonlinearity(cfg.nonlinearity);  // validates parameters eagerly
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Nonlinearity make_nonlinearity(const NonlinearityConfig& cfg) {
  try {
    if (cfg.family == "pokhozhaev") return Nonlinearity::pokhozhaev(cfg.C1, cfg.C2);
    if (cfg.family == "affine_plus") return Nonlinearity::affine_plus(cfg.a);
    if (cfg.family == "power_alpha") return Nonlinearity::power_alpha(cfg.alpha);
    if (cfg.family == "constant") return Nonlinearity::constant(cfg.m0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("nonlinearity", e.what());
  }
  throw ConfigError("nonlinearity.family", "unknown family '" + cfg.family + "'");
}

std::string resolved_config_json(const RunConfig& cfg) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json nl;
  nl["family"] = cfg.nonlinearity.family;
  if (cfg.nonlinearity.family == "pokhozhaev") {
    nl["C1"] = cfg.nonlinearity.C1;
    nl["C2"] = cfg.nonlinearity.C2;
  } else if (cfg.nonlinearity.family == "affine_plus") {
    nl["a"] = cfg.nonlinearity.a;
  } else if (cfg.nonlinearity.family == "power_alpha") {
    nl["alpha"] = cfg.nonlinearity.alpha;
  } else if (cfg.nonlinearity.family == "constant") {
    nl["m0"] = cfg.nonlinearity.m0;
  }
  doc["nonlinearity"] = nl;

  nlohmann::ordered_json data;
  data["epsilon"] = cfg.initial_data.epsilon;
  if (cfg.initial_data.random) {
    data["dim"] = cfg.initial_data.random->dim;
    nlohmann::ordered_json rnd;
    rnd["cutoff"] = cfg.initial_data.random->cutoff;
    rnd["decay"] = cfg.initial_data.random->decay;
    data["random"] = rnd;
  } else {
    nlohmann::ordered_json modes = nlohmann::ordered_json::array();
    for (const auto& em : cfg.initial_data.explicit_modes) {
      nlohmann::ordered_json m;
      nlohmann::ordered_json k = nlohmann::ordered_json::array();
      for (int d = 0; d < em.k.dim; ++d) k.push_back(em.k.k[d]);
      m["k"] = k;
      m["c"] = em.c;
      m["v"] = em.v;
      modes.push_back(m);
    }
    if (!cfg.initial_data.explicit_modes.empty())
      data["dim"] = cfg.initial_data.explicit_modes.front().k.dim;
    data["modes"] = modes;
  }
  doc["initial_data"] = data;

  nlohmann::ordered_json integ;
  integ["rel_tol"] = cfg.integrator.rel_tol;
  integ["abs_tol"] = cfg.integrator.abs_tol;
  integ["h_init"] = cfg.integrator.h_init;
  if (std::isfinite(cfg.integrator.h_max)) integ["h_max"] = cfg.integrator.h_max;
  integ["max_steps"] = cfg.integrator.max_steps;
  integ["method_order"] = cfg.integrator.method_order;
  integ["sample_stride"] = cfg.integrator.sample_stride;
  integ["dense_dt"] = cfg.integrator.dense_dt;
  doc["integrator"] = integ;

  nlohmann::ordered_json exp;
  if (cfg.experiment.kind) exp["kind"] = to_string(*cfg.experiment.kind);
  exp["t_end"] = cfg.experiment.t_end;
  if (cfg.experiment.tolerance) exp["tolerance"] = *cfg.experiment.tolerance;
  if (!cfg.experiment.eps_list.empty()) {
    exp["eps_list"] = cfg.experiment.eps_list;
    exp["kappa"] = cfg.experiment.kappa;
    exp["cap_mult"] = cfg.experiment.cap_mult;
    if (cfg.experiment.eps0 > 0) exp["eps0"] = cfg.experiment.eps0;
  }
  nlohmann::ordered_json grid;
  grid["lo"] = cfg.experiment.grid_lo;
  grid["hi"] = cfg.experiment.grid_hi;
  grid["step"] = cfg.experiment.grid_step;
  exp["grid"] = grid;
  exp["fd_h"] = cfg.experiment.fd_h;
  doc["experiment"] = exp;

  nlohmann::ordered_json out;
  out["csv"] = cfg.output.csv_path;
  out["verdict"] = cfg.output.verdict_path;
  doc["output"] = out;
  doc["seed"] = cfg.seed;
  return doc.dump(2);
}

}  // namespace kirchhoff
