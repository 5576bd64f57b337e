// Copyright 2026 The trajopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "app/config.hpp"

#include <algorithm>
#include <initializer_list>

#include <nlohmann/json.hpp>

#include <trajopt/io.hpp>

namespace trajopt::app {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Preset table. Every optimiser number of the reference experiment lives here.

struct PresetEntry {
  const char* name;
  Preset values;
};

const std::vector<PresetEntry>& preset_table() {
  static const std::vector<PresetEntry> table = {
      {"A", {1.0, UpdateMask{true, false, false}, 0.0}},
      {"B", {0.0, UpdateMask{true, false, true}, 0.0}},
      {"C", {0.95, UpdateMask{true, false, true}, 0.0}},
      {"custom", {}},
  };
  return table;
}

Vector default_bowl_target() { return (Vector(5) << 1.0, -1.0, 0.5, 2.0, -0.5).finished(); }

// ---------------------------------------------------------------------------
// JSON reading with field paths.

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const json& node, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : node.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(join(path, item.key()), "unknown field");
  }
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long long>();
}

int as_int(const json& v, const std::string& path) {
  const long long x = as_integer(v, path);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(path, "integer out of range");
  return static_cast<int>(x);
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = as_double(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

std::vector<double> as_double_list(const json& v, const std::string& path) {
  const Vector x = as_vector(v, path);
  return {x.data(), x.data() + x.size()};
}

Eigen::Vector2d as_point(const json& v, const std::string& path) {
  const Vector x = as_vector(v, path);
  if (x.size() != 2) throw ConfigError(path, "expected two coordinates");
  return x;
}

template <typename Fn>
void field(const json& node, const std::string& path, const char* key, Fn&& assign) {
  if (auto it = node.find(key); it != node.end()) assign(*it, join(path, key));
}

void read_mask(const json& node, const std::string& path, UpdateMask& mask) {
  require_object(node, path);
  reject_unknown(node, path, {"feedforward", "gain", "covariance"});
  field(node, path, "feedforward", [&](const json& v, const std::string& p) { mask.feedforward = as_bool(v, p); });
  field(node, path, "gain", [&](const json& v, const std::string& p) { mask.gain = as_bool(v, p); });
  field(node, path, "covariance", [&](const json& v, const std::string& p) { mask.covariance = as_bool(v, p); });
}

void read_arm(const json& node, const std::string& path, ArmParams& arm) {
  reject_unknown(node, path,
                 {"name", "link_lengths", "masses", "dt", "horizon", "obstacle", "contact_epsilon",
                  "costs", "initial_q", "initial_qdot"});
  field(node, path, "link_lengths", [&](const json& v, const std::string& p) { arm.link_lengths = as_double_list(v, p); });
  field(node, path, "masses", [&](const json& v, const std::string& p) { arm.masses = as_double_list(v, p); });
  field(node, path, "dt", [&](const json& v, const std::string& p) { arm.dt = as_double(v, p); });
  field(node, path, "horizon", [&](const json& v, const std::string& p) { arm.horizon = as_int(v, p); });
  field(node, path, "contact_epsilon", [&](const json& v, const std::string& p) { arm.contact_epsilon = as_double(v, p); });
  field(node, path, "initial_q", [&](const json& v, const std::string& p) { arm.initial_q = as_vector(v, p); });
  field(node, path, "initial_qdot", [&](const json& v, const std::string& p) { arm.initial_qdot = as_vector(v, p); });
  field(node, path, "obstacle", [&](const json& v, const std::string& p) {
    if (v.is_null()) {
      arm.obstacle.reset();
      return;
    }
    require_object(v, p);
    reject_unknown(v, p, {"center", "radius"});
    Obstacle obstacle = arm.obstacle.value_or(Obstacle{});
    field(v, p, "center", [&](const json& c, const std::string& cp) { obstacle.center = as_point(c, cp); });
    field(v, p, "radius", [&](const json& r, const std::string& rp) { obstacle.radius = as_double(r, rp); });
    arm.obstacle = obstacle;
  });
  field(node, path, "costs", [&](const json& v, const std::string& p) {
    require_object(v, p);
    reject_unknown(v, p,
                   {"torque_weight", "velocity_weight", "posture_weight", "terminal_log_weight",
                    "terminal_log_offset", "terminal_quadratic_weight", "goal"});
    ArmCostParams& c = arm.costs;
    field(v, p, "torque_weight", [&](const json& x, const std::string& xp) { c.torque_weight = as_double(x, xp); });
    field(v, p, "velocity_weight", [&](const json& x, const std::string& xp) { c.velocity_weight = as_double(x, xp); });
    field(v, p, "posture_weight", [&](const json& x, const std::string& xp) { c.posture_weight = as_double(x, xp); });
    field(v, p, "terminal_log_weight", [&](const json& x, const std::string& xp) { c.terminal_log_weight = as_double(x, xp); });
    field(v, p, "terminal_log_offset", [&](const json& x, const std::string& xp) { c.terminal_log_offset = as_double(x, xp); });
    field(v, p, "terminal_quadratic_weight", [&](const json& x, const std::string& xp) { c.terminal_quadratic_weight = as_double(x, xp); });
    field(v, p, "goal", [&](const json& x, const std::string& xp) { c.goal = as_point(x, xp); });
  });
}

void read_double_integrator(const json& node, const std::string& path, DoubleIntegratorParams& di) {
  reject_unknown(node, path,
                 {"name", "horizon", "dt", "goal", "position_weight", "velocity_weight",
                  "action_weight", "terminal_position_weight", "terminal_velocity_weight",
                  "initial_position", "initial_velocity"});
  field(node, path, "horizon", [&](const json& v, const std::string& p) { di.horizon = as_int(v, p); });
  field(node, path, "dt", [&](const json& v, const std::string& p) { di.dt = as_double(v, p); });
  field(node, path, "goal", [&](const json& v, const std::string& p) { di.goal = as_double(v, p); });
  field(node, path, "position_weight", [&](const json& v, const std::string& p) { di.position_weight = as_double(v, p); });
  field(node, path, "velocity_weight", [&](const json& v, const std::string& p) { di.velocity_weight = as_double(v, p); });
  field(node, path, "action_weight", [&](const json& v, const std::string& p) { di.action_weight = as_double(v, p); });
  field(node, path, "terminal_position_weight", [&](const json& v, const std::string& p) { di.terminal_position_weight = as_double(v, p); });
  field(node, path, "terminal_velocity_weight", [&](const json& v, const std::string& p) { di.terminal_velocity_weight = as_double(v, p); });
  field(node, path, "initial_position", [&](const json& v, const std::string& p) { di.initial_position = as_double(v, p); });
  field(node, path, "initial_velocity", [&](const json& v, const std::string& p) { di.initial_velocity = as_double(v, p); });
}

void read_env(const json& node, const std::string& path, EnvConfig& env) {
  require_object(node, path);
  field(node, path, "name", [&](const json& v, const std::string& p) { env.name = as_string(v, p); });
  if (env.name == "arm") {
    read_arm(node, path, env.arm);
  } else if (env.name == "double_integrator") {
    read_double_integrator(node, path, env.double_integrator);
  } else if (env.name == "bowl") {
    reject_unknown(node, path, {"name", "target"});
    field(node, path, "target", [&](const json& v, const std::string& p) { env.bowl_target = as_vector(v, p); });
  } else {
    throw ConfigError(join(path, "name"), "unknown environment '" + env.name +
                                              "' (expected arm, double_integrator or bowl)");
  }
}

void read_optimizer(const json& node, const std::string& path, OptimizerConfig& o) {
  require_object(node, path);
  reject_unknown(node, path,
                 {"lambda", "alpha", "beta", "samples", "generations", "poly_degree", "fixed_gain",
                  "update", "time_indexed_weights", "threads", "initial_feedforward",
                  "initial_variance", "noise_variance", "repair", "early_stop",
                  "checkpoint_interval"});
  field(node, path, "lambda", [&](const json& v, const std::string& p) { o.lambda = as_double(v, p); });
  field(node, path, "alpha", [&](const json& v, const std::string& p) { o.alpha = as_double(v, p); });
  field(node, path, "beta", [&](const json& v, const std::string& p) { o.beta = as_double(v, p); });
  field(node, path, "samples", [&](const json& v, const std::string& p) { o.samples = as_int(v, p); });
  field(node, path, "generations", [&](const json& v, const std::string& p) { o.generations = as_int(v, p); });
  field(node, path, "poly_degree", [&](const json& v, const std::string& p) {
    if (v.is_null()) {
      o.poly_degree.reset();
    } else {
      o.poly_degree = as_int(v, p);
    }
  });
  field(node, path, "fixed_gain", [&](const json& v, const std::string& p) { o.fixed_gain = as_double(v, p); });
  field(node, path, "update", [&](const json& v, const std::string& p) { read_mask(v, p, o.update); });
  field(node, path, "time_indexed_weights", [&](const json& v, const std::string& p) { o.time_indexed_weights = as_bool(v, p); });
  field(node, path, "threads", [&](const json& v, const std::string& p) { o.threads = as_int(v, p); });
  field(node, path, "initial_feedforward", [&](const json& v, const std::string& p) { o.initial_feedforward = as_double(v, p); });
  field(node, path, "initial_variance", [&](const json& v, const std::string& p) { o.initial_variance = as_double(v, p); });
  field(node, path, "noise_variance", [&](const json& v, const std::string& p) { o.noise_variance = as_double(v, p); });
  field(node, path, "checkpoint_interval", [&](const json& v, const std::string& p) { o.checkpoint_interval = as_int(v, p); });
  field(node, path, "repair", [&](const json& v, const std::string& p) {
    require_object(v, p);
    reject_unknown(v, p, {"floor", "initial_shift", "growth"});
    field(v, p, "floor", [&](const json& x, const std::string& xp) { o.repair.floor = as_double(x, xp); });
    field(v, p, "initial_shift", [&](const json& x, const std::string& xp) { o.repair.initial_shift = as_double(x, xp); });
    field(v, p, "growth", [&](const json& x, const std::string& xp) { o.repair.growth = as_double(x, xp); });
  });
  field(node, path, "early_stop", [&](const json& v, const std::string& p) {
    require_object(v, p);
    reject_unknown(v, p, {"entropy_floor", "plateau_window", "plateau_tolerance"});
    EarlyStop& e = o.early_stop;
    field(v, p, "entropy_floor", [&](const json& x, const std::string& xp) {
      if (x.is_null()) {
        e.entropy_floor.reset();
      } else {
        e.entropy_floor = as_double(x, xp);
      }
    });
    field(v, p, "plateau_window", [&](const json& x, const std::string& xp) {
      if (x.is_null()) {
        e.plateau_window.reset();
      } else {
        e.plateau_window = as_int(x, xp);
      }
    });
    field(v, p, "plateau_tolerance", [&](const json& x, const std::string& xp) { e.plateau_tolerance = as_double(x, xp); });
  });
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

OptimizerConfig default_optimizer() {
  OptimizerConfig o;
  o.lambda = 0.2;
  o.alpha = 0.95;
  o.beta = 0.1;
  o.samples = 200;
  o.generations = 200;
  o.poly_degree = 3;
  o.fixed_gain = 0.0;
  o.update = UpdateMask{true, false, true};
  o.time_indexed_weights = true;
  o.threads = 1;
  o.initial_feedforward = 0.5;
  o.initial_variance = 0.1;
  o.noise_variance = 0.1;
  return o;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : preset_table()) out.emplace_back(entry.name);
    return out;
  }();
  return names;
}

Preset preset(const std::string& name) {
  for (const auto& entry : preset_table()) {
    if (name == entry.name) return entry.values;
  }
  throw ConfigError("algorithm.preset", "unknown preset '" + name + "' (expected A, B, C or custom)");
}

void apply_preset(ExperimentConfig& config) {
  const Preset p = preset(config.preset);
  if (p.alpha) config.optimizer.alpha = *p.alpha;
  if (p.update) config.optimizer.update = *p.update;
  if (p.fixed_gain) config.optimizer.fixed_gain = *p.fixed_gain;
}

ExperimentConfig default_config(const std::string& preset_name) {
  ExperimentConfig config;
  config.preset = preset_name;
  config.optimizer = default_optimizer();
  config.env.bowl_target = default_bowl_target();
  config.seeds = {0};
  apply_preset(config);
  return config;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  require_object(doc, "");
  reject_unknown(doc, "", {"algorithm", "env", "optimizer", "output", "seeds"});

  ExperimentConfig config = default_config("custom");
  config.preset = "C";
  field(doc, "", "algorithm", [&](const json& v, const std::string& p) {
    require_object(v, p);
    reject_unknown(v, p, {"name", "preset"});
    field(v, p, "name", [&](const json& x, const std::string& xp) { config.algorithm = as_string(x, xp); });
    field(v, p, "preset", [&](const json& x, const std::string& xp) { config.preset = as_string(x, xp); });
  });
  field(doc, "", "env", [&](const json& v, const std::string& p) { read_env(v, p, config.env); });
  field(doc, "", "optimizer", [&](const json& v, const std::string& p) { read_optimizer(v, p, config.optimizer); });
  field(doc, "", "output", [&](const json& v, const std::string& p) {
    require_object(v, p);
    reject_unknown(v, p, {"dir", "dump_batches"});
    field(v, p, "dir", [&](const json& x, const std::string& xp) { config.output.dir = as_string(x, xp); });
    field(v, p, "dump_batches", [&](const json& x, const std::string& xp) { config.output.dump_batches = as_bool(x, xp); });
  });
  field(doc, "", "seeds", [&](const json& v, const std::string& p) {
    if (!v.is_array()) throw ConfigError(p, "expected an array of nonnegative integers");
    config.seeds.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string ip = p + "[" + std::to_string(i) + "]";
      const long long s = as_integer(v[i], ip);
      if (s < 0) throw ConfigError(ip, "seed must be nonnegative");
      config.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  });
  apply_preset(config);
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(text);
}

std::string config_to_json(const ExperimentConfig& config) {
  json env;
  env["name"] = config.env.name;
  if (config.env.name == "arm") {
    const ArmParams& a = config.env.arm;
    env["link_lengths"] = a.link_lengths;
    env["masses"] = a.masses;
    env["dt"] = a.dt;
    env["horizon"] = a.horizon;
    env["obstacle"] = a.obstacle ? json{{"center", {a.obstacle->center.x(), a.obstacle->center.y()}},
                                        {"radius", a.obstacle->radius}}
                                 : json(nullptr);
    env["contact_epsilon"] = a.contact_epsilon;
    env["costs"] = {{"torque_weight", a.costs.torque_weight},
                    {"velocity_weight", a.costs.velocity_weight},
                    {"posture_weight", a.costs.posture_weight},
                    {"terminal_log_weight", a.costs.terminal_log_weight},
                    {"terminal_log_offset", a.costs.terminal_log_offset},
                    {"terminal_quadratic_weight", a.costs.terminal_quadratic_weight},
                    {"goal", {a.costs.goal.x(), a.costs.goal.y()}}};
    env["initial_q"] = vector_json(a.initial_q);
    env["initial_qdot"] = vector_json(a.initial_qdot);
  } else if (config.env.name == "double_integrator") {
    const DoubleIntegratorParams& d = config.env.double_integrator;
    env["horizon"] = d.horizon;
    env["dt"] = d.dt;
    env["goal"] = d.goal;
    env["position_weight"] = d.position_weight;
    env["velocity_weight"] = d.velocity_weight;
    env["action_weight"] = d.action_weight;
    env["terminal_position_weight"] = d.terminal_position_weight;
    env["terminal_velocity_weight"] = d.terminal_velocity_weight;
    env["initial_position"] = d.initial_position;
    env["initial_velocity"] = d.initial_velocity;
  } else {
    env["target"] = vector_json(config.env.bowl_target);
  }

  const OptimizerConfig& o = config.optimizer;
  json optimizer = {
      {"lambda", o.lambda},
      {"alpha", o.alpha},
      {"beta", o.beta},
      {"samples", o.samples},
      {"generations", o.generations},
      {"poly_degree", optional_json(o.poly_degree)},
      {"fixed_gain", o.fixed_gain},
      {"update",
       {{"feedforward", o.update.feedforward},
        {"gain", o.update.gain},
        {"covariance", o.update.covariance}}},
      {"time_indexed_weights", o.time_indexed_weights},
      {"threads", o.threads},
      {"initial_feedforward", o.initial_feedforward},
      {"initial_variance", o.initial_variance},
      {"noise_variance", o.noise_variance},
      {"repair",
       {{"floor", o.repair.floor},
        {"initial_shift", o.repair.initial_shift},
        {"growth", o.repair.growth}}},
      {"early_stop",
       {{"entropy_floor", optional_json(o.early_stop.entropy_floor)},
        {"plateau_window", optional_json(o.early_stop.plateau_window)},
        {"plateau_tolerance", o.early_stop.plateau_tolerance}}},
      {"checkpoint_interval", o.checkpoint_interval},
  };

  json doc = {
      {"algorithm", {{"name", config.algorithm}, {"preset", config.preset}}},
      {"env", env},
      {"optimizer", optimizer},
      {"output", {{"dir", config.output.dir.string()}, {"dump_batches", config.output.dump_batches}}},
      {"seeds", config.seeds},
  };
  return doc.dump(2) + "\n";
}

void validate(const ExperimentConfig& config) {
  const std::string& a = config.algorithm;
  if (a != "emppi" && a != "mppi" && a != "search") {
    throw ConfigError("algorithm.name", "unknown algorithm '" + a + "' (expected emppi, mppi or search)");
  }
  preset(config.preset);
  const std::string& e = config.env.name;
  if (e == "bowl" && a != "search") {
    throw ConfigError("env.name", "the bowl objective is static and needs algorithm search");
  }
  if (e == "bowl" && config.env.bowl_target.size() == 0) {
    throw ConfigError("env.target", "target must not be empty");
  }
  try {
    if (e == "arm") config.env.arm.validate();
    if (e == "double_integrator") config.env.double_integrator.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError("env", err.what());
  }

  const OptimizerConfig& o = config.optimizer;
  if (!(o.lambda > 0.0)) throw ConfigError("optimizer.lambda", "must be positive");
  if (!(o.alpha >= 0.0 && o.alpha <= 1.0)) throw ConfigError("optimizer.alpha", "must lie in [0, 1]");
  if (!(o.beta > 0.0 && o.beta <= 1.0)) throw ConfigError("optimizer.beta", "must lie in (0, 1]");
  if (o.samples < 2) throw ConfigError("optimizer.samples", "must be at least 2");
  if (o.generations < 0) throw ConfigError("optimizer.generations", "must be nonnegative");
  if (o.threads < 1) throw ConfigError("optimizer.threads", "must be at least 1");
  if (!(o.initial_variance > 0.0)) throw ConfigError("optimizer.initial_variance", "must be positive");
  if (!(o.noise_variance > 0.0)) throw ConfigError("optimizer.noise_variance", "must be positive");
  if (o.checkpoint_interval < 0) throw ConfigError("optimizer.checkpoint_interval", "must be nonnegative");
  if (!(o.repair.floor > 0.0)) throw ConfigError("optimizer.repair.floor", "must be positive");
  if (!(o.repair.initial_shift > 0.0)) throw ConfigError("optimizer.repair.initial_shift", "must be positive");
  if (!(o.repair.growth > 1.0)) throw ConfigError("optimizer.repair.growth", "must exceed 1");
  if (o.early_stop.plateau_window && *o.early_stop.plateau_window < 1) {
    throw ConfigError("optimizer.early_stop.plateau_window", "must be positive");
  }
  if (o.poly_degree && e != "bowl") {
    const int horizon = e == "arm" ? config.env.arm.horizon : config.env.double_integrator.horizon;
    if (*o.poly_degree < 0 || *o.poly_degree >= horizon) {
      throw ConfigError("optimizer.poly_degree", "must lie in [0, horizon)");
    }
  }
  if (config.seeds.empty()) throw ConfigError("seeds", "at least one seed required");
}

EmppiConfig emppi_config(const ExperimentConfig& config, std::uint64_t seed) {
  const OptimizerConfig& o = config.optimizer;
  EmppiConfig c;
  c.lambda = o.lambda;
  c.alpha = o.alpha;
  c.beta = o.beta;
  c.samples = o.samples;
  c.generations = o.generations;
  c.poly_degree = o.poly_degree;
  c.mask = o.update;
  c.time_indexed_weights = o.time_indexed_weights;
  c.seed = seed;
  c.threads = o.threads;
  c.repair = o.repair;
  if (o.fixed_gain != 0.0) {
    const int ns = config.env.name == "arm" ? 2 * config.env.arm.links() : 2;
    const int na = config.env.name == "arm" ? config.env.arm.links() : 1;
    c.fixed_gain = Matrix::Constant(na, ns, o.fixed_gain);
  }
  return c;
}

MppiConfig mppi_config(const ExperimentConfig& config, std::uint64_t seed) {
  const OptimizerConfig& o = config.optimizer;
  MppiConfig c;
  c.lambda = o.lambda;
  const int na = config.env.name == "arm" ? config.env.arm.links() : 1;
  c.noise_covariance = o.noise_variance * Matrix::Identity(na, na);
  c.samples = o.samples;
  c.generations = o.generations;
  c.time_indexed_weights = o.time_indexed_weights;
  c.seed = seed;
  c.threads = o.threads;
  return c;
}

SearchConfig search_config(const ExperimentConfig& config, std::uint64_t seed) {
  const OptimizerConfig& o = config.optimizer;
  SearchConfig c;
  c.lambda = o.lambda;
  c.alpha = o.alpha;
  c.samples = o.samples;
  c.iterations = o.generations;
  c.seed = seed;
  c.repair = o.repair;
  return c;
}

}  // namespace trajopt::app
