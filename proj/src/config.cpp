#include "cbfcert/config.hpp"

#include "cbfcert/errors.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

namespace cbfcert {

using nlohmann::json;

void ToolConfig::validate() const {
  experiment.validate();
  if (table1_noise_bounds.empty()) throw ConfigError("table1_noise_bounds must not be empty");
  for (double w : table1_noise_bounds)
    if (!(std::isfinite(w) && w >= 0.0)) throw ConfigError("table1_noise_bounds entries must be finite and >= 0");
  if (table1_agent_counts.empty()) throw ConfigError("table1_agent_counts must not be empty");
  for (auto n : table1_agent_counts)
    if (n < 2) throw ConfigError("table1_agent_counts entries must be >= 2");
  if (psi_grid.empty()) throw ConfigError("psi_grid must not be empty");
  for (double p : psi_grid)
    if (!(std::isfinite(p) && p >= 0.0)) throw ConfigError("psi_grid entries must be finite and >= 0");
  if (psi_sweep_rollouts < 2) throw ConfigError("psi_sweep_rollouts must be >= 2");
}

namespace {

enum class Kind { integer, number, boolean, choice, number_array, integer_array };

struct Field {
  std::string key;
  Kind kind;
  std::string description;
  std::function<json(const ToolConfig&)> get;
  std::function<void(ToolConfig&, const json&)> set;
  std::optional<double> minimum;
  std::optional<double> exclusive_minimum;
  std::optional<double> maximum;
  std::optional<double> exclusive_maximum;
  std::vector<std::string> choices;
};

template <class Access>
Field field(std::string key, Kind kind, std::string description, Access access) {
  Field f;
  f.key = std::move(key);
  f.kind = kind;
  f.description = std::move(description);
  f.get = [access](const ToolConfig& c) { return json(access(const_cast<ToolConfig&>(c))); };
  f.set = [access](ToolConfig& c, const json& v) {
    auto& target = access(c);
    target = v.get<std::remove_reference_t<decltype(target)>>();
  };
  return f;
}

Field with_min(Field f, double lo) { f.minimum = lo; return f; }
Field with_xmin(Field f, double lo) { f.exclusive_minimum = lo; return f; }
Field with_xrange(Field f, double lo, double hi) {
  f.exclusive_minimum = lo;
  f.exclusive_maximum = hi;
  return f;
}

template <class Enum>
Field choice_field(std::string key, std::string description, std::vector<std::pair<std::string, Enum>> options,
                   std::function<Enum&(ToolConfig&)> access) {
  Field f;
  f.key = std::move(key);
  f.kind = Kind::choice;
  f.description = std::move(description);
  for (const auto& [name, _] : options) f.choices.push_back(name);
  f.get = [options, access](const ToolConfig& c) {
    const Enum value = access(const_cast<ToolConfig&>(c));
    for (const auto& [name, e] : options)
      if (e == value) return json(name);
    return json(nullptr);
  };
  f.set = [options, access](ToolConfig& c, const json& v) {
    const auto name = v.get<std::string>();
    for (const auto& [n, e] : options)
      if (n == name) access(c) = e;
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    // System
    t.push_back(with_min(field("n_agents", Kind::integer, "number of agents N",
                               [](ToolConfig& c) -> std::size_t& { return c.experiment.system.n_agents; }), 2));
    t.push_back(with_min(field("state_dim", Kind::integer, "state dimension n per agent",
                               [](ToolConfig& c) -> std::size_t& { return c.experiment.system.state_dim; }), 1));
    t.push_back(with_min(field("control_dim", Kind::integer, "control dimension m per agent",
                               [](ToolConfig& c) -> std::size_t& { return c.experiment.system.control_dim; }), 1));
    t.push_back(with_min(field("noise_bound", Kind::number, "per-agent disturbance norm bound w_bar",
                               [](ToolConfig& c) -> double& { return c.experiment.system.noise_bound; }), 0.0));
    t.push_back(with_xmin(field("dt", Kind::number, "explicit Euler step (s)",
                                [](ToolConfig& c) -> double& { return c.experiment.system.dt; }), 0.0));
    t.push_back(with_min(field("horizon_steps", Kind::integer, "integration steps per rollout",
                               [](ToolConfig& c) -> std::size_t& { return c.experiment.system.horizon_steps; }), 1));
    t.push_back(with_xmin(field("domain_half_width", Kind::number, "side length L of the initial-position square [0, L]^2",
                                [](ToolConfig& c) -> double& { return c.experiment.system.domain_half_width; }), 0.0));
    t.push_back(with_min(field("min_initial_separation", Kind::number, "minimum pairwise distance of initial positions",
                               [](ToolConfig& c) -> double& { return c.experiment.system.min_initial_separation; }), 0.0));
    t.push_back(choice_field<DynamicsModel>(
        "dynamics", "agent dynamics model",
        {{"single_integrator", DynamicsModel::single_integrator}, {"double_integrator", DynamicsModel::double_integrator}},
        [](ToolConfig& c) -> DynamicsModel& { return c.experiment.system.dynamics; }));
    t.push_back(choice_field<NoiseDistribution>(
        "noise_distribution", "disturbance law inside the norm bound",
        {{"ball", NoiseDistribution::ball}, {"sphere", NoiseDistribution::sphere}},
        [](ToolConfig& c) -> NoiseDistribution& { return c.experiment.system.noise; }));
    // Safety
    t.push_back(with_min(field("psi", Kind::number, "amplitude weight of the propagation term",
                               [](ToolConfig& c) -> double& { return c.experiment.safety.psi; }), 0.0));
    t.push_back(with_xmin(field("reg_eps", Kind::number, "regulariser in the propagation vector denominator",
                                [](ToolConfig& c) -> double& { return c.experiment.safety.reg_eps; }), 0.0));
    t.push_back(with_xmin(field("d_min", Kind::number, "minimum separation radius",
                                [](ToolConfig& c) -> double& { return c.experiment.safety.d_min; }), 0.0));
    t.push_back(with_xmin(field("kappa", Kind::number, "linear class-K gain",
                                [](ToolConfig& c) -> double& { return c.experiment.safety.kappa; }), 0.0));
    t.push_back(field("robust_margin_enabled", Kind::boolean, "add the disturbance margin 2 w_bar |grad h| to each constraint",
                      [](ToolConfig& c) -> bool& { return c.experiment.safety.robust_margin_enabled; }));
    // Controller
    t.push_back(field("freeze_adot", Kind::boolean, "evaluate dA/dt at the previous control and fold it into the constraint",
                      [](ToolConfig& c) -> bool& { return c.experiment.controller.freeze_adot; }));
    t.push_back(with_min(field("control_bound", Kind::number, "box bound on each control coordinate (0 = none)",
                               [](ToolConfig& c) -> double& { return c.experiment.controller.control_bound; }), 0.0));
    t.push_back(with_xmin(field("qp_tol", Kind::number, "QP primal feasibility tolerance",
                                [](ToolConfig& c) -> double& { return c.experiment.controller.qp.tol; }), 0.0));
    t.push_back(with_xmin(field("qp_tol_active", Kind::number, "QP active-set reporting tolerance",
                                [](ToolConfig& c) -> double& { return c.experiment.controller.qp.tol_active; }), 0.0));
    t.push_back(with_xmin(field("relax_rho", Kind::number, "slack weight used when the QP is infeasible",
                                [](ToolConfig& c) -> double& { return c.experiment.controller.qp.relax_rho; }), 0.0));
    // Experiment
    t.push_back(with_min(field("groups", Kind::integer, "independent rollout groups",
                               [](ToolConfig& c) -> std::size_t& { return c.experiment.groups; }), 0));
    t.push_back(with_min(field("rollouts_per_group", Kind::integer, "rollouts P per group",
                               [](ToolConfig& c) -> std::size_t& { return c.experiment.rollouts_per_group; }), 2));
    t.push_back(with_xrange(field("theta", Kind::number, "violation threshold on the normalised margin score",
                                  [](ToolConfig& c) -> double& { return c.experiment.theta; }), 0.0, 1.0));
    t.push_back(with_xrange(field("delta", Kind::number, "confidence parameter of the bounds",
                                  [](ToolConfig& c) -> double& { return c.experiment.delta; }), 0.0, 1.0));
    t.push_back(with_min(field("base_seed", Kind::integer, "seed of rollout 0 in group 0",
                               [](ToolConfig& c) -> std::uint64_t& { return c.experiment.base_seed; }), 0));
    t.push_back(with_xmin(field("h_min", Kind::number, "minimum initial psi-weighted margin",
                                [](ToolConfig& c) -> double& { return c.experiment.h_min; }), 0.0));
    t.push_back(with_xmin(field("eps_norm", Kind::number, "floor of the margin normaliser",
                                [](ToolConfig& c) -> double& { return c.experiment.eps_norm; }), 0.0));
    t.push_back(with_min(field("tol_support", Kind::number, "tie tolerance when counting support scenarios",
                               [](ToolConfig& c) -> double& { return c.experiment.tol_support; }), 0.0));
    // Sweeps
    t.push_back(with_min(field("table1_noise_bounds", Kind::number_array, "noise bounds swept by reproduce-table1",
                               [](ToolConfig& c) -> std::vector<double>& { return c.table1_noise_bounds; }), 0.0));
    t.push_back(with_min(field("table1_agent_counts", Kind::integer_array, "agent counts swept by reproduce-table1",
                               [](ToolConfig& c) -> std::vector<std::size_t>& { return c.table1_agent_counts; }), 2));
    t.push_back(with_min(field("psi_grid", Kind::number_array, "psi values swept by sweep-psi",
                               [](ToolConfig& c) -> std::vector<double>& { return c.psi_grid; }), 0.0));
    t.push_back(with_min(field("psi_sweep_rollouts", Kind::integer, "rollouts per psi value in sweep-psi",
                               [](ToolConfig& c) -> std::size_t& { return c.psi_sweep_rollouts; }), 2));
    return t;
  }();
  return table;
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key.substr(0, key.find('/')) + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void key_error(const std::string& text, const std::string& key, const std::string& what) {
  std::ostringstream msg;
  msg << "/" << key << ": " << what;
  if (const auto line = line_of_key(text, key); line > 0) msg << " (line " << line << ")";
  throw ConfigError(msg.str());
}

std::string fmt_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void check_number(const std::string& text, const Field& f, double v) {
  if (!std::isfinite(v)) key_error(text, f.key, "must be finite");
  if (f.minimum && v < *f.minimum) key_error(text, f.key, "value " + fmt_number(v) + " is below minimum " + fmt_number(*f.minimum));
  if (f.exclusive_minimum && v <= *f.exclusive_minimum)
    key_error(text, f.key, "value " + fmt_number(v) + " must be > " + fmt_number(*f.exclusive_minimum));
  if (f.maximum && v > *f.maximum) key_error(text, f.key, "value " + fmt_number(v) + " is above maximum " + fmt_number(*f.maximum));
  if (f.exclusive_maximum && v >= *f.exclusive_maximum)
    key_error(text, f.key, "value " + fmt_number(v) + " must be < " + fmt_number(*f.exclusive_maximum));
}

void check_value(const std::string& text, const Field& f, const json& v) {
  switch (f.kind) {
    case Kind::integer:
      if (!v.is_number_unsigned()) key_error(text, f.key, "expected a non-negative integer");
      check_number(text, f, static_cast<double>(v.get<std::uint64_t>()));
      break;
    case Kind::number:
      if (!v.is_number()) key_error(text, f.key, "expected a number");
      check_number(text, f, v.get<double>());
      break;
    case Kind::boolean:
      if (!v.is_boolean()) key_error(text, f.key, "expected true or false");
      break;
    case Kind::choice: {
      if (!v.is_string()) key_error(text, f.key, "expected a string");
      const auto s = v.get<std::string>();
      if (std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end()) {
        std::string allowed;
        for (const auto& c : f.choices) allowed += (allowed.empty() ? "" : ", ") + c;
        key_error(text, f.key, "unknown value '" + s + "' (allowed: " + allowed + ")");
      }
      break;
    }
    case Kind::number_array:
    case Kind::integer_array:
      if (!v.is_array() || v.empty()) key_error(text, f.key, "expected a non-empty array");
      for (std::size_t k = 0; k < v.size(); ++k) {
        const auto& item = v[k];
        const bool ok = f.kind == Kind::integer_array ? item.is_number_unsigned() : item.is_number();
        if (!ok)
          key_error(text, f.key + "/" + std::to_string(k),
                    f.kind == Kind::integer_array ? "expected a non-negative integer" : "expected a number");
        Field item_field = f;
        item_field.key = f.key + "/" + std::to_string(k);
        check_number(text, item_field, item.get<double>());
      }
      break;
  }
}

std::string schema_type(Kind kind) {
  switch (kind) {
    case Kind::integer: return "integer";
    case Kind::number: return "number";
    case Kind::boolean: return "boolean";
    case Kind::choice: return "string";
    case Kind::number_array:
    case Kind::integer_array: return "array";
  }
  return "null";
}

}  // namespace

ToolConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError("JSON parse error at line " + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ToolConfig config;
  for (const auto& [key, value] : doc.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.key == key; });
    if (it == fields().end()) key_error(text, key, "unknown key");
    check_value(text, *it, value);
    it->set(config, value);
  }

  try {
    config.validate();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    const std::string first = msg.substr(0, msg.find(' '));
    const bool known = std::any_of(fields().begin(), fields().end(), [&](const Field& f) { return f.key == first; });
    if (known) key_error(text, first, msg.substr(first.size() + 1));
    throw;
  }
  return config;
}

ToolConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ToolConfig& config) {
  json out = json::object();
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

json config_schema() {
  const ToolConfig defaults;
  json props = json::object();
  for (const auto& f : fields()) {
    json p;
    p["type"] = schema_type(f.kind);
    p["description"] = f.description;
    p["default"] = f.get(defaults);
    json* bounded = &p;
    if (f.kind == Kind::number_array || f.kind == Kind::integer_array) {
      p["minItems"] = 1;
      p["items"] = json{{"type", f.kind == Kind::integer_array ? "integer" : "number"}};
      bounded = &p["items"];
    }
    if (f.minimum) (*bounded)["minimum"] = *f.minimum;
    if (f.exclusive_minimum) (*bounded)["exclusiveMinimum"] = *f.exclusive_minimum;
    if (f.maximum) (*bounded)["maximum"] = *f.maximum;
    if (f.exclusive_maximum) (*bounded)["exclusiveMaximum"] = *f.exclusive_maximum;
    if (f.kind == Kind::choice) p["enum"] = f.choices;
    props[f.key] = std::move(p);
  }
  return json{{"$schema", "https://json-schema.org/draft/2020-12/schema"},
              {"title", "cbfcert experiment configuration"},
              {"type", "object"},
              {"additionalProperties", false},
              {"properties", std::move(props)}};
}

std::string config_defaults_help() {
  const ToolConfig defaults;
  std::ostringstream os;
  for (const auto& f : fields())
    os << "  " << std::left << std::setw(24) << f.key << " = " << std::setw(18) << f.get(defaults).dump() << " "
       << f.description << "\n";
  return os.str();
}

std::string config_hash(const ToolConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(config).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace cbfcert
