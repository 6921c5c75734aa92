#include "ppbound/cli/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "ppbound/errors.hpp"

namespace ppbound::cli {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::Estimate, "estimate"},
    {ExperimentKind::Diagnose, "diagnose"},
    {ExperimentKind::Clt, "clt"},
    {ExperimentKind::Coverage, "coverage"},
    {ExperimentKind::Rate, "rate"},
    {ExperimentKind::ChatConsistency, "chat-consistency"},
    {ExperimentKind::OracleValidate, "oracle-validate"},
    {ExperimentKind::DiagnoseArray, "diagnose-array"},
};

// A JSON object plus its dotted path, for error messages that name the key.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const json& value() const { return value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config key '" + (path_.empty() ? std::string("<root>") : path_) + "': " + what);
  }

  void require_object() const {
    if (!value_.is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    require_object();
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : value_.items()) {
      if (!allowed.count(item.key())) child_path_fail(item.key(), "unknown key");
    }
  }

  bool has(const char* key) const { return value_.contains(key); }
  Node at(const char* key) const { return Node(value_.at(key), join(key)); }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
    if (value_.is_number_integer()) {
      const auto v = value_.get<std::int64_t>();
      if (v < 0) fail("expected a non-negative integer");
      return static_cast<std::uint64_t>(v);
    }
    if (value_.is_number_float()) {
      const double v = value_.get<double>();
      if (v >= 0.0 && v == std::floor(v) && v < 9.007199254740992e15) return static_cast<std::uint64_t>(v);
    }
    fail("expected a non-negative integer");
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::vector<double> numbers() const {
    if (!value_.is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < value_.size(); ++i) out.push_back(Node(value_[i], index(i)).number());
    return out;
  }

  bool is_array() const { return value_.is_array(); }
  std::size_t size() const { return value_.size(); }
  Node operator[](std::size_t i) const { return Node(value_[i], index(i)); }

  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string index(std::size_t i) const { return path_ + "[" + std::to_string(i) + "]"; }
  [[noreturn]] void child_path_fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config key '" + join(key) + "': " + what);
  }

  const json& value_;
  std::string path_;
};

BoundaryKind parse_boundary(const Node& node, std::size_t& dim) {
  node.require_object();
  if (!node.has("kind")) node.fail("missing 'kind'");
  const std::string kind = node.at("kind").string();
  dim = 1;
  if (kind == "constant") {
    node.allow_only({"kind", "level", "dim"});
    if (node.has("dim")) dim = node.at("dim").unsigned_integer();
    return Constant{node.number_or("level", 1.0)};
  }
  if (kind == "linear") {
    node.allow_only({"kind", "intercept", "slope"});
    return Linear{node.number_or("intercept", 1.0), node.number_or("slope", 0.0)};
  }
  if (kind == "sine") {
    node.allow_only({"kind", "base", "amplitude", "frequency"});
    return Sine{node.number_or("base", 2.0), node.number_or("amplitude", 0.5), node.number_or("frequency", 1.0)};
  }
  if (kind == "cusp") {
    node.allow_only({"kind", "base", "alpha", "center"});
    return HolderCusp{node.number_or("base", 1.0), node.number_or("alpha", 0.5), node.number_or("center", 0.5)};
  }
  if (kind == "product_sine") {
    node.allow_only({"kind", "base", "amplitude", "frequency", "dim"});
    dim = node.has("dim") ? node.at("dim").unsigned_integer() : 2;
    return ProductSine{node.number_or("base", 2.0), node.number_or("amplitude", 0.5),
                       node.number_or("frequency", 1.0)};
  }
  node.at("kind").fail("unknown boundary kind '" + kind + "'");
}

WeightMode parse_mode(const Node& node) {
  const std::string s = node.string();
  if (s == "integrated") return WeightMode::Integrated;
  if (s == "midpoint") return WeightMode::Midpoint;
  node.fail("expected 'integrated' or 'midpoint'");
}

WeightScheme parse_scheme(const Node& node) {
  node.require_object();
  if (!node.has("kind")) node.fail("missing 'kind'");
  const std::string kind = node.at("kind").string();
  if (kind == "indicator") {
    node.allow_only({"kind"});
    return Indicator{};
  }
  if (kind == "parzen") {
    node.allow_only({"kind", "kernel", "bandwidth", "mode"});
    Parzen p;
    if (node.has("kernel")) {
      const Node k = node.at("kernel");
      const std::string s = k.string();
      if (s == "triangular") {
        p.kernel = KernelShape::Triangular;
      } else if (s == "epanechnikov") {
        p.kernel = KernelShape::Epanechnikov;
      } else if (s == "biweight") {
        p.kernel = KernelShape::Biweight;
      } else {
        k.fail("unknown kernel '" + s + "'");
      }
    }
    p.bandwidth = node.number_or("bandwidth", p.bandwidth);
    if (!(p.bandwidth > 0.0)) node.at("bandwidth").fail("bandwidth must be positive");
    if (node.has("mode")) p.mode = parse_mode(node.at("mode"));
    return p;
  }
  if (kind == "dirichlet") {
    node.allow_only({"kind", "order", "mode"});
    Dirichlet d;
    if (node.has("order")) {
      d.order = node.at("order").unsigned_integer();
      if (d.order % 2 != 0) node.at("order").fail("Dirichlet order must be even");
    }
    if (node.has("mode")) d.mode = parse_mode(node.at("mode"));
    return d;
  }
  node.at("kind").fail("unknown scheme kind '" + kind + "'");
}

// number -> constant, "default" -> flag, object -> power-law rule.
ScheduleRule parse_rule(const Node& node, bool& is_default) {
  is_default = false;
  if (node.value().is_string()) {
    if (node.string() != "default") node.fail("expected a number, an object or \"default\"");
    is_default = true;
    return {};
  }
  if (node.value().is_number()) {
    const double v = node.number();
    if (!(v > 0.0)) node.fail("must be positive");
    return ScheduleRule::constant(v);
  }
  node.allow_only({"coef", "exponent", "log_power", "u_power"});
  ScheduleRule r;
  r.coef = node.number_or("coef", 1.0);
  r.exponent = node.number_or("exponent", 0.0);
  r.log_power = node.number_or("log_power", 0.0);
  r.u_power = node.number_or("u_power", 0.0);
  if (!(r.coef > 0.0)) node.at("coef").fail("must be positive");
  return r;
}

json emit_rule(const ScheduleRule& r, bool is_default) {
  if (is_default) return "default";
  if (r.fixed) return *r.fixed;
  return json{{"coef", r.coef}, {"exponent", r.exponent}, {"log_power", r.log_power}, {"u_power", r.u_power}};
}

std::vector<std::vector<double>> parse_probes(const Node& node, std::size_t dim) {
  if (!node.is_array() || node.size() == 0) node.fail("expected a nonempty array of points");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const Node p = node[i];
    if (p.value().is_number()) {
      if (dim != 1) p.fail("scalar probes are only allowed for d = 1");
      out.push_back({p.number()});
    } else {
      std::vector<double> v = p.numbers();
      if (v.size() != dim) p.fail("point has " + std::to_string(v.size()) + " coordinates, expected " +
                                  std::to_string(dim));
      out.push_back(std::move(v));
    }
  }
  return out;
}

json emit_boundary(const BoundaryKind& kind, std::size_t dim) {
  return std::visit(
      Overloaded{
          [&](const Constant& b) { return json{{"kind", "constant"}, {"level", b.level}, {"dim", dim}}; },
          [](const Linear& b) { return json{{"kind", "linear"}, {"intercept", b.intercept}, {"slope", b.slope}}; },
          [](const Sine& b) {
            return json{{"kind", "sine"}, {"base", b.base}, {"amplitude", b.amplitude}, {"frequency", b.frequency}};
          },
          [](const HolderCusp& b) {
            return json{{"kind", "cusp"}, {"base", b.base}, {"alpha", b.alpha}, {"center", b.center}};
          },
          [&](const ProductSine& b) {
            return json{{"kind", "product_sine"},
                        {"base", b.base},
                        {"amplitude", b.amplitude},
                        {"frequency", b.frequency},
                        {"dim", dim}};
          },
      },
      kind);
}

json emit_scheme(const WeightScheme& scheme) {
  return std::visit(Overloaded{
                        [](const Indicator&) { return json{{"kind", "indicator"}}; },
                        [](const Parzen& p) {
                          return json{{"kind", "parzen"},
                                      {"kernel", to_string(p.kernel)},
                                      {"bandwidth", p.bandwidth},
                                      {"mode", to_string(p.mode)}};
                        },
                        [](const Dirichlet& d) {
                          return json{{"kind", "dirichlet"}, {"order", d.order}, {"mode", to_string(d.mode)}};
                        },
                    },
                    scheme);
}

bool needs_plan(ExperimentKind kind) {
  return kind != ExperimentKind::OracleValidate;
}

void validate(RunConfig& cfg) {
  BoundarySpec spec(cfg.boundary, cfg.dim);
  validate_scheme(cfg.scheme, cfg.dim);
  if (cfg.smoothing_default && std::holds_alternative<Indicator>(cfg.scheme)) {
    throw ConfigError("config key 'smoothing': the indicator scheme has no smoothing parameter");
  }
  if (cfg.k.fixed && !cfg.k_default) {
    const double k = *cfg.k.fixed;
    if (k != std::floor(k) || k < 1.0) throw ConfigError("config key 'k': must be a positive integer");
    if (!exact_root(static_cast<std::size_t>(k), cfg.dim)) {
      throw ConfigError("config key 'k': k = " + std::to_string(static_cast<std::size_t>(k)) +
                        " has no integer root of order d = " + std::to_string(cfg.dim));
    }
  }
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) throw ConfigError("config key 'gamma': must lie in [0, 1)");
  if (!(cfg.max_failure_fraction >= 0.0 && cfg.max_failure_fraction <= 1.0)) {
    throw ConfigError("config key 'max_failure_fraction': must lie in [0, 1]");
  }
  if (cfg.oracle.lambdas.empty()) throw ConfigError("config key 'oracle.lambdas': must be nonempty");
  for (double l : cfg.oracle.lambdas) {
    if (!(l > 0.0)) throw ConfigError("config key 'oracle.lambdas': values must be positive");
  }
  if (cfg.oracle.draws == 0 || cfg.oracle.cells == 0) {
    throw ConfigError("config key 'oracle': draws and cells must be positive");
  }
  if (cfg.kind == ExperimentKind::Rate && cfg.n.size() < 2) {
    throw ConfigError("config key 'n': a rate run needs at least two schedule points");
  }
  if (needs_plan(cfg.kind)) validate_plan(make_plan(cfg));
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

RunConfig parse_config(const json& doc) {
  const Node root(doc, "");
  root.allow_only({"kind", "boundary", "scheme", "n", "k", "smoothing", "c", "gamma", "probes", "replicates", "seed",
                   "c_mode", "variant", "max_failure_fraction", "tolerances", "acceptance", "oracle", "array",
                   "points_file", "out"});
  RunConfig cfg;
  if (!root.has("kind")) root.fail("missing 'kind'");
  try {
    cfg.kind = parse_experiment_kind(root.at("kind").string());
  } catch (const ConfigError&) {
    root.at("kind").fail("unknown experiment kind '" + root.at("kind").string() + "'");
  }

  if (root.has("boundary")) cfg.boundary = parse_boundary(root.at("boundary"), cfg.dim);
  if (root.has("scheme")) cfg.scheme = parse_scheme(root.at("scheme"));

  if (root.has("n")) {
    const Node n = root.at("n");
    cfg.n = n.value().is_number() ? std::vector<double>{n.number()} : n.numbers();
    if (cfg.n.empty()) n.fail("expected at least one value");
  }
  if (root.has("k")) cfg.k = parse_rule(root.at("k"), cfg.k_default);
  if (root.has("smoothing")) {
    bool is_default = false;
    ScheduleRule r = parse_rule(root.at("smoothing"), is_default);
    cfg.smoothing_default = is_default;
    if (!is_default) cfg.smoothing = r;
  }
  cfg.c = root.number_or("c", cfg.c);
  cfg.gamma = root.number_or("gamma", cfg.gamma);
  if (root.has("probes")) {
    cfg.probes = parse_probes(root.at("probes"), cfg.dim);
  } else {
    cfg.probes = {std::vector<double>(cfg.dim, 0.5)};
  }
  if (root.has("replicates")) cfg.replicates = root.at("replicates").unsigned_integer();
  if (root.has("seed")) cfg.seed = root.at("seed").unsigned_integer();
  if (root.has("c_mode")) {
    const Node m = root.at("c_mode");
    const std::string s = m.string();
    if (s == "known") {
      cfg.c_mode = IntensityMode::Known;
    } else if (s == "estimated") {
      cfg.c_mode = IntensityMode::Estimated;
    } else {
      m.fail("expected 'known' or 'estimated'");
    }
  }
  if (root.has("variant")) {
    const Node v = root.at("variant");
    const std::string s = v.string();
    if (s == "smoothed") {
      cfg.variant = EstimatorVariant::Smoothed;
    } else if (s == "simplified") {
      cfg.variant = EstimatorVariant::Simplified;
    } else if (s == "count") {
      cfg.variant = EstimatorVariant::CountBased;
    } else {
      v.fail("expected 'smoothed', 'simplified' or 'count'");
    }
  }
  cfg.max_failure_fraction = root.number_or("max_failure_fraction", cfg.max_failure_fraction);

  if (root.has("tolerances")) {
    const Node t = root.at("tolerances");
    t.allow_only({"min_expected_count", "n_delta", "max_weight", "bias_budget", "h6"});
    auto& tol = cfg.tolerances;
    tol.min_expected_count = t.number_or("min_expected_count", tol.min_expected_count);
    tol.n_delta = t.number_or("n_delta", tol.n_delta);
    tol.max_weight = t.number_or("max_weight", tol.max_weight);
    tol.bias_budget = t.number_or("bias_budget", tol.bias_budget);
    tol.h6 = t.number_or("h6", tol.h6);
  }
  if (root.has("acceptance")) {
    const Node a = root.at("acceptance");
    a.allow_only({"ks_max", "correlation_max", "ks_degradation_max", "coverage_lo", "coverage_hi", "slope_target",
                  "slope_tolerance", "chat_median_max", "oracle_se_multiple", "oracle_ks_max", "moment_bound_se_multiple"});
    auto& acc = cfg.acceptance;
    acc.ks_max = a.number_or("ks_max", acc.ks_max);
    acc.correlation_max = a.number_or("correlation_max", acc.correlation_max);
    acc.ks_degradation_max = a.number_or("ks_degradation_max", acc.ks_degradation_max);
    acc.coverage_lo = a.number_or("coverage_lo", acc.coverage_lo);
    acc.coverage_hi = a.number_or("coverage_hi", acc.coverage_hi);
    if (a.has("slope_target") && !a.at("slope_target").value().is_null()) {
      acc.slope_target = a.at("slope_target").number();
    }
    acc.slope_tolerance = a.number_or("slope_tolerance", acc.slope_tolerance);
    acc.chat_median_max = a.number_or("chat_median_max", acc.chat_median_max);
    acc.oracle_se_multiple = a.number_or("oracle_se_multiple", acc.oracle_se_multiple);
    acc.oracle_ks_max = a.number_or("oracle_ks_max", acc.oracle_ks_max);
    acc.moment_bound_se_multiple = a.number_or("moment_bound_se_multiple", acc.moment_bound_se_multiple);
  }
  if (root.has("oracle")) {
    const Node o = root.at("oracle");
    o.allow_only({"lambdas", "draws", "cells"});
    if (o.has("lambdas")) cfg.oracle.lambdas = o.at("lambdas").numbers();
    if (o.has("draws")) cfg.oracle.draws = o.at("draws").unsigned_integer();
    if (o.has("cells")) cfg.oracle.cells = o.at("cells").unsigned_integer();
  }
  if (root.has("array")) {
    const Node a = root.at("array");
    a.allow_only({"directions", "sigma", "alphas", "max_norm_tolerance", "sample_draws"});
    if (a.has("directions")) {
      const Node d = a.at("directions");
      if (!d.is_array()) d.fail("expected an array of vectors");
      for (std::size_t i = 0; i < d.size(); ++i) cfg.array.directions.push_back(d[i].numbers());
    }
    if (a.has("sigma")) cfg.array.sigma = a.at("sigma").numbers();
    if (a.has("alphas")) cfg.array.alphas = a.at("alphas").numbers();
    cfg.array.max_norm_tolerance = a.number_or("max_norm_tolerance", cfg.array.max_norm_tolerance);
    if (a.has("sample_draws")) cfg.array.sample_draws = a.at("sample_draws").unsigned_integer();
  }
  if (root.has("points_file") && !root.at("points_file").value().is_null()) {
    cfg.points_file = root.at("points_file").string();
  }
  if (root.has("out")) cfg.out = root.at("out").string();

  validate(cfg);
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json emit_config(const RunConfig& cfg) {
  json doc;
  doc["kind"] = to_string(cfg.kind);
  doc["boundary"] = emit_boundary(cfg.boundary, cfg.dim);
  doc["scheme"] = emit_scheme(cfg.scheme);
  doc["n"] = cfg.n;
  doc["k"] = emit_rule(cfg.k, cfg.k_default);
  if (cfg.smoothing_default) {
    doc["smoothing"] = "default";
  } else if (cfg.smoothing) {
    doc["smoothing"] = emit_rule(*cfg.smoothing, false);
  }
  doc["c"] = cfg.c;
  doc["gamma"] = cfg.gamma;
  doc["probes"] = cfg.probes;
  doc["replicates"] = cfg.replicates;
  doc["seed"] = cfg.seed;
  doc["c_mode"] = to_string(cfg.c_mode);
  doc["variant"] = to_string(cfg.variant);
  doc["max_failure_fraction"] = cfg.max_failure_fraction;
  const auto& tol = cfg.tolerances;
  doc["tolerances"] = {{"min_expected_count", tol.min_expected_count},
                       {"n_delta", tol.n_delta},
                       {"max_weight", tol.max_weight},
                       {"bias_budget", tol.bias_budget},
                       {"h6", tol.h6}};
  const auto& acc = cfg.acceptance;
  doc["acceptance"] = {{"ks_max", acc.ks_max},
                       {"correlation_max", acc.correlation_max},
                       {"ks_degradation_max", acc.ks_degradation_max},
                       {"coverage_lo", acc.coverage_lo},
                       {"coverage_hi", acc.coverage_hi},
                       {"slope_target", acc.slope_target ? json(*acc.slope_target) : json(nullptr)},
                       {"slope_tolerance", acc.slope_tolerance},
                       {"chat_median_max", acc.chat_median_max},
                       {"oracle_se_multiple", acc.oracle_se_multiple},
                       {"oracle_ks_max", acc.oracle_ks_max},
                       {"moment_bound_se_multiple", acc.moment_bound_se_multiple}};
  doc["oracle"] = {{"lambdas", cfg.oracle.lambdas}, {"draws", cfg.oracle.draws}, {"cells", cfg.oracle.cells}};
  doc["array"] = {{"directions", cfg.array.directions},
                  {"sigma", cfg.array.sigma},
                  {"alphas", cfg.array.alphas},
                  {"max_norm_tolerance", cfg.array.max_norm_tolerance},
                  {"sample_draws", cfg.array.sample_draws}};
  doc["points_file"] = cfg.points_file ? json(*cfg.points_file) : json(nullptr);
  doc["out"] = cfg.out;
  return doc;
}

ExperimentPlan make_plan(const RunConfig& cfg) {
  ExperimentPlan plan;
  plan.spec = BoundarySpec(cfg.boundary, cfg.dim);
  plan.scheme = cfg.scheme;
  plan.probes = cfg.probes;
  plan.n_schedule = cfg.n;

  ScheduleRule k_default;
  ScheduleRule s_default;
  if (std::holds_alternative<Dirichlet>(cfg.scheme)) {
    default_dirichlet_rules(k_default, s_default);
  } else {
    default_parzen_rules(plan.spec.holder_exponent(), cfg.dim, k_default, s_default);
  }
  plan.k_rule = cfg.k_default ? k_default : cfg.k;
  if (cfg.smoothing_default) {
    plan.smoothing_rule = s_default;
  } else {
    plan.smoothing_rule = cfg.smoothing;
  }
  plan.c = cfg.c;
  plan.gamma = cfg.gamma;
  plan.replicates = cfg.replicates;
  plan.seed = cfg.seed;
  plan.c_mode = cfg.c_mode;
  plan.variant = cfg.variant;
  plan.max_failure_fraction = cfg.max_failure_fraction;
  plan.threads = 1;
  return plan;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = emit_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ppbound::cli
