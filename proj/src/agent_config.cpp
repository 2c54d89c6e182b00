#include "negoforge/agent_config.hpp"

#include <algorithm>
#include <cmath>

#include "negoforge/errors.hpp"

namespace negoforge {

namespace {

struct Domain {
  const char* key;
  double lower;
  double upper;
  bool lower_open;
  bool integer;
};

// Declaration order matches to_values(); gamma (index 3) is handled apart.
constexpr std::array<Domain, kNumParameters> kDomains{{
    {"alpha", 1.0, 1.1, false, false},
    {"beta", 0.0, 0.2, true, false},
    {"t_acc", 0.9, 1.0, false, false},
    {"gamma", 0.0, 1.0, false, true},
    {"delta", 0.0, 1.0, false, false},
    {"e", 0.0, 2.0, true, false},
    {"n", 1.0, 5.0, false, true},
    {"N_p", 50.0, 400.0, false, true},
    {"N_t", 1.0, 10.0, false, true},
    {"E", 1.0, 5.0, false, true},
    {"R_c", 0.1, 0.5, false, false},
    {"R_m", 0.0, 0.2, false, false},
    {"R_e", 0.0, 0.2, false, false},
}};

constexpr std::size_t kGammaIndex = 3;

std::string describe(const Domain& d) {
  auto num = [](double x) {
    std::string s = std::to_string(x);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  if (d.integer) return "{" + num(d.lower) + ".." + num(d.upper) + "}";
  return std::string(d.lower_open ? "(" : "[") + num(d.lower) + ", " + num(d.upper) + "]";
}

std::optional<std::string> range_error(const Domain& d, double v) {
  const bool below = d.lower_open ? !(v > d.lower) : !(v >= d.lower);
  if (below || !(v <= d.upper) || !std::isfinite(v)) {
    return "value " + std::to_string(v) + " outside domain " + describe(d);
  }
  if (d.integer && v != std::floor(v)) return "expected an integer";
  return std::nullopt;
}

}  // namespace

std::string to_string(LowerBoundary g) { return g == LowerBoundary::MaxW ? "MAX_W" : "AVG_W"; }

std::array<double, kNumParameters> ConfigurationSpace::to_values(const AgentConfiguration& c) {
  return {c.alpha,
          c.beta,
          c.t_acc,
          c.gamma == LowerBoundary::MaxW ? 0.0 : 1.0,
          c.delta,
          c.e,
          static_cast<double>(c.n),
          static_cast<double>(c.pop_size),
          static_cast<double>(c.tournament_size),
          static_cast<double>(c.evolutions),
          c.crossover_rate,
          c.mutation_rate,
          c.elitism_rate};
}

AgentConfiguration ConfigurationSpace::from_values(const std::array<double, kNumParameters>& v) {
  AgentConfiguration c;
  c.alpha = v[0];
  c.beta = v[1];
  c.t_acc = v[2];
  c.gamma = v[3] < 0.5 ? LowerBoundary::MaxW : LowerBoundary::AvgW;
  c.delta = v[4];
  c.e = v[5];
  c.n = static_cast<int>(std::lround(v[6]));
  c.pop_size = static_cast<int>(std::lround(v[7]));
  c.tournament_size = static_cast<int>(std::lround(v[8]));
  c.evolutions = static_cast<int>(std::lround(v[9]));
  c.crossover_rate = v[10];
  c.mutation_rate = v[11];
  c.elitism_rate = v[12];
  return c;
}

std::vector<FieldError> check_domains(const AgentConfiguration& config) {
  std::vector<FieldError> errors;
  const auto values = ConfigurationSpace::to_values(config);
  for (std::size_t i = 0; i < kNumParameters; ++i) {
    if (i == kGammaIndex) continue;
    if (auto err = range_error(kDomains[i], values[i])) {
      errors.push_back({kDomains[i].key, *err});
    }
  }
  return errors;
}

ValidationResult validate_configuration(const nlohmann::json& raw) {
  ValidationResult result;
  if (!raw.is_object()) {
    result.errors.push_back({"$", "expected a JSON object"});
    return result;
  }
  std::array<double, kNumParameters> values{};
  for (std::size_t i = 0; i < kNumParameters; ++i) {
    const Domain& d = kDomains[i];
    auto it = raw.find(d.key);
    if (it == raw.end()) {
      result.errors.push_back({d.key, "missing field"});
      continue;
    }
    if (i == kGammaIndex) {
      if (it->is_string() && it->get<std::string>() == "MAX_W") {
        values[i] = 0.0;
      } else if (it->is_string() && it->get<std::string>() == "AVG_W") {
        values[i] = 1.0;
      } else {
        result.errors.push_back({d.key, "expected \"MAX_W\" or \"AVG_W\""});
      }
      continue;
    }
    if (!it->is_number()) {
      result.errors.push_back({d.key, "expected a number"});
      continue;
    }
    values[i] = it->get<double>();
    if (auto err = range_error(d, values[i])) result.errors.push_back({d.key, *err});
  }
  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const bool known = std::any_of(kDomains.begin(), kDomains.end(),
                                   [&](const Domain& d) { return it.key() == d.key; });
    if (!known) result.errors.push_back({it.key(), "unknown field"});
  }
  if (result.errors.empty()) result.config = ConfigurationSpace::from_values(values);
  return result;
}

nlohmann::json to_json(const AgentConfiguration& c) {
  return nlohmann::json{{"alpha", c.alpha},
                        {"beta", c.beta},
                        {"t_acc", c.t_acc},
                        {"gamma", to_string(c.gamma)},
                        {"delta", c.delta},
                        {"e", c.e},
                        {"n", c.n},
                        {"N_p", c.pop_size},
                        {"N_t", c.tournament_size},
                        {"E", c.evolutions},
                        {"R_c", c.crossover_rate},
                        {"R_m", c.mutation_rate},
                        {"R_e", c.elitism_rate}};
}

AgentConfiguration configuration_from_json(const nlohmann::json& raw, const std::string& path) {
  ValidationResult r = validate_configuration(raw);
  if (!r.ok()) {
    std::string msg;
    for (const auto& e : r.errors) {
      if (!msg.empty()) msg += "; ";
      msg += path + "." + e.field + ": " + e.message;
    }
    throw SchemaError(msg);
  }
  return *r.config;
}

ConfigurationSpace::ConfigurationSpace() {
  for (std::size_t i = 0; i < kNumParameters; ++i) {
    const Domain& d = kDomains[i];
    ParameterSpec p{d.key, d.integer ? ParamKind::Integer : ParamKind::Real, d.lower, d.upper};
    if (i == kGammaIndex) p.kind = ParamKind::Categorical;
    params_.push_back(p);
  }
  // Open lower bounds become small positive floors, sampled log-uniformly.
  params_[1].lower = 1e-5;
  params_[1].log_scale = true;
  params_[5].lower = 1e-3;
  params_[5].log_scale = true;
}

double ConfigurationSpace::to_unit(std::size_t i, double value) const {
  const ParameterSpec& p = params_[i];
  if (p.log_scale) {
    const double v = std::max(value, p.lower);
    return (std::log(v) - std::log(p.lower)) / (std::log(p.upper) - std::log(p.lower));
  }
  return (value - p.lower) / (p.upper - p.lower);
}

double ConfigurationSpace::from_unit(std::size_t i, double u) const {
  const ParameterSpec& p = params_[i];
  u = std::clamp(u, 0.0, 1.0);
  double v = p.log_scale
                 ? std::exp(std::log(p.lower) + u * (std::log(p.upper) - std::log(p.lower)))
                 : p.lower + u * (p.upper - p.lower);
  if (p.kind != ParamKind::Real) v = std::round(v);
  return std::clamp(v, p.lower, p.upper);
}

AgentConfiguration ConfigurationSpace::sample(Rng& rng) const {
  std::array<double, kNumParameters> v{};
  for (std::size_t i = 0; i < kNumParameters; ++i) {
    const ParameterSpec& p = params_[i];
    if (p.kind == ParamKind::Real) {
      v[i] = from_unit(i, uniform01(rng));
    } else {
      v[i] = static_cast<double>(std::uniform_int_distribution<int>(
          static_cast<int>(p.lower), static_cast<int>(p.upper))(rng));
    }
  }
  return from_values(v);
}

std::vector<AgentConfiguration> ConfigurationSpace::neighbors(const AgentConfiguration& c,
                                                              Rng& rng,
                                                              std::size_t per_parameter) const {
  std::vector<AgentConfiguration> out;
  const auto base = to_values(c);
  std::normal_distribution<double> step(0.0, 0.2);
  for (std::size_t i = 0; i < kNumParameters; ++i) {
    const ParameterSpec& p = params_[i];
    if (p.kind == ParamKind::Categorical) {
      auto v = base;
      v[i] = v[i] < 0.5 ? 1.0 : 0.0;
      out.push_back(from_values(v));
      continue;
    }
    if (p.kind == ParamKind::Integer && p.upper - p.lower <= 10.0) {
      for (double d : {-1.0, 1.0}) {
        auto v = base;
        v[i] = std::clamp(v[i] + d, p.lower, p.upper);
        if (v[i] != base[i]) out.push_back(from_values(v));
      }
      continue;
    }
    for (std::size_t k = 0; k < per_parameter; ++k) {
      auto v = base;
      v[i] = from_unit(i, to_unit(i, base[i]) + step(rng));
      if (v[i] != base[i]) out.push_back(from_values(v));
    }
  }
  return out;
}

std::vector<double> ConfigurationSpace::encode(const AgentConfiguration& c) const {
  const auto v = to_values(c);
  std::vector<double> out;
  out.reserve(kEncodedWidth);
  for (std::size_t i = 0; i < kNumParameters; ++i) {
    if (i == kGammaIndex) {
      out.push_back(v[i] < 0.5 ? 1.0 : 0.0);
      out.push_back(v[i] < 0.5 ? 0.0 : 1.0);
    } else {
      out.push_back(to_unit(i, v[i]));
    }
  }
  return out;
}

}  // namespace negoforge
