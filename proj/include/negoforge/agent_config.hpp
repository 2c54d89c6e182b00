#pragma once

// The 13-parameter strategy vector of the Dynamic Agent and the
// configuration space the configurator searches over.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "negoforge/random.hpp"

namespace negoforge {

enum class LowerBoundary { MaxW, AvgW };

struct AgentConfiguration {
  // Accepting
  double alpha = 1.0;           // scale factor, [1, 1.1]
  double beta = 0.05;           // utility gap, (0, 0.2]
  double t_acc = 0.95;          // accepting time, [0.9, 1]
  LowerBoundary gamma = LowerBoundary::AvgW;
  // Bidding
  double delta = 0.9;           // trade-off factor, [0, 1]
  double e = 0.1;               // conceding factor, (0, 2]
  int n = 1;                    // conceding goal, {1..5}
  // Searching
  int pop_size = 100;           // N_p, [50, 400]
  int tournament_size = 4;      // N_t, [1, 10]
  int evolutions = 3;           // E, [1, 5]
  double crossover_rate = 0.3;  // R_c, [0.1, 0.5]
  double mutation_rate = 0.1;   // R_m, [0, 0.2]
  double elitism_rate = 0.1;    // R_e, [0, 0.2]

  friend bool operator==(const AgentConfiguration&, const AgentConfiguration&) = default;
};

inline constexpr std::size_t kNumParameters = 13;

struct FieldError {
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::optional<AgentConfiguration> config;
  std::vector<FieldError> errors;

  bool ok() const { return config.has_value(); }
};

// Accepts a JSON object keyed by the 13 field names
// (alpha, beta, t_acc, gamma, delta, e, n, N_p, N_t, E, R_c, R_m, R_e).
ValidationResult validate_configuration(const nlohmann::json& raw);
// Range check of an already typed configuration.
std::vector<FieldError> check_domains(const AgentConfiguration& config);

nlohmann::json to_json(const AgentConfiguration& config);
// Throws SchemaError with every field error when invalid.
AgentConfiguration configuration_from_json(const nlohmann::json& raw,
                                           const std::string& path = "$");

std::string to_string(LowerBoundary g);

enum class ParamKind { Real, Integer, Categorical };

struct ParameterSpec {
  std::string name;
  ParamKind kind;
  double lower;
  double upper;
  bool log_scale = false;  // sampled/encoded in log space
};

// Search space over AgentConfiguration. Values are exchanged as a 13-vector
// in declaration order (gamma as 0 = MAX_W, 1 = AVG_W).
class ConfigurationSpace {
 public:
  ConfigurationSpace();

  const std::vector<ParameterSpec>& parameters() const { return params_; }
  const AgentConfiguration& default_configuration() const { return default_; }
  void set_default(const AgentConfiguration& c) { default_ = c; }

  AgentConfiguration sample(Rng& rng) const;
  // One-parameter perturbations of `c`, always inside the domains.
  std::vector<AgentConfiguration> neighbors(const AgentConfiguration& c, Rng& rng,
                                            std::size_t per_parameter = 2) const;

  // Unit-scaled surrogate encoding (log-aware), gamma one-hot: 14 columns.
  std::vector<double> encode(const AgentConfiguration& c) const;
  static constexpr std::size_t kEncodedWidth = kNumParameters + 1;

  static std::array<double, kNumParameters> to_values(const AgentConfiguration& c);
  static AgentConfiguration from_values(const std::array<double, kNumParameters>& v);

 private:
  double to_unit(std::size_t i, double value) const;
  double from_unit(std::size_t i, double u) const;

  std::vector<ParameterSpec> params_;
  AgentConfiguration default_;
};

}  // namespace negoforge
