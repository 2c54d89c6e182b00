#pragma once

#include <cstddef>
#include <vector>

#include "negoforge/problem.hpp"

namespace negoforge {

// Frequency-based estimate of the opponent's utility from the offers it has
// made. Value scores are count / max count within an issue; issue weights are
// proportional to 1 - (entropy of the value counts / log |V_i|), so issues the
// opponent holds steady weigh most. Without observations every outcome
// estimates to 1.
class FrequencyOpponentModel {
 public:
  FrequencyOpponentModel() = default;
  explicit FrequencyOpponentModel(const BargainingProblem& problem);

  void update(const Outcome& offer);
  double estimate(const Outcome& outcome) const;

  std::size_t observations() const { return observations_; }
  const std::vector<double>& issue_weights() const { return weights_; }
  // Per issue and value: weight_i * count / max_count, so estimate() is a sum
  // of table lookups.
  const std::vector<std::vector<double>>& value_table() const { return table_; }

 private:
  void refresh();

  std::vector<std::vector<double>> counts_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> table_;
  std::size_t observations_ = 0;
};

}  // namespace negoforge
