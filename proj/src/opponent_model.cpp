#include "negoforge/opponent_model.hpp"

#include <algorithm>
#include <cmath>

#include "negoforge/errors.hpp"

namespace negoforge {

FrequencyOpponentModel::FrequencyOpponentModel(const BargainingProblem& problem) {
  for (const auto& issue : problem.issues) counts_.emplace_back(issue.values.size(), 0.0);
  refresh();
}

void FrequencyOpponentModel::update(const Outcome& offer) {
  if (offer.size() != counts_.size()) {
    throw InvalidOutcomeError("opponent offer does not match the issue count");
  }
  for (std::size_t i = 0; i < offer.size(); ++i) {
    if (offer[i] < 0 || static_cast<std::size_t>(offer[i]) >= counts_[i].size()) {
      throw InvalidOutcomeError("opponent offer value out of range");
    }
    counts_[i][static_cast<std::size_t>(offer[i])] += 1.0;
  }
  ++observations_;
  refresh();
}

void FrequencyOpponentModel::refresh() {
  const std::size_t n = counts_.size();
  weights_.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
  table_.assign(n, {});
  if (observations_ == 0) {
    // Uninformative prior: every value scores 1, weights uniform.
    for (std::size_t i = 0; i < n; ++i) table_[i].assign(counts_[i].size(), weights_[i]);
    return;
  }
  std::vector<double> raw(n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double total = static_cast<double>(observations_);
    double h = 0.0;
    for (double c : counts_[i]) {
      if (c > 0.0) h -= (c / total) * std::log(c / total);
    }
    const double hmax = std::log(static_cast<double>(counts_[i].size()));
    raw[i] = std::max(0.0, 1.0 - h / hmax);
    sum += raw[i];
  }
  if (sum > 0.0) {
    for (std::size_t i = 0; i < n; ++i) weights_[i] = raw[i] / sum;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double top = *std::max_element(counts_[i].begin(), counts_[i].end());
    table_[i].resize(counts_[i].size());
    for (std::size_t v = 0; v < counts_[i].size(); ++v) {
      table_[i][v] = weights_[i] * counts_[i][v] / top;
    }
  }
}

double FrequencyOpponentModel::estimate(const Outcome& outcome) const {
  if (outcome.size() != table_.size()) {
    throw InvalidOutcomeError("outcome does not match the issue count");
  }
  double u = 0.0;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    u += table_[i].at(static_cast<std::size_t>(outcome[i]));
  }
  return std::clamp(u, 0.0, 1.0);
}

}  // namespace negoforge
