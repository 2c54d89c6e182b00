#include "negoforge/features.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/opponent_model.hpp"
#include "negoforge/outcome_space.hpp"

namespace negoforge {

SettingFeatures SettingFeatures::make(const ProblemFeatures& p,
                                      const std::optional<OpponentFeatures>& o) {
  SettingFeatures f;
  f.values = {p.n_issues,         p.avg_values_per_issue, p.n_outcomes,
              p.std_issue_weights, p.mean_utility,        p.std_utility};
  f.opponent_known = o.has_value();
  for (std::size_t k = 0; k < 4; ++k) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    f.values[kNumProblemFeatures + 2 * k] = o ? o->mean[k] : nan;
    f.values[kNumProblemFeatures + 2 * k + 1] = o ? o->cov[k] : nan;
  }
  return f;
}

const std::array<std::string, kNumSettingFeatures>& feature_names() {
  static const std::array<std::string, kNumSettingFeatures> names{
      "n_issues",
      "avg_values_per_issue",
      "n_outcomes",
      "std_issue_weights",
      "mean_utility",
      "std_utility",
      "mean_t_agree",
      "cov_t_agree",
      "mean_concession_rate",
      "cov_concession_rate",
      "mean_avg_offer_rate",
      "cov_avg_offer_rate",
      "mean_default_strategy_performance",
      "cov_default_strategy_performance"};
  return names;
}

ProblemFeatures problem_features(const BargainingProblem& problem, Side side,
                                 std::uint64_t cap) {
  const OutcomeSpace space(problem, cap);
  const auto& prof = problem.profile(side);
  const double n_issues = static_cast<double>(problem.issues.size());

  ProblemFeatures f;
  f.n_issues = n_issues;
  double values = 0.0;
  for (const auto& issue : problem.issues) values += static_cast<double>(issue.values.size());
  f.avg_values_per_issue = values / n_issues;
  f.n_outcomes = static_cast<double>(space.size());

  double ss = 0.0;
  for (double w : prof.weights) ss += (w - 1.0 / n_issues) * (w - 1.0 / n_issues);
  f.std_issue_weights = std::sqrt(ss / n_issues);

  const auto u = space.utilities(side);
  double sum = 0.0;
  for (double x : u) sum += x;
  f.mean_utility = sum / static_cast<double>(u.size());
  double var = 0.0;
  for (double x : u) var += (x - f.mean_utility) * (x - f.mean_utility);
  f.std_utility = std::sqrt(var / static_cast<double>(u.size()));
  return f;
}

std::optional<OpponentObservation> opponent_observation(const SessionResult& result,
                                                        const BargainingProblem& problem,
                                                        Side side,
                                                        const UtilityEstimate& opponent_utility) {
  double lowest = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t offers = 0;
  for (const auto& e : result.trace) {
    if (e.actor == side || e.action.kind != ActionKind::Offer) continue;
    const double u = opponent_utility(e.action.offer);
    lowest = std::min(lowest, u);
    sum += u;
    ++offers;
  }
  if (offers == 0) return std::nullopt;

  const auto& own = problem.profile(side);
  const double opp_at_our_best = opponent_utility(best_outcome(own));
  const double our_worst = utility(own, worst_outcome(own));
  const double mean_offer = sum / static_cast<double>(offers);

  auto rate = [&](double x) {
    if (x <= opp_at_our_best) return 1.0;
    return (1.0 - x) / (1.0 - opp_at_our_best);
  };

  OpponentObservation obs;
  obs.t_agree = result.t_agree;
  obs.concession_rate = rate(lowest);
  obs.avg_offer_rate = rate(mean_offer);
  const double agreed_u = result.agreed ? result.utility_of(side) : 0.0;
  obs.default_strategy_performance =
      agreed_u <= our_worst ? 0.0 : (agreed_u - our_worst) / (1.0 - our_worst);
  return obs;
}

UtilityEstimate estimated_opponent_utility(const SessionResult& result,
                                           const BargainingProblem& problem, Side side) {
  auto model = std::make_shared<FrequencyOpponentModel>(problem);
  for (const auto& e : result.trace) {
    if (e.actor != side && e.action.kind == ActionKind::Offer) model->update(e.action.offer);
  }
  return [model](const Outcome& o) { return model->estimate(o); };
}

OpponentFeatures aggregate(const std::vector<OpponentObservation>& observations) {
  if (observations.size() < 2) {
    throw InsufficientSamplesError("opponent features need at least two observations, got " +
                                   std::to_string(observations.size()));
  }
  auto field = [](const OpponentObservation& o, std::size_t k) {
    switch (k) {
      case 0:
        return o.t_agree;
      case 1:
        return o.concession_rate;
      case 2:
        return o.avg_offer_rate;
      default:
        return o.default_strategy_performance;
    }
  };
  OpponentFeatures f;
  const double n = static_cast<double>(observations.size());
  for (std::size_t k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (const auto& o : observations) sum += field(o, k);
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& o : observations) var += (field(o, k) - mean) * (field(o, k) - mean);
    f.mean[k] = mean;
    f.cov[k] = mean == 0.0 ? 0.0 : std::sqrt(var / n) / std::abs(mean);
  }
  return f;
}

void write_feature_store(const std::filesystem::path& path, const FeatureStore& store,
                         std::uint64_t seed) {
  Json doc = artifact_header(seed);
  Json obs = Json::object();
  for (const auto& [id, list] : store) {
    Json arr = Json::array();
    for (const auto& o : list) {
      arr.push_back(Json{{"t_agree", o.t_agree},
                         {"concession_rate", o.concession_rate},
                         {"avg_offer_rate", o.avg_offer_rate},
                         {"default_strategy_performance", o.default_strategy_performance}});
    }
    obs[id] = std::move(arr);
  }
  doc["observations"] = std::move(obs);
  write_json_file(path, doc);
}

FeatureStore read_feature_store(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  const std::string root = path.string();
  require_format(doc, root);
  const Json& obs = require(doc, "observations", root);
  if (!obs.is_object()) throw SchemaError(root + ".observations: expected object");
  FeatureStore store;
  for (auto it = obs.begin(); it != obs.end(); ++it) {
    if (!it->is_array()) throw SchemaError(root + ".observations." + it.key() + ": expected array");
    auto& list = store[it.key()];
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = root + ".observations." + it.key() + "[" + std::to_string(i) + "]";
      const Json& o = (*it)[i];
      list.push_back({require_number(o, "t_agree", p), require_number(o, "concession_rate", p),
                      require_number(o, "avg_offer_rate", p),
                      require_number(o, "default_strategy_performance", p)});
    }
  }
  return store;
}

std::string feature_csv(const std::vector<std::string>& ids,
                        const std::vector<SettingFeatures>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "setting_id";
  for (const auto& n : feature_names()) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << ids.at(r);
    for (double v : rows[r].values) {
      out << ',';
      if (std::isnan(v)) {
        out << "NA";
      } else {
        out << v;
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                       const std::vector<SettingFeatures>& rows) {
  write_text_file(path, feature_csv(ids, rows));
}

}  // namespace negoforge
