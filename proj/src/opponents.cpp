#include "negoforge/opponents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/opponent_model.hpp"
#include "negoforge/outcome_space.hpp"
#include "negoforge/random.hpp"

namespace negoforge {

namespace {

constexpr double kEps = 1e-9;
constexpr double kOfferBand = 0.05;

// Shared machinery: enumerated own utilities sorted ascending, and an offer
// picker that draws among outcomes just above a target.
class ScriptedAgent : public NegotiatingAgent {
 public:
  ScriptedAgent(OpponentSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {}

  std::string name() const override { return spec_.id; }

  void begin(const BargainingProblem& problem, Side side, std::uint64_t seed) override {
    problem_ = &problem;
    side_ = side;
    rng_.seed(derive_seed(seed_, seed));
    const OutcomeSpace space(problem);
    const auto u = space.utilities(side);
    own_.assign(u.begin(), u.end());
    order_.resize(own_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return own_[a] < own_[b]; });
    last_received_.reset();
    on_begin();
  }

  void receive(const Action& action, double t) override {
    if (action.kind != ActionKind::Offer) return;
    const double u = utility(problem_->profile(side_), action.offer);
    on_offer(action.offer, u, t);
    last_received_ = u;
  }

  Action act(double t) override {
    const double target = current_target(t);
    if (last_received_ && *last_received_ >= target - kEps) return Action::accept();
    return Action::make_offer(pick_offer(target));
  }

 protected:
  virtual void on_begin() {}
  virtual void on_offer(const Outcome&, double, double) {}
  virtual double current_target(double t) = 0;

  // First sorted position with own utility >= target (clamped to the best).
  std::size_t lower_bound_at(double target) const {
    auto it = std::lower_bound(order_.begin(), order_.end(), target - kEps,
                               [&](std::size_t idx, double v) { return own_[idx] < v; });
    if (it == order_.end()) --it;
    return static_cast<std::size_t>(it - order_.begin());
  }

  virtual Outcome pick_offer(double target) {
    const std::size_t lo = lower_bound_at(target);
    std::size_t hi = lo + 1;
    while (hi < order_.size() && own_[order_[hi]] <= own_[order_[lo]] + kOfferBand) ++hi;
    return outcome_at(*problem_, order_[lo + uniform_index(rng_, hi - lo)]);
  }

  OpponentSpec spec_;
  std::uint64_t seed_;
  const BargainingProblem* problem_ = nullptr;
  Side side_ = Side::A;
  Rng rng_;
  std::vector<double> own_;
  std::vector<std::size_t> order_;
  std::optional<double> last_received_;
};

class TimeDependentAgent : public ScriptedAgent {
 public:
  using ScriptedAgent::ScriptedAgent;

 protected:
  double current_target(double t) override {
    return time_dependent_target(t, spec_.param("e", 1.0), spec_.param("p_min", 0.0));
  }
};

class HardlinerAgent : public ScriptedAgent {
 public:
  using ScriptedAgent::ScriptedAgent;

 protected:
  double current_target(double) override { return 1.0; }
};

class RandomAboveThresholdAgent : public ScriptedAgent {
 public:
  using ScriptedAgent::ScriptedAgent;

 protected:
  double current_target(double) override { return spec_.param("floor", 0.7); }

  Outcome pick_offer(double target) override {
    const std::size_t lo = lower_bound_at(target);
    return outcome_at(*problem_, order_[lo + uniform_index(rng_, order_.size() - lo)]);
  }
};

class RelativeTitForTatAgent : public ScriptedAgent {
 public:
  using ScriptedAgent::ScriptedAgent;

 protected:
  void on_begin() override {
    target_ = 1.0;
    previous_.reset();
  }
  void on_offer(const Outcome&, double u, double) override {
    if (previous_) {
      const double step = u - *previous_;
      if (step > 0.0) {
        target_ = std::max(spec_.param("p_min", 0.0), target_ - spec_.param("factor", 1.0) * step);
      }
    }
    previous_ = u;
  }
  double current_target(double) override { return target_; }

 private:
  double target_ = 1.0;
  std::optional<double> previous_;
};

class FrequencyFittedAgent : public ScriptedAgent {
 public:
  using ScriptedAgent::ScriptedAgent;

 protected:
  void on_begin() override { model_ = FrequencyOpponentModel(*problem_); }
  void on_offer(const Outcome& o, double, double) override { model_.update(o); }
  double current_target(double t) override {
    return time_dependent_target(t, spec_.param("e", 1.0), spec_.param("p_min", 0.0));
  }

  // Highest estimated joint gain u + û among outcomes at or above target.
  Outcome pick_offer(double target) override {
    const std::size_t lo = lower_bound_at(target);
    double best = -1.0;
    std::size_t best_idx = order_[lo];
    for (std::size_t k = lo; k < order_.size(); ++k) {
      const std::size_t idx = order_[k];
      const double gain = own_[idx] + model_.estimate(outcome_at(*problem_, idx));
      if (gain > best) {
        best = gain;
        best_idx = idx;
      }
    }
    return outcome_at(*problem_, best_idx);
  }

 private:
  FrequencyOpponentModel model_;
};

}  // namespace

double OpponentSpec::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double time_dependent_target(double t, double e, double p_min) {
  if (e <= 0.0) return 1.0;
  t = std::clamp(t, 0.0, 1.0);
  return p_min + (1.0 - p_min) * (1.0 - std::pow(t, 1.0 / e));
}

std::string to_string(OpponentFamily f) {
  switch (f) {
    case OpponentFamily::TimeDependent:
      return "TimeDependent";
    case OpponentFamily::Hardliner:
      return "Hardliner";
    case OpponentFamily::RandomAboveThreshold:
      return "RandomAboveThreshold";
    case OpponentFamily::RelativeTitForTat:
      return "RelativeTitForTat";
    case OpponentFamily::FrequencyFitted:
      return "FrequencyFitted";
  }
  return "?";
}

OpponentFamily family_from_string(const std::string& s) {
  for (auto f : {OpponentFamily::TimeDependent, OpponentFamily::Hardliner,
                 OpponentFamily::RandomAboveThreshold, OpponentFamily::RelativeTitForTat,
                 OpponentFamily::FrequencyFitted}) {
    if (to_string(f) == s) return f;
  }
  throw SpecError("unknown opponent family '" + s + "'");
}

std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

void validate(const OpponentSpec& spec) {
  auto in = [&](const char* key, double lo, double hi, bool required) {
    auto it = spec.params.find(key);
    if (it == spec.params.end()) {
      if (required) throw SpecError(spec.id + ": missing parameter '" + key + "'");
      return;
    }
    if (!(it->second >= lo && it->second <= hi)) {
      throw SpecError(spec.id + ": parameter '" + key + "' out of range");
    }
  };
  if (spec.id.empty()) throw SpecError("opponent id must not be empty");
  switch (spec.family) {
    case OpponentFamily::TimeDependent:
    case OpponentFamily::FrequencyFitted:
      in("e", 1e-6, 100.0, true);
      in("p_min", 0.0, 1.0, false);
      break;
    case OpponentFamily::Hardliner:
      break;
    case OpponentFamily::RandomAboveThreshold:
      in("floor", 0.0, 1.0, true);
      break;
    case OpponentFamily::RelativeTitForTat:
      in("factor", 1e-6, 10.0, true);
      in("p_min", 0.0, 1.0, false);
      break;
  }
}

std::unique_ptr<NegotiatingAgent> instantiate(const OpponentSpec& spec, std::uint64_t seed) {
  validate(spec);
  switch (spec.family) {
    case OpponentFamily::TimeDependent:
      return std::make_unique<TimeDependentAgent>(spec, seed);
    case OpponentFamily::Hardliner:
      return std::make_unique<HardlinerAgent>(spec, seed);
    case OpponentFamily::RandomAboveThreshold:
      return std::make_unique<RandomAboveThresholdAgent>(spec, seed);
    case OpponentFamily::RelativeTitForTat:
      return std::make_unique<RelativeTitForTatAgent>(spec, seed);
    case OpponentFamily::FrequencyFitted:
      return std::make_unique<FrequencyFittedAgent>(spec, seed);
  }
  throw SpecError("unknown opponent family");
}

std::vector<OpponentSpec> default_roster() {
  using F = OpponentFamily;
  auto td = [](std::string id, double e, double p_min, Split split) {
    return OpponentSpec{std::move(id), F::TimeDependent, {{"e", e}, {"p_min", p_min}}, split};
  };
  auto ff = [](std::string id, double e, double p_min) {
    return OpponentSpec{std::move(id), F::FrequencyFitted, {{"e", e}, {"p_min", p_min}},
                        Split::Test};
  };
  return {
      td("td-boulware-a", 0.2, 0.4, Split::Train),
      td("td-boulware-b", 0.05, 0.5, Split::Train),
      td("td-linear-a", 1.0, 0.3, Split::Train),
      td("td-linear-b", 0.5, 0.6, Split::Train),
      td("td-conceder-a", 2.0, 0.2, Split::Train),
      {"hardliner-a", F::Hardliner, {}, Split::Train},
      {"random-a", F::RandomAboveThreshold, {{"floor", 0.6}}, Split::Train},
      {"random-b", F::RandomAboveThreshold, {{"floor", 0.85}}, Split::Train},
      {"tft-a", F::RelativeTitForTat, {{"factor", 1.0}, {"p_min", 0.4}}, Split::Train},
      {"tft-b", F::RelativeTitForTat, {{"factor", 0.5}, {"p_min", 0.5}}, Split::Train},
      ff("ff-a", 0.1, 0.5),
      ff("ff-b", 1.0, 0.3),
      ff("ff-c", 0.3, 0.6),
      td("td-test-a", 0.8, 0.45, Split::Test),
      td("td-test-b", 1.5, 0.35, Split::Test),
      td("td-test-c", 0.1, 0.7, Split::Test),
      {"random-test", F::RandomAboveThreshold, {{"floor", 0.75}}, Split::Test},
      {"tft-test", F::RelativeTitForTat, {{"factor", 0.75}, {"p_min", 0.45}}, Split::Test},
  };
}

nlohmann::json to_json(const OpponentSpec& spec) {
  return nlohmann::json{{"id", spec.id},
                        {"family", to_string(spec.family)},
                        {"params", spec.params},
                        {"split", to_string(spec.split)}};
}

OpponentSpec opponent_from_json(const nlohmann::json& doc, const std::string& path) {
  OpponentSpec spec;
  spec.id = require_string(doc, "id", path);
  try {
    spec.family = family_from_string(require_string(doc, "family", path));
  } catch (const SpecError& e) {
    throw SchemaError(path + ".family: " + e.what());
  }
  const std::string split = require_string(doc, "split", path);
  if (split != "train" && split != "test") {
    throw SchemaError(path + ".split: expected \"train\" or \"test\"");
  }
  spec.split = split == "train" ? Split::Train : Split::Test;
  const Json& params = require(doc, "params", path);
  if (!params.is_object()) throw SchemaError(path + ".params: expected object");
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (!it->is_number()) throw SchemaError(path + ".params." + it.key() + ": expected number");
    spec.params[it.key()] = it->get<double>();
  }
  try {
    validate(spec);
  } catch (const SpecError& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return spec;
}

std::vector<OpponentSpec> roster_from_json(const nlohmann::json& doc, const std::string& path) {
  const Json* arr = &doc;
  std::string apath = path;
  if (doc.is_object()) {
    require_format(doc, path);
    arr = &require(doc, "opponents", path);
    apath = path + ".opponents";
  }
  if (!arr->is_array()) throw SchemaError(apath + ": expected array");
  std::vector<OpponentSpec> roster;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    roster.push_back(opponent_from_json((*arr)[i], apath + "[" + std::to_string(i) + "]"));
    for (std::size_t j = 0; j + 1 < roster.size(); ++j) {
      if (roster[j].id == roster.back().id) {
        throw SchemaError(apath + "[" + std::to_string(i) + "].id: duplicate id");
      }
    }
  }
  return roster;
}

void write_roster(const std::filesystem::path& path, const std::vector<OpponentSpec>& roster,
                  std::uint64_t seed) {
  Json doc = artifact_header(seed);
  Json arr = Json::array();
  for (const auto& s : roster) arr.push_back(to_json(s));
  doc["opponents"] = std::move(arr);
  write_json_file(path, doc);
}

std::vector<OpponentSpec> read_roster(const std::filesystem::path& path) {
  return roster_from_json(read_json_file(path), path.string());
}

}  // namespace negoforge
