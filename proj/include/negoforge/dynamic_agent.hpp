#pragma once

// DA(θ): acceptance policy, concession target, genetic bid search and a
// frequency opponent model, all driven by an AgentConfiguration.

#include <span>
#include <vector>

#include "negoforge/agent_config.hpp"
#include "negoforge/opponent_model.hpp"
#include "negoforge/random.hpp"
#include "negoforge/session.hpp"

namespace negoforge {

// p(t) = 1 - t^(1/e).
double target_utility(double t, double e);

struct OfferRecord {
  double t;
  double own_utility;
};

struct AcceptanceState {
  double t = 0.0;
  double next_own_utility = 1.0;         // own utility of the bid we would send
  std::vector<OfferRecord> history;      // earlier opponent offers, oldest first
};

// Lower-boundary threshold over earlier opponent offers made within the
// trailing window [t - (1 - t), t]. Empty window -> nullopt.
std::optional<double> window_threshold(const AcceptanceState& state, LowerBoundary gamma);

// alpha * u(incoming) + beta >= u(next own bid), or, past t_acc, u(incoming)
// at or above the MAX_W / AVG_W window threshold.
bool should_accept(const AcceptanceState& state, const AgentConfiguration& config,
                   double incoming_utility);

struct GaResult {
  std::vector<Outcome> population;              // sorted by fitness, descending
  std::vector<double> fitness;
  std::vector<double> best_fitness_per_generation;  // initial population + E entries
};

double bid_fitness(double own_utility, double opponent_estimate, double target, double delta);

// Genetic search over the outcome space: N_p individuals, E generations,
// tournament selection of size N_t, per-gene crossover probability R_c,
// per-gene mutation R_m and an elite fraction R_e (at least one elite when
// R_e > 0). `seeds` replace the first random individuals of the initial
// population.
GaResult ga_search(const BargainingProblem& problem, Side side,
                   const AgentConfiguration& config, const FrequencyOpponentModel& model,
                   double target, Rng& rng, std::span<const Outcome> seeds = {});

// n-th best distinct candidate among those with own utility >= target - 0.05
// (rank clamped to the number of such candidates). Falls back to the own best
// outcome when none qualifies.
Outcome choose_bid(const GaResult& ranked, const UtilityProfile& own,
                   const AgentConfiguration& config, double target);

class DynamicAgent : public NegotiatingAgent {
 public:
  explicit DynamicAgent(AgentConfiguration config, std::string name = "DynamicAgent");

  void begin(const BargainingProblem& problem, Side side, std::uint64_t seed) override;
  void receive(const Action& opponent_action, double t) override;
  Action act(double t) override;
  std::string name() const override { return name_; }

  const AgentConfiguration& configuration() const { return config_; }
  const FrequencyOpponentModel& opponent_model() const { return model_; }

 private:
  AgentConfiguration config_;
  std::string name_;
  const BargainingProblem* problem_ = nullptr;
  Side side_ = Side::A;
  Rng rng_;
  FrequencyOpponentModel model_;
  std::vector<OfferRecord> history_;
  std::optional<Outcome> incoming_;
  std::vector<Outcome> elites_;
};

}  // namespace negoforge
