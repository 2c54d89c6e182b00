#include "negoforge/dynamic_agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace negoforge {

double target_utility(double t, double e) {
  t = std::clamp(t, 0.0, 1.0);
  return 1.0 - std::pow(t, 1.0 / e);
}

std::optional<double> window_threshold(const AcceptanceState& state, LowerBoundary gamma) {
  const double start = state.t - (1.0 - state.t);
  double best = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& rec : state.history) {
    if (rec.t < start || rec.t > state.t) continue;
    best = count == 0 ? rec.own_utility : std::max(best, rec.own_utility);
    sum += rec.own_utility;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return gamma == LowerBoundary::MaxW ? best : sum / static_cast<double>(count);
}

bool should_accept(const AcceptanceState& state, const AgentConfiguration& config,
                   double incoming_utility) {
  if (config.alpha * incoming_utility + config.beta >= state.next_own_utility) return true;
  if (state.t < config.t_acc) return false;
  const auto threshold = window_threshold(state, config.gamma);
  return threshold && incoming_utility >= *threshold;
}

double bid_fitness(double own_utility, double opponent_estimate, double target, double delta) {
  return delta * (1.0 - std::abs(own_utility - target)) + (1.0 - delta) * opponent_estimate;
}

namespace {

struct Evaluator {
  std::vector<std::vector<double>> own;  // weight * score
  const std::vector<std::vector<double>>* opp;
  double target;
  double delta;

  double own_utility(const Outcome& o) const {
    double u = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) u += own[i][static_cast<std::size_t>(o[i])];
    return u;
  }
  double operator()(const Outcome& o) const {
    double est = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) est += (*opp)[i][static_cast<std::size_t>(o[i])];
    return bid_fitness(own_utility(o), std::clamp(est, 0.0, 1.0), target, delta);
  }
};

void sort_by_fitness(std::vector<Outcome>& pop, std::vector<double>& fit) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
  std::vector<Outcome> p2;
  std::vector<double> f2;
  p2.reserve(pop.size());
  f2.reserve(pop.size());
  for (std::size_t i : order) {
    p2.push_back(std::move(pop[i]));
    f2.push_back(fit[i]);
  }
  pop = std::move(p2);
  fit = std::move(f2);
}

}  // namespace

GaResult ga_search(const BargainingProblem& problem, Side side,
                   const AgentConfiguration& config, const FrequencyOpponentModel& model,
                   double target, Rng& rng, std::span<const Outcome> seeds) {
  const auto& prof = problem.profile(side);
  const std::size_t issues = problem.issues.size();
  Evaluator eval{{}, &model.value_table(), target, config.delta};
  eval.own.resize(issues);
  for (std::size_t i = 0; i < issues; ++i) {
    for (double s : prof.valuations[i]) eval.own[i].push_back(prof.weights[i] * s);
  }

  auto random_value = [&](std::size_t issue) {
    return static_cast<int>(uniform_index(rng, problem.issues[issue].values.size()));
  };

  const auto n_pop = static_cast<std::size_t>(std::max(1, config.pop_size));
  GaResult res;
  res.population.reserve(n_pop);
  for (std::size_t k = 0; k < n_pop; ++k) {
    if (k < seeds.size() && is_valid_outcome(problem, seeds[k])) {
      res.population.push_back(seeds[k]);
      continue;
    }
    Outcome o(issues);
    for (std::size_t i = 0; i < issues; ++i) o[i] = random_value(i);
    res.population.push_back(std::move(o));
  }
  res.fitness.resize(n_pop);
  for (std::size_t k = 0; k < n_pop; ++k) res.fitness[k] = eval(res.population[k]);
  sort_by_fitness(res.population, res.fitness);
  res.best_fitness_per_generation.push_back(res.fitness.front());

  std::size_t elites = 0;
  if (config.elitism_rate > 0.0) {
    elites = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(config.elitism_rate * static_cast<double>(n_pop))));
    elites = std::min(elites, n_pop);
  }
  const auto tsize = static_cast<std::size_t>(std::max(1, config.tournament_size));
  auto tournament = [&]() {
    // Population is sorted, so the lowest drawn index is the fittest entrant.
    std::size_t best = uniform_index(rng, n_pop);
    for (std::size_t k = 1; k < tsize; ++k) best = std::min(best, uniform_index(rng, n_pop));
    return best;
  };

  for (int gen = 0; gen < config.evolutions; ++gen) {
    std::vector<Outcome> next(res.population.begin(),
                              res.population.begin() + static_cast<std::ptrdiff_t>(elites));
    std::vector<double> next_fit(res.fitness.begin(),
                                 res.fitness.begin() + static_cast<std::ptrdiff_t>(elites));
    while (next.size() < n_pop) {
      const Outcome& mother = res.population[tournament()];
      const Outcome& father = res.population[tournament()];
      Outcome child = mother;
      for (std::size_t i = 0; i < issues; ++i) {
        if (uniform01(rng) < config.crossover_rate) child[i] = father[i];
      }
      for (std::size_t i = 0; i < issues; ++i) {
        if (uniform01(rng) < config.mutation_rate) child[i] = random_value(i);
      }
      next_fit.push_back(eval(child));
      next.push_back(std::move(child));
    }
    res.population = std::move(next);
    res.fitness = std::move(next_fit);
    sort_by_fitness(res.population, res.fitness);
    res.best_fitness_per_generation.push_back(res.fitness.front());
  }
  return res;
}

Outcome choose_bid(const GaResult& ranked, const UtilityProfile& own,
                   const AgentConfiguration& config, double target) {
  const double floor = target - 0.05;
  std::vector<const Outcome*> distinct;
  for (const auto& o : ranked.population) {
    if (utility(own, o) < floor) continue;
    const bool seen =
        std::any_of(distinct.begin(), distinct.end(), [&](const Outcome* d) { return *d == o; });
    if (!seen) distinct.push_back(&o);
    if (distinct.size() >= static_cast<std::size_t>(std::max(1, config.n))) break;
  }
  if (distinct.empty()) return best_outcome(own);
  const std::size_t rank = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.n)),
                                                 distinct.size());
  return *distinct[rank - 1];
}

DynamicAgent::DynamicAgent(AgentConfiguration config, std::string name)
    : config_(config), name_(std::move(name)) {}

void DynamicAgent::begin(const BargainingProblem& problem, Side side, std::uint64_t seed) {
  problem_ = &problem;
  side_ = side;
  rng_.seed(seed);
  model_ = FrequencyOpponentModel(problem);
  history_.clear();
  incoming_.reset();
  elites_.clear();
}

void DynamicAgent::receive(const Action& opponent_action, double t) {
  if (opponent_action.kind != ActionKind::Offer) return;
  incoming_ = opponent_action.offer;
  model_.update(opponent_action.offer);
  history_.push_back({t, utility(problem_->profile(side_), opponent_action.offer)});
}

Action DynamicAgent::act(double t) {
  const auto& own = problem_->profile(side_);
  const double target = target_utility(t, config_.e);
  const GaResult ranked = ga_search(*problem_, side_, config_, model_, target, rng_, elites_);
  const std::size_t keep = std::min<std::size_t>(5, ranked.population.size());
  elites_.assign(ranked.population.begin(),
                 ranked.population.begin() + static_cast<std::ptrdiff_t>(keep));
  Outcome bid = choose_bid(ranked, own, config_, target);

  if (incoming_) {
    AcceptanceState state;
    state.t = t;
    state.next_own_utility = utility(own, bid);
    // Earlier offers only; the incoming one is the last history entry.
    state.history.assign(history_.begin(), history_.end() - 1);
    const double incoming_u = history_.back().own_utility;
    incoming_.reset();
    if (should_accept(state, config_, incoming_u)) return Action::accept();
  }
  return Action::make_offer(std::move(bid));
}

}  // namespace negoforge
