#include "negoforge/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>

#include "negoforge/dynamic_agent.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/parallel.hpp"
#include "negoforge/version.hpp"

namespace negoforge {

namespace fs = std::filesystem;

namespace {

template <typename T>
void read_int(const Json& obj, const std::string& key, const std::string& path, T& target) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer()) throw SchemaError(path + "." + key + ": expected integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (it->get<long long>() < 0) throw SchemaError(path + "." + key + ": expected a non-negative integer");
  }
  target = it->get<T>();
}

void read_real(const Json& obj, const std::string& key, const std::string& path, double& target) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number()) throw SchemaError(path + "." + key + ": expected number");
  target = it->get<double>();
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw SchemaError(path + ": expected object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw SchemaError(path + "." + it.key() + ": unknown field");
    }
  }
}

const Json* section(const Json& doc, const std::string& key, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  const auto it = doc.find(key);
  if (it == doc.end()) return nullptr;
  check_keys(*it, path + "." + key, allowed);
  return &*it;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& doc, const std::string& path) {
  check_keys(doc, path,
             {"format", "tool_version", "seed", "out", "workers", "problems", "max_rounds",
              "feature_sessions", "smbo", "hydra", "selector", "tournament"});
  if (doc.contains("format")) require_format(doc, path);
  ExperimentConfig c;
  read_int(doc, "seed", path, c.seed);
  read_int(doc, "workers", path, c.workers);
  read_int(doc, "max_rounds", path, c.max_rounds);
  read_int(doc, "feature_sessions", path, c.feature_sessions);
  if (doc.contains("out")) c.out = require_string(doc, "out", path);
  if (const Json* p = section(doc, "problems", path, {"train", "test", "generator"})) {
    const std::string pp = path + ".problems";
    read_int(*p, "train", pp, c.train_problems);
    read_int(*p, "test", pp, c.test_problems);
    if (const Json* g = section(*p, "generator", pp,
                                {"min_issues", "max_issues", "min_values", "max_values", "weight_skew",
                                 "opposition_min", "opposition_max", "enumeration_cap"})) {
      const std::string gp = pp + ".generator";
      read_int(*g, "min_issues", gp, c.generator.min_issues);
      read_int(*g, "max_issues", gp, c.generator.max_issues);
      read_int(*g, "min_values", gp, c.generator.min_values);
      read_int(*g, "max_values", gp, c.generator.max_values);
      read_real(*g, "weight_skew", gp, c.generator.weight_skew);
      read_real(*g, "opposition_min", gp, c.generator.opposition_min);
      read_real(*g, "opposition_max", gp, c.generator.opposition_max);
      read_int(*g, "enumeration_cap", gp, c.generator.enumeration_cap);
    }
  }
  if (const Json* s = section(doc, "smbo", path, {"budget", "challengers", "intensify_budget", "trees"})) {
    read_int(*s, "budget", path + ".smbo", c.smbo_budget);
    read_int(*s, "challengers", path + ".smbo", c.smbo_challengers);
    read_int(*s, "intensify_budget", path + ".smbo", c.smbo_intensify_budget);
    read_int(*s, "trees", path + ".smbo", c.surrogate_trees);
  }
  if (const Json* h = section(doc, "hydra", path, {"k", "repetitions"})) {
    read_int(*h, "k", path + ".hydra", c.hydra_k);
    read_int(*h, "repetitions", path + ".hydra", c.hydra_repetitions);
  }
  if (const Json* s = section(doc, "selector", path, {"folds"})) {
    read_int(*s, "folds", path + ".selector", c.selector_folds);
  }
  if (const Json* t = section(doc, "tournament", path, {"repetitions", "warmup"})) {
    read_int(*t, "repetitions", path + ".tournament", c.tournament_repetitions);
    if (t->contains("warmup")) {
      if (!(*t)["warmup"].is_boolean()) throw SchemaError(path + ".tournament.warmup: expected boolean");
      c.warmup = (*t)["warmup"].get<bool>();
    }
  }

  auto positive = [&](bool ok, const std::string& field) {
    if (!ok) throw ConfigError(path + "." + field + ": must be positive");
  };
  positive(c.workers > 0, "workers");
  positive(c.train_problems > 0, "problems.train");
  positive(c.test_problems > 0, "problems.test");
  positive(c.max_rounds >= 2, "max_rounds");
  positive(c.feature_sessions >= 2, "feature_sessions");
  positive(c.smbo_budget > 0, "smbo.budget");
  positive(c.smbo_challengers > 0, "smbo.challengers");
  positive(c.smbo_intensify_budget > 0, "smbo.intensify_budget");
  positive(c.surrogate_trees > 0, "smbo.trees");
  positive(c.hydra_k > 0, "hydra.k");
  positive(c.hydra_repetitions > 0, "hydra.repetitions");
  positive(c.selector_folds >= 2, "selector.folds");
  positive(c.tournament_repetitions > 0, "tournament.repetitions");
  validate(c.generator);
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return experiment_config_from_json(read_json_file(path), path.string());
}

Json to_json(const ExperimentConfig& c) {
  Json doc = artifact_header(c.seed);
  doc["out"] = c.out.string();
  doc["workers"] = c.workers;
  doc["max_rounds"] = c.max_rounds;
  doc["feature_sessions"] = c.feature_sessions;
  doc["problems"] = {{"train", c.train_problems},
                     {"test", c.test_problems},
                     {"generator",
                      {{"min_issues", c.generator.min_issues},
                       {"max_issues", c.generator.max_issues},
                       {"min_values", c.generator.min_values},
                       {"max_values", c.generator.max_values},
                       {"weight_skew", c.generator.weight_skew},
                       {"opposition_min", c.generator.opposition_min},
                       {"opposition_max", c.generator.opposition_max},
                       {"enumeration_cap", c.generator.enumeration_cap}}}};
  doc["smbo"] = {{"budget", c.smbo_budget},
                 {"challengers", c.smbo_challengers},
                 {"intensify_budget", c.smbo_intensify_budget},
                 {"trees", c.surrogate_trees}};
  doc["hydra"] = {{"k", c.hydra_k}, {"repetitions", c.hydra_repetitions}};
  doc["selector"] = {{"folds", c.selector_folds}};
  doc["tournament"] = {{"repetitions", c.tournament_repetitions}, {"warmup", c.warmup}};
  return doc;
}

ArtifactPaths artifact_paths(const fs::path& out) {
  ArtifactPaths p;
  p.train_problems = out / "problems" / "train";
  p.test_problems = out / "problems" / "test";
  p.roster = out / "roster.json";
  p.feature_store = out / "features.json";
  p.feature_csv = out / "features.csv";
  p.history_dir = out / "history";
  p.configure_result = out / "configure.json";
  p.portfolio = out / "portfolio.json";
  p.matrix = out / "matrix.csv";
  p.selector = out / "selector.json";
  p.hydra_report = out / "hydra_report.md";
  p.report_md = out / "report.md";
  p.sessions_csv = out / "sessions.csv";
  p.plot_csv = out / "plot.csv";
  p.baseline_md = out / "baseline_report.md";
  p.baseline_sessions_csv = out / "baseline_sessions.csv";
  p.tournament_json = out / "tournament.json";
  p.summary = out / "summary.md";
  return p;
}

std::vector<BargainingProblem> read_problem_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("problem directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no problem files in " + dir.string());
  std::vector<BargainingProblem> out;
  for (const auto& f : files) out.push_back(read_problem(f));
  return out;
}

namespace {

void write_problem_set(const fs::path& dir, const std::string& prefix, int count,
                       const ProblemGenSpec& spec, std::uint64_t seed) {
  if (fs::exists(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") fs::remove(e.path());
    }
  }
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%s-%03d", prefix.c_str(), i);
    const std::uint64_t problem_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    write_problem(dir / (std::string(name) + ".json"), generate_problem(spec, problem_seed, name),
                  problem_seed);
  }
}

std::vector<OpponentSpec> split_of(const std::vector<OpponentSpec>& roster, Split split) {
  std::vector<OpponentSpec> out;
  for (const auto& o : roster) {
    if (o.split == split) out.push_back(o);
  }
  if (out.empty()) throw ConfigError("roster has no " + to_string(split) + " opponents");
  return out;
}

Side side_of_playable(std::size_t p) { return p % 2 == 0 ? Side::A : Side::B; }

// One DA(θ) session on a (domain, side) against an opponent; returns the result.
SessionResult play(const AgentConfiguration& theta, const BargainingProblem& problem, Side side,
                   const OpponentSpec& opponent, int max_rounds, std::uint64_t seed, Side first_mover) {
  DynamicAgent agent(theta);
  auto opp = instantiate(opponent, seed);
  return side == Side::A ? run_session(agent, *opp, problem, max_rounds, seed, first_mover)
                         : run_session(*opp, agent, problem, max_rounds, seed, first_mover);
}

struct TrainingData {
  std::vector<BargainingProblem> domains;
  std::vector<OpponentSpec> opponents;
  int max_rounds;
};

}  // namespace

void stage_gen_problems(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  const std::uint64_t base = stream_seed(config.seed, "problem-gen");
  write_problem_set(paths.train_problems, "train", config.train_problems, config.generator,
                    derive_seed(base, 0));
  write_problem_set(paths.test_problems, "test", config.test_problems, config.generator,
                    derive_seed(base, 1));
}

void stage_gen_roster(const ExperimentConfig& config) {
  write_roster(artifact_paths(config.out).roster, default_roster(), config.seed);
}

FeatureStore collect_training_observations(const std::vector<BargainingProblem>& domains,
                                           const std::vector<OpponentSpec>& opponents,
                                           const ExperimentConfig& config) {
  const std::size_t playable = domains.size() * 2;
  const std::size_t per = std::min<std::size_t>(static_cast<std::size_t>(config.feature_sessions), playable);
  const std::uint64_t base = stream_seed(config.seed, "feature-sessions");
  std::vector<std::vector<std::size_t>> chosen;
  for (std::size_t o = 0; o < opponents.size(); ++o) {
    std::vector<std::size_t> order(playable);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(base, o));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(per);
    chosen.push_back(std::move(order));
  }
  const AgentConfiguration default_theta = ConfigurationSpace().default_configuration();
  const auto observations = parallel_map<std::optional<OpponentObservation>>(
      opponents.size() * per,
      [&](std::size_t k) {
        const std::size_t o = k / per;
        const std::size_t p = chosen[o][k % per];
        const auto& problem = domains[p / 2];
        const Side side = side_of_playable(p);
        const std::uint64_t seed = derive_seed(base, o, k % per, 1);
        const auto result = play(default_theta, problem, side, opponents[o], config.max_rounds, seed,
                                 (k % per) % 2 == 0 ? Side::A : Side::B);
        const UtilityEstimate truth = [&problem, side](const Outcome& x) {
          return utility(problem.profile(other(side)), x);
        };
        return opponent_observation(result, problem, side, truth);
      },
      config.workers);
  FeatureStore store;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    auto& list = store[opponents[k / per].id];
    if (observations[k]) list.push_back(*observations[k]);
  }
  return store;
}

namespace {

void training_features(const std::vector<BargainingProblem>& domains,
                       const std::vector<OpponentSpec>& opponents, const FeatureStore& store,
                       std::uint64_t cap, std::vector<std::string>& ids,
                       std::vector<SettingFeatures>& features) {
  std::vector<OpponentFeatures> opp_features;
  for (const auto& o : opponents) {
    const auto it = store.find(o.id);
    if (it == store.end()) throw ConfigError("feature store has no observations for opponent " + o.id);
    opp_features.push_back(aggregate(it->second));
  }
  for (std::size_t p = 0; p < domains.size() * 2; ++p) {
    const auto& problem = domains[p / 2];
    const Side side = side_of_playable(p);
    const auto pf = problem_features(problem, side, cap);
    for (std::size_t o = 0; o < opponents.size(); ++o) {
      ids.push_back(problem.id + ":" + std::string(to_string(side)) + "@" + opponents[o].id);
      features.push_back(SettingFeatures::make(pf, opp_features[o]));
    }
  }
}

}  // namespace

void stage_extract_features(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  const auto domains = read_problem_dir(paths.train_problems);
  const auto opponents = split_of(read_roster(paths.roster), Split::Train);
  const auto store = collect_training_observations(domains, opponents, config);
  write_feature_store(paths.feature_store, store, config.seed);
  std::vector<std::string> ids;
  std::vector<SettingFeatures> features;
  training_features(domains, opponents, store, config.generator.enumeration_cap, ids, features);
  write_feature_csv(paths.feature_csv, ids, features);
}

TrainingSet load_training_set(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  TrainingSet set;
  set.domains = read_problem_dir(paths.train_problems);
  set.opponents = split_of(read_roster(paths.roster), Split::Train);
  if (!fs::exists(paths.feature_store)) {
    throw ConfigError("missing " + paths.feature_store.string() + "; run extract-features first");
  }
  training_features(set.domains, set.opponents, read_feature_store(paths.feature_store),
                    config.generator.enumeration_cap, set.ids, set.features);

  auto data = std::make_shared<TrainingData>(TrainingData{set.domains, set.opponents, config.max_rounds});
  set.metric = [data](const AgentConfiguration& theta, std::size_t setting, std::uint64_t seed) {
    const std::size_t n_opp = data->opponents.size();
    const std::size_t p = setting / n_opp;
    const Side side = side_of_playable(p);
    const Side first = (mix64(seed) & 1) ? Side::B : Side::A;
    const auto result = play(theta, data->domains.at(p / 2), side, data->opponents[setting % n_opp],
                             data->max_rounds, seed, first);
    return result.utility_of(side);
  };
  return set;
}

namespace {

SmboOptions smbo_options(const ExperimentConfig& c) {
  SmboOptions o;
  o.budget = c.smbo_budget;
  o.challengers = c.smbo_challengers;
  o.intensify_budget = c.smbo_intensify_budget;
  o.forest.trees = c.surrogate_trees;
  o.workers = c.workers;
  return o;
}

SelectorSearchSpec selector_spec(const ExperimentConfig& c) {
  SelectorSearchSpec s;
  s.folds = c.selector_folds;
  s.workers = c.workers;
  return s;
}

FeatureMatrix to_matrix(const std::vector<SettingFeatures>& features) {
  FeatureMatrix m;
  for (const auto& f : features) m.append_row(f.values);
  return m;
}

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

SmboResult stage_configure(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  const auto set = load_training_set(config);
  const fs::path history_path = paths.history_dir / "configure.jsonl";
  std::optional<RunHistory> resume;
  if (fs::exists(history_path)) resume = read_run_history(history_path);
  const std::uint64_t seed = stream_seed(config.seed, "configure");
  auto result = smbo(ConfigurationSpace(), set.ids, to_matrix(set.features), set.metric,
                     smbo_options(config), seed, std::move(resume));
  write_run_history(history_path, result.history, seed);
  Json doc = artifact_header(config.seed);
  doc["incumbent"] = to_json(result.incumbent);
  doc["incumbent_id"] = result.incumbent_id;
  doc["sessions"] = result.history.size();
  doc["incumbent_mean"] = result.history.mean(result.incumbent_id);
  doc["incumbent_settings"] = result.history.settings_of(result.incumbent_id).size();
  Json trajectory = Json::array();
  for (const auto& t : result.trajectory) {
    trajectory.push_back({{"sessions", t.sessions}, {"config_id", t.config_id}, {"mean", t.mean},
                          {"settings", t.settings}});
  }
  doc["trajectory"] = trajectory;
  write_json_file(paths.configure_result, doc);
  return result;
}

namespace {

std::string hydra_report_markdown(const HydraResult& r) {
  std::ostringstream out;
  out << "# Portfolio construction\n\n";
  out << "| Iteration | Configurator sessions | Oracle | Selector | Single best |\n|---|---|---|---|---|\n";
  for (const auto& it : r.iterations) {
    out << "| " << it.iteration << " | " << it.sessions << " | " << fixed(it.oracle) << " | "
        << fixed(it.selector) << " | " << fixed(it.single_best) << " |\n";
  }
  out << "\nSelector: " << to_string(r.selector.method());
  if (r.selector.method() != SelectorMethod::Constant) out << " (" << r.selector.param() << ")";
  out << ", cross-validated utility " << fixed(r.selector.cv_score()) << "\n\n";
  out << "## Share of training settings where each strategy is among the best\n\n";
  out << best_ratio_markdown(best_ratio_report(r.matrix), r.matrix.strategy_ids());
  out << "\n## Checks\n\n";
  if (r.flags.empty()) {
    out << "All members contribute, theta1 is the single best strategy and oracle performance grows "
           "with every member.\n";
  }
  for (const auto& f : r.flags) out << "- " << f << '\n';
  return out.str();
}

}  // namespace

HydraResult stage_hydra(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  const auto set = load_training_set(config);
  HydraOptions options;
  options.k_max = config.hydra_k;
  options.repetitions = config.hydra_repetitions;
  options.smbo = smbo_options(config);
  options.selector = selector_spec(config);
  options.workers = config.workers;
  const std::uint64_t seed = stream_seed(config.seed, "hydra");
  auto persist = [&](const HydraResult& partial, const SmboResult& run) {
    write_run_history(paths.history_dir / (strategy_id(partial.portfolio.size() - 1) + ".jsonl"),
                      run.history, partial.portfolio.back().seed);
    write_portfolio(paths.portfolio, partial.portfolio, config.seed);
    write_matrix_csv(paths.matrix, partial.matrix, config.seed);
    write_selector(paths.selector, partial.selector, config.seed);
  };
  auto result = hydra(ConfigurationSpace(), set.ids, set.features, set.metric, options, seed, persist);
  write_text_file(paths.hydra_report, hydra_report_markdown(result));
  return result;
}

SelectorModel stage_fit_selector(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  const auto set = load_training_set(config);
  const auto portfolio = read_portfolio(paths.portfolio);
  const auto matrix = read_matrix_csv(paths.matrix);
  if (matrix.strategies() != portfolio.size()) {
    throw ConfigError("matrix has " + std::to_string(matrix.strategies()) + " strategies but the portfolio has " +
                      std::to_string(portfolio.size()));
  }
  if (matrix.setting_ids() != set.ids) {
    throw ConfigError("matrix settings do not match the training settings");
  }
  const auto model = fit_selector(matrix, set.features, selector_spec(config),
                                  stream_seed(config.seed, "selector"));
  write_selector(paths.selector, model, config.seed);
  return model;
}

TournamentOutcome stage_tournament(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  TournamentSpec spec;
  spec.domains = read_problem_dir(paths.test_problems);
  spec.opponents = split_of(read_roster(paths.roster), Split::Test);
  spec.repetitions = config.tournament_repetitions;
  spec.max_rounds = config.max_rounds;
  spec.seed = stream_seed(config.seed, "tournament");
  spec.warmup = config.warmup;
  spec.workers = config.workers;
  spec.enumeration_cap = config.generator.enumeration_cap;

  OurAgent ours;
  ours.portfolio = read_portfolio(paths.portfolio);
  ours.selector = read_selector(paths.selector);
  OurAgent baseline;
  baseline.name = "DA(theta1)";
  baseline.portfolio = {ours.portfolio.front()};

  TournamentOutcome out;
  out.selector = run_tournament(spec, ours);
  out.baseline = run_tournament(spec, baseline);
  out.deltas = compare_report(out.selector, out.baseline, ours.name, baseline.name);
  out.hash = report_hash(out.selector);

  const std::string comparison = comparison_markdown(out.deltas);
  write_text_file(paths.report_md, report_markdown(out.selector) + "\n## DA(AS) against DA(theta1)\n\n" + comparison);
  write_text_file(paths.sessions_csv, sessions_csv(out.selector));
  write_text_file(paths.plot_csv, plot_csv(out.selector));
  write_text_file(paths.baseline_md, report_markdown(out.baseline));
  write_text_file(paths.baseline_sessions_csv, sessions_csv(out.baseline));

  Json doc = artifact_header(config.seed);
  doc["report_hash"] = out.hash;
  doc["baseline_hash"] = report_hash(out.baseline);
  doc["sessions"] = out.selector.sessions.size();
  doc["expected_sessions"] = out.selector.expected_sessions;
  doc["count_formula"] = out.selector.count_formula;
  Json agents = Json::array();
  for (const auto& a : out.selector.agents) {
    agents.push_back({{"agent", a.agent},
                      {"sessions", a.sessions},
                      {"utility", a.utility},
                      {"opponent_utility", a.opponent_utility},
                      {"social_welfare", a.social_welfare},
                      {"pareto_distance", a.pareto_distance},
                      {"nash_distance", a.nash_distance},
                      {"agreement_ratio", a.agreement_ratio}});
  }
  doc["agents"] = agents;
  Json deltas = Json::array();
  for (const auto& d : out.deltas) {
    deltas.push_back({{"metric", d.metric},
                      {"selector", d.ours},
                      {"baseline", d.baseline},
                      {"absolute", d.absolute},
                      {"relative_percent", d.relative_percent}});
  }
  doc["deltas"] = deltas;
  write_json_file(paths.tournament_json, doc);
  return out;
}

std::string stage_report(const ExperimentConfig& config) {
  const auto paths = artifact_paths(config.out);
  const Json t = read_json_file(paths.tournament_json);
  require_format(t, paths.tournament_json.string());
  const auto portfolio = read_portfolio(paths.portfolio);
  const auto matrix = read_matrix_csv(paths.matrix);

  std::ostringstream out;
  out << "# negoforge run summary\n\nSeed " << config.seed << ", tool version " << kToolVersion << ".\n\n";
  out << "## Portfolio\n\n| Strategy | alpha | beta | t_acc | gamma | delta | e | n | N_p | N_t | E | R_c | R_m | R_e | Training mean |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t k = 0; k < portfolio.size(); ++k) {
    const auto& c = portfolio[k].config;
    out << "| " << strategy_id(k) << " | " << fixed(c.alpha, 3) << " | " << fixed(c.beta, 4) << " | "
        << fixed(c.t_acc, 3) << " | " << to_string(c.gamma) << " | " << fixed(c.delta, 3) << " | "
        << fixed(c.e, 3) << " | " << c.n << " | " << c.pop_size << " | " << c.tournament_size << " | "
        << c.evolutions << " | " << fixed(c.crossover_rate, 3) << " | " << fixed(c.mutation_rate, 3)
        << " | " << fixed(c.elitism_rate, 3) << " | "
        << (k < matrix.strategies() && matrix.complete() ? fixed(matrix.row_mean(k)) : std::string("n/a"))
        << " |\n";
  }
  if (fs::exists(paths.hydra_report)) out << '\n' << read_text_file(paths.hydra_report);
  out << "\n# Test tournament\n\n" << read_text_file(paths.report_md);
  for (const auto& d : t.at("deltas")) {
    if (d.at("metric") == "utility") {
      const double rel = d.at("relative_percent").get<double>();
      out << "\nDA(AS) mean utility " << fixed(d.at("selector").get<double>()) << " vs DA(theta1) "
          << fixed(d.at("baseline").get<double>()) << ": " << (rel >= 0 ? "+" : "") << fixed(rel, 1) << "%\n";
    }
  }
  out << "\nReport hash: " << t.at("report_hash").get<std::string>() << '\n';
  const std::string text = out.str();
  write_text_file(paths.summary, text);
  return text;
}

namespace {

CheckResult artifact_check(const std::string& name, const std::function<void(CheckResult&)>& body) {
  CheckResult res{name, true, {}};
  try {
    body(res);
  } catch (const Error& e) {
    res.passed = false;
    res.diagnostics.emplace_back(e.what());
  } catch (const nlohmann::json::exception& e) {
    res.passed = false;
    res.diagnostics.emplace_back(e.what());
  }
  return res;
}

void expect_same(CheckResult& res, const fs::path& path, const std::string& rewritten) {
  if (read_text_file(path) != rewritten) {
    res.passed = false;
    res.diagnostics.push_back(path.string() + ": rewriting the parsed artifact changes its bytes");
  }
}

std::uint64_t header_seed(const fs::path& path) {
  const Json doc = read_json_file(path);
  return doc.is_object() && doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 0;
}

}  // namespace

std::vector<CheckResult> stage_verify(const ExperimentConfig& config) {
  auto results = run_invariant_suite(config.seed);
  const auto paths = artifact_paths(config.out);

  for (const auto* dir : {&paths.train_problems, &paths.test_problems}) {
    if (!fs::is_directory(*dir)) continue;
    results.push_back(artifact_check("problems in " + dir->string(), [&](CheckResult& r) {
      for (const auto& e : fs::directory_iterator(*dir)) {
        if (e.path().extension() != ".json") continue;
        const auto p = read_problem(e.path());
        validate(p);
        Json doc = to_json(p);
        const Json raw = read_json_file(e.path());
        if (raw.contains("seed")) {
          doc["tool_version"] = kToolVersion;
          doc["seed"] = raw["seed"];
        }
        expect_same(r, e.path(), dump_stable(doc));
      }
    }));
  }
  if (fs::exists(paths.roster)) {
    results.push_back(artifact_check("roster", [&](CheckResult& r) {
      const auto roster = read_roster(paths.roster);
      Json doc = artifact_header(header_seed(paths.roster));
      Json arr = Json::array();
      for (const auto& s : roster) arr.push_back(to_json(s));
      doc["opponents"] = arr;
      expect_same(r, paths.roster, dump_stable(doc));
    }));
  }
  if (fs::exists(paths.feature_store)) {
    results.push_back(artifact_check("feature store", [&](CheckResult& r) {
      const auto store = read_feature_store(paths.feature_store);
      for (const auto& [id, list] : store) {
        for (const auto& o : list) {
          for (double v : {o.t_agree, o.concession_rate, o.avg_offer_rate, o.default_strategy_performance}) {
            if (!(v >= 0.0 && v <= 1.0)) {
              r.passed = false;
              r.diagnostics.push_back("observation of " + id + " outside [0,1]");
            }
          }
        }
      }
    }));
  }
  if (fs::exists(paths.matrix)) {
    results.push_back(artifact_check("performance matrix", [&](CheckResult& r) {
      std::uint64_t seed = 0;
      const auto m = read_matrix_csv(paths.matrix, &seed);
      for (auto& d : matrix_diagnostics(m)) {
        r.passed = false;
        r.diagnostics.push_back(paths.matrix.string() + ": " + d);
      }
      expect_same(r, paths.matrix, matrix_csv(m, seed));
    }));
  }
  if (fs::exists(paths.portfolio)) {
    results.push_back(artifact_check("portfolio", [&](CheckResult& r) {
      const auto portfolio = read_portfolio(paths.portfolio);
      Json doc = artifact_header(header_seed(paths.portfolio));
      doc["portfolio"] = portfolio_to_json(portfolio);
      expect_same(r, paths.portfolio, dump_stable(doc));
      if (fs::exists(paths.selector)) {
        const auto sel = read_selector(paths.selector);
        if (sel.strategies() != portfolio.size()) {
          r.passed = false;
          r.diagnostics.push_back("selector covers " + std::to_string(sel.strategies()) +
                                  " strategies, portfolio has " + std::to_string(portfolio.size()));
        }
        Json sdoc = artifact_header(header_seed(paths.selector));
        sdoc["selector"] = sel.to_json();
        expect_same(r, paths.selector, dump_stable(sdoc));
      }
    }));
  }
  if (fs::is_directory(paths.history_dir)) {
    results.push_back(artifact_check("run histories", [&](CheckResult& r) {
      for (const auto& e : fs::directory_iterator(paths.history_dir)) {
        if (e.path().extension() != ".jsonl") continue;
        const auto h = read_run_history(e.path());
        std::istringstream in(read_text_file(e.path()));
        std::string header;
        std::getline(in, header);
        expect_same(r, e.path(), run_history_jsonl(h, Json::parse(header).at("seed").get<std::uint64_t>()));
      }
    }));
  }
  return results;
}

TournamentOutcome run_pipeline(const ExperimentConfig& config) {
  stage_gen_problems(config);
  stage_gen_roster(config);
  stage_extract_features(config);
  stage_hydra(config);
  auto outcome = stage_tournament(config);
  stage_report(config);
  return outcome;
}

}  // namespace negoforge
