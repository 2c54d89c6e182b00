// negoforge: command-line driver for the bargaining-agent pipeline.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/experiment.hpp"
#include "negoforge/version.hpp"

namespace nf = negoforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "root seed");
  sub->add_option("--workers", f.workers, "parallel evaluation threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "artifact directory");
}

nf::ExperimentConfig resolve(const CommonFlags& f) {
  nf::ExperimentConfig c = f.config.empty() ? nf::ExperimentConfig{} : nf::load_experiment_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.out) c.out = *f.out;
  return c;
}

void set_log_level() {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("NEGOFORGE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("NEGOFORGE_LOG={} is not a log level; keeping info", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

int verify(const nf::ExperimentConfig& c) {
  bool ok = true;
  for (const auto& r : nf::stage_verify(c)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << '\n';
    for (const auto& d : r.diagnostics) std::cout << "  " << d << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitVerify;
}

void print_tournament(const nf::TournamentOutcome& t) {
  for (const auto& d : t.deltas) {
    if (d.metric != "utility") continue;
    std::printf("DA(AS) %.4f vs DA(theta1) %.4f: %+.1f%% mean test utility\n", d.ours, d.baseline,
                d.relative_percent);
  }
  std::cout << "report hash " << t.hash << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  set_log_level();
  CLI::App app{"Configure, portfolio and evaluate automated bargaining agents"};
  app.set_version_flag("--version", nf::kToolVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, flags);
    return s;
  };
  auto* gen_problems = sub("gen-problems", "generate training and test bargaining problems");
  auto* gen_roster = sub("gen-roster", "write the opponent roster");
  auto* extract = sub("extract-features", "observe training opponents and write setting features");
  auto* configure = sub("configure", "run the configurator on all training settings");
  auto* hydra = sub("hydra", "build the strategy portfolio and selector");
  auto* fit = sub("fit-selector", "refit the selector from the stored performance matrix");
  auto* tournament = sub("tournament", "run the test tournament against the baseline");
  auto* report = sub("report", "write the run summary");
  auto* verify_cmd = sub("verify", "run invariant checks and validate stored artifacts");
  auto* pipeline = sub("pipeline", "run every stage from problem generation to report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto c = resolve(flags);
    spdlog::debug("seed {} workers {} out {}", c.seed, c.workers, c.out.string());
    if (*gen_problems) {
      nf::stage_gen_problems(c);
      spdlog::info("wrote {} training and {} test problems", c.train_problems, c.test_problems);
    } else if (*gen_roster) {
      nf::stage_gen_roster(c);
    } else if (*extract) {
      nf::stage_extract_features(c);
    } else if (*configure) {
      const auto r = nf::stage_configure(c);
      spdlog::info("incumbent mean {:.4f} after {} sessions", r.history.mean(r.incumbent_id), r.history.size());
    } else if (*hydra) {
      const auto r = nf::stage_hydra(c);
      for (const auto& it : r.iterations) {
        spdlog::info("k={} oracle {:.4f} selector {:.4f}", it.iteration, it.oracle, it.selector);
      }
      for (const auto& f : r.flags) spdlog::warn("{}", f);
    } else if (*fit) {
      const auto m = nf::stage_fit_selector(c);
      spdlog::info("selector {} cv {:.4f}", nf::to_string(m.method()), m.cv_score());
    } else if (*tournament) {
      print_tournament(nf::stage_tournament(c));
    } else if (*report) {
      std::cout << nf::stage_report(c);
    } else if (*verify_cmd) {
      return verify(c);
    } else if (*pipeline) {
      print_tournament(nf::run_pipeline(c));
    }
  } catch (const nf::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nf::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerify;
  }
  return kExitOk;
}
