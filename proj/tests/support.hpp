#pragma once

// Shared fixtures: small hand-built problems, scripted agents and scratch
// directories.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "negoforge/problem.hpp"
#include "negoforge/session.hpp"

namespace negoforge::testing {

// Two issues with 3 and 2 values. A prefers low indices, B high ones.
//   A: weights (0.6, 0.4), valuations {1, 0.5, 0}, {1, 0}
//   B: weights (0.3, 0.7), valuations {0, 0.5, 1}, {0, 1}
inline BargainingProblem two_issue_problem() {
  BargainingProblem p;
  p.id = "two-issue";
  p.issues = {{"price", {"low", "mid", "high"}}, {"delivery", {"slow", "fast"}}};
  p.profiles[0] = {{0.6, 0.4}, {{1.0, 0.5, 0.0}, {1.0, 0.0}}};
  p.profiles[1] = {{0.3, 0.7}, {{0.0, 0.5, 1.0}, {0.0, 1.0}}};
  return p;
}

// Plays a fixed action list; once it runs out it repeats the last action.
class ScriptedAgent : public NegotiatingAgent {
 public:
  explicit ScriptedAgent(std::vector<Action> script, std::string name = "scripted")
      : script_(std::move(script)), name_(std::move(name)) {}

  void begin(const BargainingProblem&, Side, std::uint64_t) override { next_ = 0; }
  void receive(const Action& a, double) override { received_.push_back(a); }
  Action act(double) override {
    if (script_.empty()) throw std::runtime_error("empty script");
    const Action a = script_[std::min(next_, script_.size() - 1)];
    ++next_;
    return a;
  }
  std::string name() const override { return name_; }

  const std::vector<Action>& received() const { return received_; }

 private:
  std::vector<Action> script_;
  std::string name_;
  std::size_t next_ = 0;
  std::vector<Action> received_;
};

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("negoforge-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace negoforge::testing
