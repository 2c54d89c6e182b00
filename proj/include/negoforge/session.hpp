#pragma once

// Bilateral negotiation under the stacked alternating offers protocol with a
// round-based deadline: the action taken in round r happens at normalized
// time t = r / max_rounds and the session aborts once t would reach 1.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "negoforge/problem.hpp"

namespace negoforge {

inline constexpr int kDefaultMaxRounds = 1000;

enum class ActionKind { Offer, Accept, EndNegotiation };

struct Action {
  ActionKind kind = ActionKind::EndNegotiation;
  Outcome offer;  // set only for Offer

  static Action make_offer(Outcome o) { return {ActionKind::Offer, std::move(o)}; }
  static Action accept() { return {ActionKind::Accept, {}}; }
  static Action end() { return {ActionKind::EndNegotiation, {}}; }

  friend bool operator==(const Action&, const Action&) = default;
};

// Contract every negotiator implements. begin() is called once per session;
// receive() delivers the opponent's action; act() asks for our move at t.
class NegotiatingAgent {
 public:
  virtual ~NegotiatingAgent() = default;
  virtual void begin(const BargainingProblem& problem, Side side, std::uint64_t seed) = 0;
  virtual void receive(const Action& opponent_action, double t) = 0;
  virtual Action act(double t) = 0;
  virtual std::string name() const = 0;
};

struct TraceEntry {
  Side actor;
  Action action;
  double t;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct ProtocolViolation {
  Side violator;
  std::string reason;
};

struct SessionResult {
  bool agreed = false;
  std::optional<Outcome> agreement;
  double t_agree = 1.0;
  std::array<double, 2> utility{0.0, 0.0};  // indexed by Side
  std::vector<TraceEntry> trace;
  std::optional<ProtocolViolation> violation;

  double utility_of(Side s) const { return utility[index_of(s)]; }
};

// agent_a holds profile A, agent_b profile B; `first_mover` opens. Each agent
// receives a sub-seed derived from `seed` and its side. Violations (accepting
// with nothing on the table, malformed offers, exceptions escaping an agent)
// end the session as a failure attributed to the violator.
SessionResult run_session(NegotiatingAgent& agent_a, NegotiatingAgent& agent_b,
                          const BargainingProblem& problem, int max_rounds,
                          std::uint64_t seed, Side first_mover = Side::A);

// One JSON object per line: {"actor","kind","outcome"?,"t"}.
void write_trace_jsonl(std::ostream& out, const SessionResult& result);
std::string trace_digest(const SessionResult& result);

}  // namespace negoforge
