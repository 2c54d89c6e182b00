#include "negoforge/session.hpp"

#include <exception>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "negoforge/digest.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/random.hpp"

namespace negoforge {

namespace {

SessionResult fail(SessionResult r, std::optional<ProtocolViolation> violation) {
  r.agreed = false;
  r.agreement.reset();
  r.t_agree = 1.0;
  r.utility = {0.0, 0.0};
  r.violation = std::move(violation);
  return r;
}

}  // namespace

SessionResult run_session(NegotiatingAgent& agent_a, NegotiatingAgent& agent_b,
                          const BargainingProblem& problem, int max_rounds,
                          std::uint64_t seed, Side first_mover) {
  if (max_rounds < 2) throw ConfigError("max_rounds must be >= 2");
  std::array<NegotiatingAgent*, 2> agents{&agent_a, &agent_b};
  SessionResult result;

  for (Side s : {Side::A, Side::B}) {
    try {
      agents[index_of(s)]->begin(problem, s, derive_seed(seed, index_of(s)));
    } catch (const std::exception& e) {
      return fail(std::move(result), ProtocolViolation{s, std::string("begin: ") + e.what()});
    }
  }

  std::optional<Outcome> standing;  // most recent offer on the table
  Side actor = first_mover;
  for (int round = 0; round < max_rounds; ++round) {
    const double t = static_cast<double>(round) / max_rounds;
    Action action;
    try {
      action = agents[index_of(actor)]->act(t);
    } catch (const std::exception& e) {
      return fail(std::move(result), ProtocolViolation{actor, std::string("act: ") + e.what()});
    }
    result.trace.push_back({actor, action, t});

    switch (action.kind) {
      case ActionKind::Accept: {
        if (!standing) {
          return fail(std::move(result),
                      ProtocolViolation{actor, "accept with no offer on the table"});
        }
        result.agreed = true;
        result.agreement = *standing;
        result.t_agree = t;
        result.utility = {utility(problem.profile(Side::A), *standing),
                          utility(problem.profile(Side::B), *standing)};
        return result;
      }
      case ActionKind::EndNegotiation:
        return fail(std::move(result), std::nullopt);
      case ActionKind::Offer:
        if (!is_valid_outcome(problem, action.offer)) {
          return fail(std::move(result), ProtocolViolation{actor, "malformed offer"});
        }
        standing = action.offer;
        break;
    }

    const Side next = other(actor);
    try {
      agents[index_of(next)]->receive(action, t);
    } catch (const std::exception& e) {
      return fail(std::move(result),
                  ProtocolViolation{next, std::string("receive: ") + e.what()});
    }
    actor = next;
  }
  return fail(std::move(result), std::nullopt);
}

namespace {

const char* kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Offer:
      return "offer";
    case ActionKind::Accept:
      return "accept";
    case ActionKind::EndNegotiation:
      return "end";
  }
  return "?";
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const SessionResult& result) {
  for (const auto& e : result.trace) {
    nlohmann::json line{{"actor", std::string(to_string(e.actor))},
                        {"kind", kind_name(e.action.kind)},
                        {"t", e.t}};
    if (e.action.kind == ActionKind::Offer) line["outcome"] = e.action.offer;
    out << line.dump() << '\n';
  }
}

std::string trace_digest(const SessionResult& result) {
  std::ostringstream ss;
  write_trace_jsonl(ss, result);
  ss << "agreed=" << result.agreed << " t=" << result.t_agree;
  return sha256_hex(ss.str());
}

}  // namespace negoforge
