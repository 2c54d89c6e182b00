#pragma once

// Scripted opponent families standing in for a corpus of competition agents.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "negoforge/session.hpp"

namespace negoforge {

enum class OpponentFamily {
  TimeDependent,
  Hardliner,
  RandomAboveThreshold,
  RelativeTitForTat,
  FrequencyFitted
};

enum class Split { Train, Test };

std::string to_string(OpponentFamily f);
OpponentFamily family_from_string(const std::string& s);
std::string to_string(Split s);

// Family parameters:
//   TimeDependent / FrequencyFitted: e (concession exponent > 0), p_min
//   Hardliner: none
//   RandomAboveThreshold: floor
//   RelativeTitForTat: factor (mirroring strength), p_min
struct OpponentSpec {
  std::string id;
  OpponentFamily family = OpponentFamily::TimeDependent;
  std::map<std::string, double> params;
  Split split = Split::Train;

  double param(const std::string& key, double fallback) const;
};

// Time-dependent target P_min + (1 - P_min)(1 - t^(1/e)); e <= 0 means a
// hardliner that stays at 1.
double time_dependent_target(double t, double e, double p_min);

void validate(const OpponentSpec& spec);
// Throws SpecError for unknown families or out-of-range parameters.
std::unique_ptr<NegotiatingAgent> instantiate(const OpponentSpec& spec, std::uint64_t seed);

// 10 train / 8 test agents; the test split holds the FrequencyFitted family,
// which never appears in train, plus parameter values unused in train.
std::vector<OpponentSpec> default_roster();

nlohmann::json to_json(const OpponentSpec& spec);
OpponentSpec opponent_from_json(const nlohmann::json& doc, const std::string& path = "$");

// Roster documents are written as {format, tool_version, seed, opponents:[...]};
// a bare JSON array of specs is also accepted on read.
void write_roster(const std::filesystem::path& path, const std::vector<OpponentSpec>& roster,
                  std::uint64_t seed);
std::vector<OpponentSpec> read_roster(const std::filesystem::path& path);
std::vector<OpponentSpec> roster_from_json(const nlohmann::json& doc,
                                           const std::string& path = "$");

}  // namespace negoforge
