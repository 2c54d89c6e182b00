#include "negoforge/json_io.hpp"

#include <fstream>
#include <sstream>

#include "negoforge/errors.hpp"
#include "negoforge/version.hpp"

namespace negoforge {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError(path.string() + ": cannot open for writing");
  out << text;
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string dump_stable(const Json& value) { return value.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& value) {
  write_text_file(path, dump_stable(value));
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path + ": expected object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key + ": missing field");
  return *it;
}

double require_number(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key + ": expected number");
  return v.get<double>();
}

std::string require_string(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key + ": expected string");
  return v.get<std::string>();
}

void require_format(const Json& doc, const std::string& path) {
  const Json& f = require(doc, "format", path);
  if (!f.is_number_integer() || f.get<int>() != kFormatVersion) {
    throw SchemaError(path + ".format: unsupported format version");
  }
}

Json artifact_header(std::uint64_t seed) {
  return Json{{"format", kFormatVersion}, {"tool_version", kToolVersion}, {"seed", seed}};
}

namespace {

Json profile_to_json(const BargainingProblem& p, Side s) {
  const auto& prof = p.profile(s);
  Json weights = Json::object();
  Json valuations = Json::object();
  for (std::size_t i = 0; i < p.issues.size(); ++i) {
    const auto& issue = p.issues[i];
    weights[issue.name] = prof.weights[i];
    Json scores = Json::object();
    for (std::size_t v = 0; v < issue.values.size(); ++v) {
      scores[issue.values[v]] = prof.valuations[i][v];
    }
    valuations[issue.name] = std::move(scores);
  }
  return Json{{"weights", weights}, {"valuations", valuations}};
}

UtilityProfile profile_from_json(const Json& doc, const std::vector<Issue>& issues,
                                 const std::string& path) {
  UtilityProfile prof;
  const Json& weights = require(doc, "weights", path);
  const Json& valuations = require(doc, "valuations", path);
  for (const auto& issue : issues) {
    prof.weights.push_back(require_number(weights, issue.name, path + ".weights"));
    const std::string vpath = path + ".valuations";
    const Json& scores = require(valuations, issue.name, vpath);
    std::vector<double> row;
    for (const auto& label : issue.values) {
      row.push_back(require_number(scores, label, vpath + "." + issue.name));
    }
    prof.valuations.push_back(std::move(row));
  }
  if (weights.size() != issues.size()) {
    throw SchemaError(path + ".weights: unexpected issue names");
  }
  return prof;
}

}  // namespace

Json to_json(const BargainingProblem& p) {
  Json issues = Json::array();
  for (const auto& issue : p.issues) {
    issues.push_back(Json{{"name", issue.name}, {"values", issue.values}});
  }
  return Json{{"format", kFormatVersion},
              {"id", p.id},
              {"issues", issues},
              {"profiles",
               {{"A", profile_to_json(p, Side::A)}, {"B", profile_to_json(p, Side::B)}}}};
}

BargainingProblem problem_from_json(const Json& doc, const std::string& path) {
  require_format(doc, path);
  BargainingProblem p;
  p.id = require_string(doc, "id", path);
  const Json& issues = require(doc, "issues", path);
  if (!issues.is_array()) throw SchemaError(path + ".issues: expected array");
  for (std::size_t i = 0; i < issues.size(); ++i) {
    const std::string ipath = path + ".issues[" + std::to_string(i) + "]";
    Issue issue;
    issue.name = require_string(issues[i], "name", ipath);
    const Json& values = require(issues[i], "values", ipath);
    if (!values.is_array()) throw SchemaError(ipath + ".values: expected array");
    for (const auto& v : values) {
      if (!v.is_string()) throw SchemaError(ipath + ".values: expected strings");
      issue.values.push_back(v.get<std::string>());
    }
    p.issues.push_back(std::move(issue));
  }
  const Json& profiles = require(doc, "profiles", path);
  p.profiles[0] = profile_from_json(require(profiles, "A", path + ".profiles"), p.issues,
                                    path + ".profiles.A");
  p.profiles[1] = profile_from_json(require(profiles, "B", path + ".profiles"), p.issues,
                                    path + ".profiles.B");
  try {
    validate(p);
  } catch (const SpecError& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return p;
}

BargainingProblem read_problem(const std::filesystem::path& path) {
  return problem_from_json(read_json_file(path), path.string());
}

void write_problem(const std::filesystem::path& path, const BargainingProblem& problem,
                   std::optional<std::uint64_t> seed) {
  Json doc = to_json(problem);
  if (seed) {
    doc["tool_version"] = kToolVersion;
    doc["seed"] = *seed;
  }
  write_json_file(path, doc);
}

}  // namespace negoforge
