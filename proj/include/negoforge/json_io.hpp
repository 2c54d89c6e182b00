#pragma once

// Shared JSON plumbing: file read/write and schema-checked field access with
// JSON-path diagnostics.

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "negoforge/problem.hpp"

namespace negoforge {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);
// Pretty-printed with sorted keys and a trailing newline; byte-stable for a
// given value.
void write_json_file(const std::filesystem::path& path, const Json& value);
std::string dump_stable(const Json& value);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

const Json& require(const Json& obj, const std::string& key, const std::string& path);
double require_number(const Json& obj, const std::string& key, const std::string& path);
std::string require_string(const Json& obj, const std::string& key, const std::string& path);
void require_format(const Json& doc, const std::string& path);

// Artifact header stamped on every written document.
Json artifact_header(std::uint64_t seed);

Json to_json(const BargainingProblem& problem);
BargainingProblem problem_from_json(const Json& doc, const std::string& path = "$");

BargainingProblem read_problem(const std::filesystem::path& path);
// With a seed the document also carries tool_version and the generator seed.
void write_problem(const std::filesystem::path& path, const BargainingProblem& problem,
                   std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace negoforge
