#include "negoforge/performance_matrix.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/version.hpp"

namespace negoforge {

PerformanceMatrix::PerformanceMatrix(std::vector<std::string> setting_ids)
    : setting_ids_(std::move(setting_ids)) {}

std::size_t PerformanceMatrix::add_strategy(std::string id) {
  strategy_ids_.push_back(std::move(id));
  cells_.emplace_back(setting_ids_.size());
  return strategy_ids_.size() - 1;
}

void PerformanceMatrix::add_run(std::size_t strategy, std::size_t setting, double r) {
  auto& c = cells_.at(strategy).at(setting);
  if (c.stored_mean) {
    c.sum = *c.stored_mean * static_cast<double>(c.count);
    c.stored_mean.reset();
  }
  c.sum += r;
  ++c.count;
}

void PerformanceMatrix::set_cell(std::size_t strategy, std::size_t setting, double mean,
                                 std::size_t runs) {
  if (runs == 0) throw IncompleteMatrixError("a matrix cell needs at least one run");
  auto& c = cells_.at(strategy).at(setting);
  c.sum = mean * static_cast<double>(runs);
  c.count = runs;
  c.stored_mean = mean;
}

const PerformanceMatrix::Cell& PerformanceMatrix::cell(std::size_t strategy,
                                                       std::size_t setting) const {
  return cells_.at(strategy).at(setting);
}

bool PerformanceMatrix::has(std::size_t strategy, std::size_t setting) const {
  return cell(strategy, setting).count > 0;
}

std::size_t PerformanceMatrix::runs(std::size_t strategy, std::size_t setting) const {
  return cell(strategy, setting).count;
}

double PerformanceMatrix::mean(std::size_t strategy, std::size_t setting) const {
  const Cell& c = cell(strategy, setting);
  if (c.count == 0) {
    throw IncompleteMatrixError("no runs for strategy " + strategy_ids_.at(strategy) +
                                " on setting " + setting_ids_.at(setting));
  }
  if (c.stored_mean) return *c.stored_mean;
  return c.sum / static_cast<double>(c.count);
}

bool PerformanceMatrix::complete() const {
  for (const auto& row : cells_) {
    for (const auto& c : row) {
      if (c.count == 0) return false;
    }
  }
  return !cells_.empty() && !setting_ids_.empty();
}

void PerformanceMatrix::require_complete() const {
  if (cells_.empty() || setting_ids_.empty()) throw IncompleteMatrixError("empty performance matrix");
  std::vector<std::string> missing;
  for (std::size_t r = 0; r < cells_.size(); ++r) {
    for (std::size_t s = 0; s < setting_ids_.size(); ++s) {
      if (cells_[r][s].count == 0) missing.push_back(strategy_ids_[r] + "/" + setting_ids_[s]);
    }
  }
  if (missing.empty()) return;
  std::string msg = "performance matrix has " + std::to_string(missing.size()) + " empty cells:";
  for (std::size_t k = 0; k < missing.size() && k < 10; ++k) msg += " " + missing[k];
  throw IncompleteMatrixError(msg);
}

double PerformanceMatrix::row_mean(std::size_t strategy) const {
  double sum = 0.0;
  for (std::size_t s = 0; s < setting_ids_.size(); ++s) sum += mean(strategy, s);
  return sum / static_cast<double>(setting_ids_.size());
}

PerformanceMatrix PerformanceMatrix::head(std::size_t k) const {
  PerformanceMatrix out(setting_ids_);
  for (std::size_t r = 0; r < k && r < strategies(); ++r) {
    out.strategy_ids_.push_back(strategy_ids_[r]);
    out.cells_.push_back(cells_[r]);
  }
  return out;
}

PerformanceMatrix PerformanceMatrix::columns(const std::vector<std::size_t>& settings) const {
  std::vector<std::string> ids;
  for (std::size_t s : settings) ids.push_back(setting_ids_.at(s));
  PerformanceMatrix out(std::move(ids));
  for (std::size_t r = 0; r < strategies(); ++r) {
    out.add_strategy(strategy_ids_[r]);
    for (std::size_t k = 0; k < settings.size(); ++k) out.cells_[r][k] = cells_[r][settings[k]];
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string matrix_csv(const PerformanceMatrix& matrix, std::uint64_t seed) {
  std::ostringstream out;
  out << "# negoforge format=" << kFormatVersion << " tool_version=" << kToolVersion
      << " seed=" << seed << '\n';
  out << "theta_id,setting_id,mean_r,n_runs\n";
  for (std::size_t r = 0; r < matrix.strategies(); ++r) {
    for (std::size_t s = 0; s < matrix.settings(); ++s) {
      if (!matrix.has(r, s)) continue;
      out << matrix.strategy_ids()[r] << ',' << matrix.setting_ids()[s] << ','
          << format_double(matrix.mean(r, s)) << ',' << matrix.runs(r, s) << '\n';
    }
  }
  return out.str();
}

void write_matrix_csv(const std::filesystem::path& path, const PerformanceMatrix& matrix,
                      std::uint64_t seed) {
  write_text_file(path, matrix_csv(matrix, seed));
}

PerformanceMatrix parse_matrix_csv(const std::string& text, const std::string& origin,
                                   std::uint64_t* seed) {
  struct Row {
    std::string theta;
    std::string setting;
    double mean;
    std::size_t runs;
  };
  std::vector<Row> rows;
  std::vector<std::string> thetas;
  std::vector<std::string> settings;
  std::map<std::string, std::size_t> theta_index;
  std::map<std::string, std::size_t> setting_index;
  std::set<std::pair<std::string, std::string>> seen;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("seed=");
      if (seed && pos != std::string::npos) {
        try {
          *seed = std::stoull(line.substr(pos + 5));
        } catch (const std::exception&) {
          throw SchemaError(where + ": malformed seed in comment header");
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "theta_id,setting_id,mean_r,n_runs") {
        throw SchemaError(where + ": expected header theta_id,setting_id,mean_r,n_runs");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 4) throw SchemaError(where + ": expected 4 fields, got " + std::to_string(f.size()));
    if (f[0].empty() || f[1].empty()) throw SchemaError(where + ": empty theta_id or setting_id");
    Row row{f[0], f[1], 0.0, 0};
    try {
      std::size_t used = 0;
      row.mean = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw SchemaError(where + ".mean_r: not a number: '" + f[2] + "'");
    }
    try {
      std::size_t used = 0;
      const long long n = std::stoll(f[3], &used);
      if (used != f[3].size() || n < 1) throw std::invalid_argument("range");
      row.runs = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      throw SchemaError(where + ".n_runs: expected a positive integer, got '" + f[3] + "'");
    }
    if (!seen.insert({row.theta, row.setting}).second) {
      throw SchemaError(where + ": duplicate cell " + row.theta + "/" + row.setting);
    }
    if (theta_index.emplace(row.theta, thetas.size()).second) thetas.push_back(row.theta);
    if (setting_index.emplace(row.setting, settings.size()).second) settings.push_back(row.setting);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw SchemaError(origin + ": missing CSV header");

  PerformanceMatrix m(settings);
  for (const auto& t : thetas) m.add_strategy(t);
  for (const auto& r : rows) m.set_cell(theta_index[r.theta], setting_index[r.setting], r.mean, r.runs);
  return m;
}

PerformanceMatrix read_matrix_csv(const std::filesystem::path& path, std::uint64_t* seed) {
  return parse_matrix_csv(read_text_file(path), path.string(), seed);
}

std::vector<std::string> matrix_diagnostics(const PerformanceMatrix& matrix) {
  std::vector<std::string> out;
  if (matrix.strategies() == 0 || matrix.settings() == 0) out.push_back("matrix has no cells");
  for (std::size_t r = 0; r < matrix.strategies(); ++r) {
    for (std::size_t s = 0; s < matrix.settings(); ++s) {
      const std::string cell = matrix.strategy_ids()[r] + "/" + matrix.setting_ids()[s];
      if (!matrix.has(r, s)) {
        out.push_back("missing cell " + cell);
        continue;
      }
      const double v = matrix.mean(r, s);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        out.push_back("cell " + cell + " mean_r " + format_double(v) + " outside [0,1]");
      }
    }
  }
  return out;
}

}  // namespace negoforge
