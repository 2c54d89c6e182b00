#pragma once

// Mean utility of each portfolio strategy on each training setting, with the
// number of sessions behind every cell.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace negoforge {

class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  explicit PerformanceMatrix(std::vector<std::string> setting_ids);

  std::size_t add_strategy(std::string id);
  void add_run(std::size_t strategy, std::size_t setting, double r);
  void set_cell(std::size_t strategy, std::size_t setting, double mean, std::size_t runs);

  std::size_t strategies() const { return strategy_ids_.size(); }
  std::size_t settings() const { return setting_ids_.size(); }
  const std::vector<std::string>& strategy_ids() const { return strategy_ids_; }
  const std::vector<std::string>& setting_ids() const { return setting_ids_; }

  bool has(std::size_t strategy, std::size_t setting) const;
  std::size_t runs(std::size_t strategy, std::size_t setting) const;
  // Throws IncompleteMatrixError for an empty cell.
  double mean(std::size_t strategy, std::size_t setting) const;

  bool complete() const;
  // Throws IncompleteMatrixError naming the first empty cells.
  void require_complete() const;
  // Mean of the cell means over all settings.
  double row_mean(std::size_t strategy) const;

  // Rows restricted to the first `k` strategies.
  PerformanceMatrix head(std::size_t k) const;
  // Columns restricted to `settings`, in the given order.
  PerformanceMatrix columns(const std::vector<std::size_t>& settings) const;

 private:
  struct Cell {
    double sum = 0.0;
    std::size_t count = 0;
    std::optional<double> stored_mean;  // set when loaded from a file
  };
  const Cell& cell(std::size_t strategy, std::size_t setting) const;

  std::vector<std::string> strategy_ids_;
  std::vector<std::string> setting_ids_;
  std::vector<std::vector<Cell>> cells_;
};

// CSV `theta_id,setting_id,mean_r,n_runs` preceded by a `# negoforge ...`
// comment line carrying format, tool version and seed. Empty cells are not
// written.
std::string matrix_csv(const PerformanceMatrix& matrix, std::uint64_t seed);
void write_matrix_csv(const std::filesystem::path& path, const PerformanceMatrix& matrix,
                      std::uint64_t seed);
// Strategy and setting order follow first appearance. Throws SchemaError
// with the offending line for malformed rows.
PerformanceMatrix parse_matrix_csv(const std::string& text, const std::string& origin,
                                   std::uint64_t* seed = nullptr);
PerformanceMatrix read_matrix_csv(const std::filesystem::path& path, std::uint64_t* seed = nullptr);

// Cell-level problems (missing cells, means outside [0,1]); empty when clean.
std::vector<std::string> matrix_diagnostics(const PerformanceMatrix& matrix);

}  // namespace negoforge
