#ifndef PNS_COMMANDS_HPP
#define PNS_COMMANDS_HPP

// Subcommand implementations behind the `pns` executable. Each run_* function
// returns the output documents in memory; write_outputs stores them atomically.

#include "pns/biplot.hpp"
#include "pns/io.hpp"
#include "pns/simulate.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace pns {

enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitUsage = 2 };

struct RunConfig {
  SelectionMode mode = SelectionMode::small;
  double alpha = 0.05;
  std::optional<int> pcs;
  std::uint64_t seed = 1;
  int grid_points = 41;
  bool normalize = true;
  bool transpose = false;
  std::filesystem::path out_dir = ".";

  void validate() const;
};

/// File name -> contents.
using OutputFiles = std::map<std::string, std::string>;

OutputFiles run_fit(const RunConfig& cfg, const Dataset& data);
OutputFiles run_fastpns(const RunConfig& cfg, const Dataset& data);
OutputFiles run_scores(const ModelDocument& model, const Dataset& data);
OutputFiles run_biplot(const RunConfig& cfg, const ModelDocument& model, const Dataset& data);
OutputFiles run_simulate(const SimulationConfig& cfg);
OutputFiles run_calibrate(const CalibrationConfig& cfg);

void write_outputs(const std::filesystem::path& dir, const OutputFiles& files);

/// Scores of raw points under a stored model (with the reduction step when the
/// model carries a fast basis).
Eigen::MatrixXd scores_for(const ModelDocument& model, const Eigen::MatrixXd& data);

std::string scores_to_csv(const Eigen::MatrixXd& scores,
                          const std::vector<std::string>& row_labels = {});

}  // namespace pns

#endif  // PNS_COMMANDS_HPP
