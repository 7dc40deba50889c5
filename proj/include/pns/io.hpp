#ifndef PNS_IO_HPP
#define PNS_IO_HPP

// CSV ingestion, model JSON persistence and small text helpers.

#include "pns/fast_pns.hpp"
#include "pns/nested_spheres.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pns {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Eigen::MatrixXd matrix;  // n x (d+1), rows are observations
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  bool normalized = false;
};

/// RFC 4180 records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// A header row is recognized when any of its cells is non-numeric. A first
/// column that is non-numeric in every body row is taken as row labels.
Dataset parse_dataset(const std::string& text, bool normalize, bool transpose = false);
Dataset load_csv(const std::filesystem::path& path, bool normalize, bool transpose = false);

std::string read_file(const std::filesystem::path& path);
/// Write to a temporary sibling, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest text that reads back to the same double (17 significant digits max).
std::string format_double(double v);
std::string csv_escape(const std::string& field);

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header,
                          const std::vector<std::string>& row_labels = {});

struct ModelDocument {
  NestedSphereModel model;
  std::optional<FastPnsBasis> basis;
};

nlohmann::ordered_json model_to_json(const NestedSphereModel& model,
                                     const FastPnsBasis* basis = nullptr);
ModelDocument model_from_json(const nlohmann::ordered_json& j);

std::string dump_json(const nlohmann::ordered_json& j);

}  // namespace pns

#endif  // PNS_IO_HPP
