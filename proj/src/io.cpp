#include "pns/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace pns {
namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) return std::nullopt;
  return v;
}

bool is_numeric(const std::string& cell) {
  const auto v = parse_number(cell);
  return v && std::isfinite(*v);
}

ordered_json vec_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const ordered_json& a, const char* what) {
  if (!a.is_array()) throw IoError(std::string("model JSON: '") + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && trim(record[0]).empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw IoError("CSV: unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

Dataset parse_dataset(const std::string& text, bool normalize, bool transpose) {
  auto records = parse_csv(text);
  if (records.empty()) throw IoError("CSV: no data");

  Dataset ds;
  std::size_t first_body = 0;
  bool header = false;
  for (const auto& cell : records[0]) {
    if (!is_numeric(cell)) {
      header = true;
      break;
    }
  }
  if (header) first_body = 1;
  if (first_body >= records.size()) throw IoError("CSV: header but no data rows");

  bool label_column = true;
  for (std::size_t r = first_body; r < records.size(); ++r) {
    if (records[r].empty() || is_numeric(records[r][0])) {
      label_column = false;
      break;
    }
  }
  // A lone non-numeric column is not a label column.
  if (records[first_body].size() < 2) label_column = false;

  const std::size_t offset = label_column ? 1 : 0;
  const std::size_t width = records[first_body].size();
  const std::size_t cols = width - offset;
  const std::size_t rows = records.size() - first_body;

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& rec = records[first_body + r];
    const std::size_t line = first_body + r + 1;
    if (rec.size() != width) {
      throw IoError("CSV: record " + std::to_string(line) + " has " + std::to_string(rec.size()) +
                    " fields, expected " + std::to_string(width));
    }
    if (label_column) ds.row_labels.push_back(trim(rec[0]));
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = parse_number(rec[c + offset]);
      if (!v) {
        throw IoError("CSV: non-numeric cell '" + rec[c + offset] + "' at record " +
                      std::to_string(line) + ", field " + std::to_string(c + offset + 1));
      }
      if (!std::isfinite(*v)) {
        throw IoError("CSV: non-finite value at record " + std::to_string(line));
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  if (header) {
    const auto& h = records[0];
    if (h.size() != width) throw IoError("CSV: header width differs from the data");
    for (std::size_t c = offset; c < width; ++c) ds.col_labels.push_back(trim(h[c]));
  }

  if (transpose) {
    m.transposeInPlace();
    std::swap(ds.row_labels, ds.col_labels);
  }

  if (normalize) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double norm = m.row(i).norm();
      if (!(norm > 0.0)) {
        throw IoError("CSV: observation " + std::to_string(i + 1) +
                      " has zero norm and cannot be normalized");
      }
      m.row(i) /= norm;
    }
    ds.normalized = true;
  }
  ds.matrix = std::move(m);
  return ds;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_csv(const std::filesystem::path& path, bool normalize, bool transpose) {
  return parse_dataset(read_file(path), normalize, transpose);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename onto '" + path.string() + "': " + ec.message());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header,
                          const std::vector<std::string>& row_labels) {
  std::string out;
  const bool labels = !row_labels.empty();
  if (!header.empty()) {
    if (labels) out += "label,";
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out += ',';
      out += csv_escape(header[c]);
    }
    out += "\r\n";
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (labels) out += csv_escape(row_labels.at(static_cast<std::size_t>(i))) + ",";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += "\r\n";
  }
  return out;
}

ordered_json model_to_json(const NestedSphereModel& model, const FastPnsBasis* basis) {
  ordered_json j;
  j["ambient_dim"] = model.ambient_dim;
  j["mode"] = std::string(to_string(model.mode));
  j["alpha"] = model.alpha;
  ordered_json levels = ordered_json::array();
  for (std::size_t k = 0; k < model.subspheres.size(); ++k) {
    const auto& s = model.subspheres[k];
    const auto& c = model.level_choices.at(k);
    ordered_json level;
    level["axis"] = vec_to_json(s.axis);
    level["angle"] = s.angle;
    level["choice"] = c.small ? "small" : "great";
    if (c.test) {
      ordered_json t;
      t["name"] = std::string(to_string(c.test->test));
      t["statistic"] = number_or_null(c.test->statistic);
      t["p"] = c.test->p_value ? ordered_json(*c.test->p_value) : ordered_json(nullptr);
      t["degenerate"] = c.test->degenerate;
      level["test"] = t;
    } else {
      level["test"] = nullptr;
    }
    level["rss_great"] = c.rss_great;
    level["rss_small"] = c.rss_small ? ordered_json(*c.rss_small) : ordered_json(nullptr);
    level["converged"] = c.converged;
    level["degenerate"] = c.degenerate;
    levels.push_back(level);
  }
  j["levels"] = levels;
  j["final_mean"] = model.final_mean;
  j["pns_mean"] = vec_to_json(model.pns_mean);
  j["cumulative_radii"] = vec_to_json(model.cumulative_radii);
  j["truncated"] = model.truncated;
  j["truncated_level"] = model.truncated_level;
  j["warnings"] = model.warnings;
  if (basis) {
    ordered_json b;
    b["mean"] = vec_to_json(basis->mean);
    b["arithmetic_mean"] = vec_to_json(basis->arithmetic_mean);
    ordered_json loadings = ordered_json::array();
    for (Eigen::Index c = 0; c < basis->loadings.cols(); ++c) {
      loadings.push_back(vec_to_json(basis->loadings.col(c)));
    }
    b["loadings"] = loadings;
    b["eigenvalues"] = vec_to_json(basis->eigenvalues);
    b["pct_variance"] = basis->pct_variance;
    j["fast_basis"] = b;
  }
  return j;
}

ModelDocument model_from_json(const ordered_json& j) {
  ModelDocument doc;
  NestedSphereModel& m = doc.model;
  try {
    m.ambient_dim = j.at("ambient_dim").get<int>();
    if (m.ambient_dim < 1) throw IoError("model JSON: ambient_dim must be >= 1");
    m.mode = parse_selection_mode(j.at("mode").get<std::string>());
    m.alpha = j.at("alpha").get<double>();
    const auto& levels = j.at("levels");
    if (levels.size() != static_cast<std::size_t>(m.ambient_dim - 1)) {
      throw IoError("model JSON: expected ambient_dim - 1 levels");
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const auto& l = levels[k];
      Subsphere s;
      s.axis = vec_from_json(l.at("axis"), "axis");
      s.angle = l.at("angle").get<double>();
      if (s.axis.size() != m.ambient_dim + 1 - static_cast<Eigen::Index>(k)) {
        throw IoError("model JSON: level " + std::to_string(k + 1) + " axis has wrong length");
      }
      LevelChoice c;
      c.small = l.at("choice").get<std::string>() == "small";
      if (l.contains("test") && !l["test"].is_null()) {
        const auto& t = l["test"];
        LevelTestResult r;
        r.test = parse_selection_mode(t.at("name").get<std::string>());
        if (t.at("statistic").is_null()) {
          r.statistic = r.test == SelectionMode::bic ? -std::numeric_limits<double>::infinity()
                                                     : std::numeric_limits<double>::infinity();
        } else {
          r.statistic = t["statistic"].get<double>();
        }
        if (!t.at("p").is_null()) r.p_value = t["p"].get<double>();
        r.degenerate = t.value("degenerate", false);
        r.chose_small = c.small;
        c.test = r;
      }
      c.rss_great = l.value("rss_great", 0.0);
      if (l.contains("rss_small") && !l["rss_small"].is_null()) {
        c.rss_small = l["rss_small"].get<double>();
      }
      c.converged = l.value("converged", true);
      c.degenerate = l.value("degenerate", false);
      m.subspheres.push_back(std::move(s));
      m.level_choices.push_back(std::move(c));
    }
    m.final_mean = j.at("final_mean").get<double>();
    m.pns_mean = vec_from_json(j.at("pns_mean"), "pns_mean");
    m.cumulative_radii = vec_from_json(j.at("cumulative_radii"), "cumulative_radii");
    m.truncated = j.value("truncated", false);
    m.truncated_level = j.value("truncated_level", 0);
    if (j.contains("warnings")) m.warnings = j["warnings"].get<std::vector<std::string>>();

    const Eigen::VectorXd recomputed = cumulative_radii(m.subspheres, m.ambient_dim);
    if (m.cumulative_radii.size() != recomputed.size() ||
        (m.cumulative_radii - recomputed).cwiseAbs().maxCoeff() > 1e-12) {
      throw IoError("model JSON: cumulative_radii disagree with the level angles");
    }
    if (m.pns_mean.size() != m.ambient_dim + 1) throw IoError("model JSON: pns_mean length");

    if (j.contains("fast_basis") && !j["fast_basis"].is_null()) {
      const auto& b = j["fast_basis"];
      FastPnsBasis basis;
      basis.mean = vec_from_json(b.at("mean"), "mean");
      basis.arithmetic_mean = vec_from_json(b.at("arithmetic_mean"), "arithmetic_mean");
      const auto& loadings = b.at("loadings");
      basis.loadings.resize(basis.mean.size(), static_cast<Eigen::Index>(loadings.size()));
      for (std::size_t c = 0; c < loadings.size(); ++c) {
        const Eigen::VectorXd col = vec_from_json(loadings[c], "loadings");
        if (col.size() != basis.mean.size()) throw IoError("model JSON: loading length");
        basis.loadings.col(static_cast<Eigen::Index>(c)) = col;
      }
      basis.eigenvalues = vec_from_json(b.at("eigenvalues"), "eigenvalues");
      basis.pct_variance = b.value("pct_variance", 0.0);
      if (basis.p() != m.ambient_dim) {
        throw IoError("model JSON: basis has " + std::to_string(basis.p()) +
                      " loadings but the model lives on S^" + std::to_string(m.ambient_dim));
      }
      doc.basis = std::move(basis);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model JSON: ") + e.what());
  }
  return doc;
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace pns
