#include "pns/commands.hpp"

#include <cstdio>
#include <numbers>
#include <sstream>

namespace pns {
namespace {

using nlohmann::ordered_json;

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json level_report(const NestedSphereModel& model) {
  ordered_json levels = ordered_json::array();
  const int d = model.ambient_dim;
  for (int k = 1; k <= d - 1; ++k) {
    const auto& s = model.subspheres[k - 1];
    const auto& c = model.level_choices[k - 1];
    ordered_json l;
    l["level"] = k;
    l["sphere_dim"] = d + 1 - k;
    l["choice"] = c.small ? "small" : "great";
    l["radius"] = s.angle;
    l["sin_radius"] = std::sin(s.angle);
    l["cumulative_radius"] = model.cumulative_radii(d - k);
    if (c.test) {
      l["test"] = std::string(to_string(c.test->test));
      l["statistic"] = std::isfinite(c.test->statistic) ? ordered_json(c.test->statistic)
                                                        : ordered_json(nullptr);
      l["p_value"] = c.test->p_value ? ordered_json(*c.test->p_value) : ordered_json(nullptr);
    }
    l["rss_great"] = c.rss_great;
    l["rss_small"] = c.rss_small ? ordered_json(*c.rss_small) : ordered_json(nullptr);
    levels.push_back(l);
  }
  return levels;
}

std::string text_report(const NestedSphereModel& model, const Eigen::VectorXd& pct,
                        const FastPnsBasis* basis) {
  std::ostringstream out;
  const int d = model.ambient_dim;
  out << "PNS fit on S^" << d << " (mode " << to_string(model.mode) << ", alpha "
      << fixed(model.alpha, 3) << ")\n";
  if (basis) {
    out << "PCA reduction: p = " << basis->p() << ", tangent variance captured "
        << fixed(basis->pct_variance, 2) << "%\n";
  }
  out << "level  sphere  choice  radius      a_k        test  statistic     p-value\n";
  for (int k = 1; k <= d - 1; ++k) {
    const auto& s = model.subspheres[k - 1];
    const auto& c = model.level_choices[k - 1];
    char line[200];
    std::snprintf(line, sizeof line, "%5d  S^%-4d  %-6s  %-10.6f  %-9.6f  %-4s  %-12s  %s\n", k,
                  d + 1 - k, c.small ? "small" : "great", s.angle,
                  model.cumulative_radii(d - k),
                  c.test ? std::string(to_string(c.test->test)).c_str() : "-",
                  c.test ? fixed(c.test->statistic).c_str() : "-",
                  c.test && c.test->p_value ? fixed(*c.test->p_value).c_str() : "-");
    out << line;
  }
  out << "final circle mean: " << fixed(model.final_mean) << "\n";
  out << "variance explained (%):";
  for (Eigen::Index k = 0; k < pct.size(); ++k) out << " PNS" << k + 1 << "=" << fixed(pct(k), 2);
  out << "\n";
  for (const auto& w : model.warnings) out << "warning: " << w << "\n";
  return out.str();
}

Eigen::VectorXd safe_variance_explained(const Eigen::MatrixXd& scores) {
  if (scores.rows() < 2 || scores.array().square().sum() <= 0.0) {
    return Eigen::VectorXd::Zero(scores.cols());
  }
  return variance_explained(scores);
}

OutputFiles fit_outputs(const RunConfig& cfg, const Dataset& data, const PnsFit& fit,
                        const FastPnsResult* fast) {
  const NestedSphereModel& model = fit.model;
  const FastPnsBasis* basis = fast ? &fast->basis : nullptr;
  const Eigen::VectorXd pct = safe_variance_explained(fit.scores);

  OutputFiles files;
  files["model.json"] = dump_json(model_to_json(model, basis));
  files["scores.csv"] = scores_to_csv(fit.scores, data.row_labels);

  ordered_json report;
  report["command"] = fast ? "fastpns" : "fit";
  report["n"] = data.matrix.rows();
  report["ambient_dim"] = data.matrix.cols() - 1;
  report["pns_dim"] = model.ambient_dim;
  report["mode"] = std::string(to_string(model.mode));
  report["alpha"] = model.alpha;
  report["levels"] = level_report(model);
  report["final_mean"] = model.final_mean;
  report["cumulative_radii"] = vec_json(model.cumulative_radii);
  report["variance_explained"] = vec_json(pct);
  report["parameter_count"] = free_parameter_count(model);
  report["truncated"] = model.truncated;
  report["warnings"] = model.warnings;
  if (fast) {
    ordered_json f;
    f["p"] = fast->basis.p();
    f["pct_variance"] = fast->basis.pct_variance;
    f["eigenvalues"] = vec_json(fast->basis.eigenvalues);
    f["max_projection_residual"] = fast->projection_residuals.maxCoeff();
    f["mean_projection_residual"] = fast->projection_residuals.mean();
    report["fast"] = f;
  }
  (void)cfg;
  files["report.json"] = dump_json(report);
  files["report.txt"] = text_report(model, pct, basis);
  return files;
}

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw std::invalid_argument("--alpha must be in (0, 0.5]");
  if (pcs && *pcs < 1) throw std::invalid_argument("--pcs must be >= 1");
  if (grid_points < 3 || grid_points % 2 == 0) {
    throw std::invalid_argument("--grid-points must be odd and >= 3");
  }
}

std::string scores_to_csv(const Eigen::MatrixXd& scores,
                          const std::vector<std::string>& row_labels) {
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < scores.cols(); ++k) header.push_back("pns" + std::to_string(k + 1));
  return matrix_to_csv(scores, header, row_labels);
}

OutputFiles run_fit(const RunConfig& cfg, const Dataset& data) {
  cfg.validate();
  PnsOptions opts;
  opts.mode = cfg.mode;
  opts.alpha = cfg.alpha;
  const PnsFit fit = fit_pns(data.matrix, opts);
  return fit_outputs(cfg, data, fit, nullptr);
}

OutputFiles run_fastpns(const RunConfig& cfg, const Dataset& data) {
  cfg.validate();
  PnsOptions opts;
  opts.mode = cfg.mode;
  opts.alpha = cfg.alpha;
  const FastPnsResult fast = fast_pns(data.matrix, cfg.pcs, opts);
  return fit_outputs(cfg, data, fast.fit, &fast);
}

Eigen::MatrixXd scores_for(const ModelDocument& model, const Eigen::MatrixXd& data) {
  if (model.basis) {
    if (data.cols() != model.basis->mean.size()) {
      throw std::invalid_argument("data have " + std::to_string(data.cols()) +
                                  " columns, model expects " +
                                  std::to_string(model.basis->mean.size()));
    }
    return score_map_rows(project_reduced_rows(data, *model.basis), model.model);
  }
  if (data.cols() != model.model.ambient_dim + 1) {
    throw std::invalid_argument("data have " + std::to_string(data.cols()) +
                                " columns, model expects " +
                                std::to_string(model.model.ambient_dim + 1));
  }
  return score_map_rows(data, model.model);
}

OutputFiles run_scores(const ModelDocument& model, const Dataset& data) {
  OutputFiles files;
  files["scores.csv"] = scores_to_csv(scores_for(model, data.matrix), data.row_labels);
  return files;
}

OutputFiles run_biplot(const RunConfig& cfg, const ModelDocument& model, const Dataset& data) {
  cfg.validate();
  const Eigen::MatrixXd scores = scores_for(model, data.matrix);
  BiplotOptions opts;
  opts.grid_points = cfg.grid_points;
  const BiplotResult bp =
      backfit_paths(model.model, scores, model.basis ? &*model.basis : nullptr, opts);
  const BiplotDocuments docs = emit_biplot(bp, scores, data.row_labels, data.col_labels);

  const int k = static_cast<int>(std::min<std::size_t>(bp.paths.size(), 20));
  const auto ranked = rank_variables(bp.paths, k);
  std::string ranking = "rank,variable,name,path_length\r\n";
  for (int i = 0; i < k; ++i) {
    const int v = ranked[i];
    const std::string name =
        static_cast<std::size_t>(v) < data.col_labels.size() ? data.col_labels[v] : "";
    ranking += std::to_string(i + 1) + "," + std::to_string(v) + "," + csv_escape(name) + "," +
               format_double(bp.paths[v].path_length) + "\r\n";
  }

  OutputFiles files;
  files["biplot.svg"] = docs.svg;
  files["biplot_paths.csv"] = docs.paths_csv;
  files["biplot_scores.csv"] = docs.scores_csv;
  files["biplot_ranking.csv"] = ranking;
  return files;
}

OutputFiles run_simulate(const SimulationConfig& cfg) {
  const Simulation sim = simulate(cfg);
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < sim.data.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  OutputFiles files;
  files["data.csv"] = matrix_to_csv(sim.data, header);
  ordered_json truth = model_to_json(sim.truth);
  truth["simulation"] = {{"n", cfg.n},
                         {"noise_sd", cfg.noise_sd},
                         {"circle_sd", cfg.circle_sd},
                         {"seed", cfg.seed}};
  files["truth.json"] = dump_json(truth);
  files["residuals.csv"] = scores_to_csv(sim.residuals);
  return files;
}

OutputFiles run_calibrate(const CalibrationConfig& cfg) {
  if (cfg.replicates < 100) throw std::invalid_argument("--replicates must be >= 100");
  const CalibrationReport rep = calibrate(cfg);
  ordered_json j;
  j["test"] = std::string(to_string(rep.test));
  j["replicates"] = rep.replicates;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["noise_sd"] = cfg.noise_sd;
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  j["rejections"] = rep.rejections;
  j["rejection_rate"] = rep.rejection_rate;
  j["p_value_uniform_ks"] = rep.p_uniform_ks;
  OutputFiles files;
  files["calibration.json"] = dump_json(j);
  std::string p_csv = "replicate,p_value\r\n";
  for (std::size_t i = 0; i < rep.p_values.size(); ++i) {
    p_csv += std::to_string(i + 1) + "," + format_double(rep.p_values[i]) + "\r\n";
  }
  files["calibration_pvalues.csv"] = p_csv;
  return files;
}

void write_outputs(const std::filesystem::path& dir, const OutputFiles& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& [name, contents] : files) write_file_atomic(dir / name, contents);
}

}  // namespace pns
