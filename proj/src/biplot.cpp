#include "pns/biplot.hpp"

#include "pns/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pns {
namespace {

constexpr double kPanel = 480.0;
constexpr double kMargin = 40.0;

double sample_sd(const Eigen::VectorXd& x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt((x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1));
}

double polyline_length(const std::vector<double>& x, const std::vector<double>& y) {
  double len = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) len += std::hypot(x[i] - x[i - 1], y[i] - y[i - 1]);
  return len;
}

// Rainbow ramp: red for the first variable through violet for the last.
std::string ramp_colour(std::size_t index, std::size_t count) {
  const double t = count > 1 ? static_cast<double>(index) / static_cast<double>(count - 1) : 0.0;
  std::ostringstream ss;
  ss << "hsl(" << static_cast<int>(std::lround(270.0 * t)) << ",90%,45%)";
  return ss.str();
}

struct Mapper {
  double origin_x;
  double origin_y;
  double half_range;
  [[nodiscard]] double px(double x) const {
    return origin_x + kMargin + (x + half_range) / (2 * half_range) * (kPanel - 2 * kMargin);
  }
  [[nodiscard]] double py(double y) const {
    return origin_y + kMargin + (half_range - y) / (2 * half_range) * (kPanel - 2 * kMargin);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string symbol(int kind, double x, double y, const std::string& colour) {
  const std::string cx = fmt(x);
  const std::string cy = fmt(y);
  switch (kind % 4) {
    case 0:
      return "<circle cx=\"" + cx + "\" cy=\"" + cy + "\" r=\"3\" fill=\"none\" stroke=\"" +
             colour + "\"/>";
    case 1:
      return "<polygon points=\"" + fmt(x) + "," + fmt(y - 4) + " " + fmt(x - 3.5) + "," +
             fmt(y + 3) + " " + fmt(x + 3.5) + "," + fmt(y + 3) + "\" fill=\"none\" stroke=\"" +
             colour + "\"/>";
    case 2:
      return "<path d=\"M" + fmt(x - 3) + "," + fmt(y - 3) + "L" + fmt(x + 3) + "," + fmt(y + 3) +
             "M" + fmt(x - 3) + "," + fmt(y + 3) + "L" + fmt(x + 3) + "," + fmt(y - 3) +
             "\" stroke=\"" + colour + "\"/>";
    default:
      return "<rect x=\"" + fmt(x - 3) + "\" y=\"" + fmt(y - 3) +
             "\" width=\"6\" height=\"6\" fill=\"none\" stroke=\"" + colour + "\"/>";
  }
}

}  // namespace

BiplotResult backfit_paths(const NestedSphereModel& model, const Eigen::MatrixXd& scores,
                           const FastPnsBasis* basis, const BiplotOptions& opts) {
  const int d = model.ambient_dim;
  if (opts.grid_points < 3 || opts.grid_points % 2 == 0) {
    throw std::invalid_argument("backfit_paths: grid_points must be odd and >= 3");
  }
  if (scores.cols() != d) throw std::invalid_argument("backfit_paths: score matrix width");
  if (opts.component_x < 1 || opts.component_y < 1 || opts.component_x == opts.component_y) {
    throw std::invalid_argument("backfit_paths: invalid score components");
  }
  if (basis && basis->p() != d) throw std::invalid_argument("backfit_paths: basis dimension");

  BiplotResult out;
  out.component_x = opts.component_x;
  out.component_y = opts.component_y;

  auto lift = [&](const Eigen::VectorXd& g) -> Eigen::VectorXd {
    return basis ? lift_exact(g, *basis) : g;
  };
  const Eigen::VectorXd centre = lift(inverse_score_map(Eigen::VectorXd::Zero(d), model));
  const Eigen::Index vars = centre.size();

  const int g = opts.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(g));
  const int half = g / 2;
  for (int i = 0; i < g; ++i) grid[i] = 2.0 * static_cast<double>(i - half) / half;

  // Rows: grid position; columns: original variables.
  auto sweep = [&](int component, double& sd) {
    Eigen::MatrixXd curve = Eigen::MatrixXd::Zero(g, vars);
    if (component > d) {
      sd = 0.0;
      return curve;
    }
    sd = sample_sd(scores.col(component - 1));
    const auto [lo, hi] = score_interval(model, component);
    for (int i = 0; i < g; ++i) {
      double lambda = grid[i] * sd;
      if (lambda < lo || lambda > hi) {
        lambda = std::clamp(lambda, lo, hi);
        out.clipped = true;
      }
      Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
      s(component - 1) = lambda;
      curve.row(i) = (lift(inverse_score_map(s, model)) - centre).transpose();
    }
    return curve;
  };
  const Eigen::MatrixXd xs = sweep(opts.component_x, out.sd_x);
  const Eigen::MatrixXd ys = sweep(opts.component_y, out.sd_y);

  out.paths.reserve(static_cast<std::size_t>(vars));
  for (Eigen::Index v = 0; v < vars; ++v) {
    BiplotPath p;
    p.variable_index = static_cast<int>(v);
    p.lambda_grid = grid;
    p.x_path.resize(static_cast<std::size_t>(g));
    p.y_path.resize(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) {
      p.x_path[i] = xs(i, v);
      p.y_path[i] = ys(i, v);
    }
    p.path_length = polyline_length(p.x_path, p.y_path);
    out.paths.push_back(std::move(p));
  }
  return out;
}

std::vector<int> rank_variables(const std::vector<BiplotPath>& paths, int k) {
  if (paths.empty()) throw std::invalid_argument("rank_variables: no paths");
  if (k < 0 || static_cast<std::size_t>(k) > paths.size()) {
    throw std::invalid_argument("rank_variables: k exceeds the number of variables");
  }
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (paths[a].path_length != paths[b].path_length) {
      return paths[a].path_length > paths[b].path_length;
    }
    return paths[a].variable_index < paths[b].variable_index;
  });
  std::vector<int> out;
  for (int i = 0; i < k; ++i) out.push_back(paths[order[i]].variable_index);
  return out;
}

BiplotDocuments emit_biplot(const BiplotResult& biplot, const Eigen::MatrixXd& scores,
                            const std::vector<std::string>& labels,
                            const std::vector<std::string>& variable_names) {
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(scores.rows())) {
    throw std::invalid_argument("emit_biplot: one label per score row required");
  }
  const int cx = biplot.component_x - 1;
  const int cy = biplot.component_y - 1;
  auto score_at = [&](Eigen::Index i, int c) {
    return c < scores.cols() ? scores(i, c) : 0.0;
  };

  BiplotDocuments docs;

  // CSV companions.
  docs.paths_csv = "variable,lambda,x,y\r\n";
  for (const auto& p : biplot.paths) {
    for (std::size_t i = 0; i < p.lambda_grid.size(); ++i) {
      docs.paths_csv += std::to_string(p.variable_index) + "," + format_double(p.lambda_grid[i]) +
                        "," + format_double(p.x_path[i]) + "," + format_double(p.y_path[i]) +
                        "\r\n";
    }
  }
  docs.scores_csv = "row,pns" + std::to_string(biplot.component_x) + ",pns" +
                    std::to_string(biplot.component_y) + ",label\r\n";
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    docs.scores_csv += std::to_string(i + 1) + "," + format_double(score_at(i, cx)) + "," +
                       format_double(score_at(i, cy)) + "," +
                       (labels.empty() ? std::string() : csv_escape(labels[i])) + "\r\n";
  }

  // SVG.
  double path_range = 0.0;
  for (const auto& p : biplot.paths) {
    for (std::size_t i = 0; i < p.x_path.size(); ++i) {
      path_range = std::max({path_range, std::abs(p.x_path[i]), std::abs(p.y_path[i])});
    }
  }
  if (path_range <= 0.0) path_range = 1.0;
  path_range *= 1.05;
  double score_range = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    score_range = std::max({score_range, std::abs(score_at(i, cx)), std::abs(score_at(i, cy))});
  }
  if (score_range <= 0.0) score_range = 1.0;
  score_range *= 1.05;

  const Mapper left{0.0, 0.0, path_range};
  const Mapper right{kPanel, 0.0, score_range};
  const std::string px_label = "PNS" + std::to_string(biplot.component_x);
  const std::string py_label = "PNS" + std::to_string(biplot.component_y);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << 2 * kPanel
      << "\" height=\"" << kPanel << "\" viewBox=\"0 0 " << 2 * kPanel << " " << kPanel
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << 2 * kPanel << "\" height=\"" << kPanel
      << "\" fill=\"white\"/>\n";

  auto axes = [&](const Mapper& m, const std::string& title) {
    svg << "<g class=\"axes\" stroke=\"#888\" stroke-width=\"0.5\">"
        << "<line x1=\"" << fmt(m.px(-m.half_range)) << "\" y1=\"" << fmt(m.py(0)) << "\" x2=\""
        << fmt(m.px(m.half_range)) << "\" y2=\"" << fmt(m.py(0)) << "\"/>"
        << "<line x1=\"" << fmt(m.px(0)) << "\" y1=\"" << fmt(m.py(-m.half_range)) << "\" x2=\""
        << fmt(m.px(0)) << "\" y2=\"" << fmt(m.py(m.half_range)) << "\"/></g>\n"
        << "<text x=\"" << fmt(m.origin_x + kPanel / 2) << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"13\">" << title << "</text>\n"
        << "<text x=\"" << fmt(m.origin_x + kPanel / 2) << "\" y=\"" << fmt(kPanel - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << px_label
        << "</text>\n"
        << "<text x=\"" << fmt(m.origin_x + 12) << "\" y=\"" << fmt(kPanel / 2)
        << "\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 "
        << fmt(m.origin_x + 12) << " " << fmt(kPanel / 2) << ")\">" << py_label << "</text>\n";
  };

  axes(left, "Back-fitted variable paths");
  svg << "<g class=\"paths\" fill=\"none\" stroke-width=\"1\">\n";
  for (std::size_t v = 0; v < biplot.paths.size(); ++v) {
    const auto& p = biplot.paths[v];
    const std::string colour = ramp_colour(v, biplot.paths.size());
    const std::string name = v < variable_names.size() ? variable_names[v]
                                                       : std::to_string(p.variable_index);
    svg << "<polyline data-variable=\"" << p.variable_index << "\" stroke=\"" << colour
        << "\" points=\"";
    for (std::size_t i = 0; i < p.x_path.size(); ++i) {
      if (i) svg << ' ';
      svg << fmt(left.px(p.x_path[i])) << ',' << fmt(left.py(p.y_path[i]));
    }
    svg << "\"><title>" << xml_escape(name) << "</title></polyline>\n";

    // Arrowhead at the +2 sd end, pointing along the final segment.
    const std::size_t last = p.x_path.size() - 1;
    const double tx = left.px(p.x_path[last]);
    const double ty = left.py(p.y_path[last]);
    double dx = tx - left.px(p.x_path[last - 1]);
    double dy = ty - left.py(p.y_path[last - 1]);
    const double len = std::hypot(dx, dy);
    if (len > 1e-9) {
      dx /= len;
      dy /= len;
    } else {
      dx = 1.0;
      dy = 0.0;
    }
    const double bx = tx - 6.0 * dx;
    const double by = ty - 6.0 * dy;
    svg << "<polygon class=\"arrowhead\" data-variable=\"" << p.variable_index << "\" data-x=\""
        << format_double(p.x_path[last]) << "\" data-y=\"" << format_double(p.y_path[last])
        << "\" fill=\"" << colour << "\" stroke=\"none\" points=\"" << fmt(tx) << ',' << fmt(ty)
        << ' ' << fmt(bx - 3.0 * dy) << ',' << fmt(by + 3.0 * dx) << ' ' << fmt(bx + 3.0 * dy)
        << ',' << fmt(by - 3.0 * dx) << "\"/>\n";
  }
  svg << "</g>\n";

  axes(right, "PNS scores");
  std::map<std::string, int> groups;
  for (const auto& l : labels) groups.emplace(l, 0);
  int next = 0;
  for (auto& [name, id] : groups) id = next++;
  static const char* kGroupColours[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  svg << "<g class=\"scores\" stroke-width=\"1\">\n";
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const int group = labels.empty() ? 0 : groups[labels[i]];
    const std::string colour = labels.empty() ? "#333333" : kGroupColours[group % 8];
    svg << symbol(labels.empty() ? 0 : group, right.px(score_at(i, cx)), right.py(score_at(i, cy)),
                  colour)
        << "\n";
  }
  svg << "</g>\n";
  if (!labels.empty()) {
    double y = 40.0;
    svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (const auto& [name, id] : groups) {
      svg << symbol(id, 2 * kPanel - 120.0, y - 4.0, kGroupColours[id % 8]) << "<text x=\""
          << fmt(2 * kPanel - 110.0) << "\" y=\"" << fmt(y) << "\">" << xml_escape(name) << "</text>\n";
      y += 16.0;
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  docs.svg = svg.str();
  return docs;
}

std::vector<BiplotPath> parse_paths_csv(const std::string& text) {
  const auto records = parse_csv(text);
  if (records.empty()) throw IoError("paths CSV: empty");
  std::vector<BiplotPath> out;
  std::map<int, std::size_t> index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != 4) throw IoError("paths CSV: expected 4 fields");
    const int var = std::stoi(rec[0]);
    auto it = index.find(var);
    if (it == index.end()) {
      it = index.emplace(var, out.size()).first;
      out.emplace_back();
      out.back().variable_index = var;
    }
    BiplotPath& p = out[it->second];
    p.lambda_grid.push_back(std::strtod(rec[1].c_str(), nullptr));
    p.x_path.push_back(std::strtod(rec[2].c_str(), nullptr));
    p.y_path.push_back(std::strtod(rec[3].c_str(), nullptr));
  }
  for (auto& p : out) p.path_length = polyline_length(p.x_path, p.y_path);
  return out;
}

}  // namespace pns
