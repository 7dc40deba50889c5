#include "pns/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <numbers>

namespace {

using namespace pns;

void print_files(const std::filesystem::path& dir, const OutputFiles& files) {
  for (const auto& [name, contents] : files) {
    std::cout << "wrote " << (dir / name).string() << " (" << contents.size() << " bytes)\n";
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(',', pos);
    const std::string tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
    out.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal nested spheres"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string mode = "small";
  std::string input;
  std::string model_path;
  int pcs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", input, "Data CSV (rows are observations)")->required();
    sub->add_option("-o,--out-dir", cfg.out_dir, "Output directory");
    sub->add_flag("--normalize,!--no-normalize", cfg.normalize,
                  "Scale rows to unit norm (default on)");
    sub->add_flag("--transpose", cfg.transpose, "Columns are observations");
  };
  auto add_fit = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--mode", mode, "small|great|ks|var|lr|bic");
    sub->add_option("--alpha", cfg.alpha, "Significance level for test modes");
  };

  auto* fit = app.add_subcommand("fit", "Fit PNS directly");
  add_fit(fit);

  auto* fast = app.add_subcommand("fastpns", "PCA reduction followed by PNS");
  add_fit(fast);
  fast->add_option("--pcs", pcs, "Number of principal components (default: 95% rule)");

  auto* scores = app.add_subcommand("scores", "Score data under a stored model");
  add_common(scores);
  scores->add_option("-m,--model", model_path, "model.json")->required();

  auto* biplot = app.add_subcommand("biplot", "Back-fitted variable paths");
  add_common(biplot);
  biplot->add_option("-m,--model", model_path, "model.json")->required();
  biplot->add_option("--grid-points", cfg.grid_points, "Odd number of grid points");

  SimulationConfig sim;
  std::string radii;
  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic PNS population");
  simulate->add_option("-o,--out-dir", cfg.out_dir, "Output directory");
  simulate->add_option("--dim", sim.d, "Sphere dimension d");
  simulate->add_option("--n", sim.n, "Sample size");
  simulate->add_option("--radii", radii, "Comma-separated r_1..r_{d-1} (default pi/2)");
  simulate->add_option("--noise-sd", sim.noise_sd, "Residual sd at each level");
  simulate->add_option("--circle-sd", sim.circle_sd, "Sd of the final circle residual");
  simulate->add_option("--final-mean", sim.final_mean, "Mean angle on the final circle");
  simulate->add_option("--seed", sim.seed, "Random seed");

  CalibrationConfig cal;
  std::string cal_test = "var";
  auto* calibrate = app.add_subcommand("calibrate", "Null rejection rate of a level test");
  calibrate->add_option("-o,--out-dir", cfg.out_dir, "Output directory");
  calibrate->add_option("--test", cal_test, "ks|var|lr");
  calibrate->add_option("--replicates", cal.replicates, "Monte Carlo replicates");
  calibrate->add_option("--n", cal.n, "Sample size");
  calibrate->add_option("--dim", cal.d, "Sphere dimension d");
  calibrate->add_option("--noise-sd", cal.noise_sd, "Residual sd");
  calibrate->add_option("--alpha", cal.alpha, "Nominal level");
  calibrate->add_option("--seed", cal.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    OutputFiles files;
    if (fit->parsed() || fast->parsed()) {
      cfg.mode = parse_selection_mode(mode);
      if (fast->parsed() && pcs > 0) cfg.pcs = pcs;
      cfg.validate();
      const Dataset data = load_csv(input, cfg.normalize, cfg.transpose);
      try {
        files = fit->parsed() ? run_fit(cfg, data) : run_fastpns(cfg, data);
      } catch (const std::exception& e) {
        std::cerr << "pns: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
      }
      std::cout << files.at("report.txt");
    } else if (scores->parsed() || biplot->parsed()) {
      const Dataset data = load_csv(input, cfg.normalize, cfg.transpose);
      const ModelDocument doc =
          model_from_json(nlohmann::ordered_json::parse(read_file(model_path)));
      files = scores->parsed() ? run_scores(doc, data) : run_biplot(cfg, doc, data);
      if (biplot->parsed()) std::cout << files.at("biplot_ranking.csv");
    } else if (simulate->parsed()) {
      sim.radii = parse_list(radii);
      if (sim.radii.empty()) sim.radii.assign(sim.d > 1 ? sim.d - 1 : 0, std::numbers::pi / 2);
      files = run_simulate(sim);
    } else if (calibrate->parsed()) {
      cal.test = parse_selection_mode(cal_test);
      files = run_calibrate(cal);
      std::cout << files.at("calibration.json");
    }
    write_outputs(cfg.out_dir, files);
    print_files(cfg.out_dir, files);
    return kExitOk;
  } catch (const IoError& e) {
    std::cerr << "pns: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "pns: invalid model file: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pns: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pns: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
