#include "pns/commands.hpp"
#include "pns/io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace pns;
using namespace pns::testing;

TEST_CASE("CSV parsing follows RFC 4180") {
  const auto recs = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0][1] == "b,c");
  CHECK(recs[0][2] == "say \"hi\"");
  CHECK(recs[1] == std::vector<std::string>{"1", "2", "3"});
  CHECK(parse_csv("x,\"multi\nline\"\n")[0][1] == "multi\nline");
  CHECK_THROWS_AS(parse_csv("\"open"), IoError);
}

TEST_CASE("datasets") {
  SUBCASE("normalization") {
    const Dataset ds = parse_dataset("1,0,0\n0,2,0\n", true);
    REQUIRE(ds.matrix.rows() == 2);
    CHECK((ds.matrix.row(0) - Eigen::RowVector3d(1, 0, 0)).norm() == 0.0);
    CHECK((ds.matrix.row(1) - Eigen::RowVector3d(0, 1, 0)).norm() == 0.0);
    CHECK(ds.normalized);
    const Dataset raw = parse_dataset("1,0,0\n0,2,0\n", false);
    CHECK(raw.matrix(1, 1) == 2.0);
  }
  SUBCASE("zero rows are named") {
    try {
      parse_dataset("1,0\n0,0\n", true);
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("observation 2") != std::string::npos);
    }
  }
  SUBCASE("headers and labels") {
    const Dataset ds = parse_dataset("id,g1,g2\ns1,1,2\ns2,3,4\n", false);
    CHECK(ds.col_labels == std::vector<std::string>{"g1", "g2"});
    CHECK(ds.row_labels == std::vector<std::string>{"s1", "s2"});
    CHECK(ds.matrix(1, 0) == 3.0);
    const Dataset t = parse_dataset("g1,g2,g3\n1,2,3\n4,5,6\n", false, true);
    CHECK(t.matrix.rows() == 3);
    CHECK(t.matrix(2, 1) == 6.0);
    CHECK(t.row_labels == std::vector<std::string>{"g1", "g2", "g3"});
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_dataset("1,2\n3\n", false), IoError);
    CHECK_THROWS_AS(parse_dataset("1,2\n3,x\n", false), IoError);
    CHECK_THROWS_AS(parse_dataset("1,2\n3,inf\n", false), IoError);
    CHECK_THROWS_AS(parse_dataset("", false), IoError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", true), IoError);
  }
}

TEST_CASE("number formatting round trips") {
  Rng rng(601);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.uniform() * 40) - 20);
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("q\"") == "\"q\"\"\"");
}

TEST_CASE("model JSON round trip") {
  Rng rng(602);
  for (SelectionMode mode : {SelectionMode::small, SelectionMode::lr, SelectionMode::bic}) {
    const Eigen::MatrixXd data = random_cloud(rng, 4, 40, 0.4);
    PnsOptions opts;
    opts.mode = mode;
    const PnsFit fit = fit_pns(data, opts);
    const std::string text = dump_json(model_to_json(fit.model));
    const ModelDocument doc = model_from_json(nlohmann::ordered_json::parse(text));
    CHECK_FALSE(doc.basis.has_value());
    CHECK(doc.model.mode == mode);
    CHECK(max_abs(score_map_rows(data, doc.model) - fit.scores) < 1e-10);
    CHECK(dump_json(model_to_json(doc.model)) == text);
  }

  const Eigen::MatrixXd wide = random_cloud(rng, 9, 30, 0.3);
  const FastPnsResult fast = fast_pns(wide, 3);
  const std::string text = dump_json(model_to_json(fast.fit.model, &fast.basis));
  const ModelDocument doc = model_from_json(nlohmann::ordered_json::parse(text));
  REQUIRE(doc.basis.has_value());
  CHECK(doc.basis->p() == 3);
  CHECK(max_abs(scores_for(doc, wide) - fast.fit.scores) < 1e-10);

  auto broken = nlohmann::ordered_json::parse(text);
  broken["cumulative_radii"][0] = 0.123;
  CHECK_THROWS_AS(model_from_json(broken), IoError);
  broken = nlohmann::ordered_json::parse(text);
  broken.erase("levels");
  CHECK_THROWS_AS(model_from_json(broken), IoError);
}

TEST_CASE("atomic writes and CSV output") {
  const auto dir = std::filesystem::temp_directory_path() / "pns_io_test";
  std::filesystem::remove_all(dir);
  write_outputs(dir, {{"a.txt", "hello"}, {"b.csv", "x\r\n"}});
  CHECK(read_file(dir / "a.txt") == "hello");
  CHECK(!std::filesystem::exists(dir / "a.txt.tmp"));
  write_file_atomic(dir / "a.txt", "again");
  CHECK(read_file(dir / "a.txt") == "again");
  std::filesystem::remove_all(dir);

  Eigen::MatrixXd m(2, 2);
  m << 0.1, -2, 3e-300, 4;
  const std::string csv = matrix_to_csv(m, {"p", "q"}, {"r1", "r,2"});
  const Dataset back = parse_dataset(csv, false);
  CHECK(back.matrix == m);
  CHECK(back.row_labels == std::vector<std::string>{"r1", "r,2"});
  CHECK(back.col_labels == std::vector<std::string>{"p", "q"});
}

TEST_CASE("pipeline round trip through the scores file") {
  Rng rng(603);
  Dataset ds;
  ds.matrix = random_cloud(rng, 3, 30, 0.5);
  RunConfig cfg;
  const OutputFiles files = run_fit(cfg, ds);
  const ModelDocument doc = model_from_json(nlohmann::ordered_json::parse(files.at("model.json")));
  const Dataset scores = parse_dataset(files.at("scores.csv"), false);
  CHECK(scores.col_labels == std::vector<std::string>{"pns1", "pns2", "pns3"});
  for (Eigen::Index i = 0; i < ds.matrix.rows(); ++i) {
    const Eigen::VectorXd x = inverse_score_map(scores.matrix.row(i).transpose(), doc.model);
    CHECK((x - ds.matrix.row(i).transpose()).norm() < 1e-6);
  }
}

TEST_CASE("commands") {
  Rng rng(604);
  SimulationConfig sim;
  sim.d = 2;
  sim.n = 150;
  sim.radii = {0.6};
  sim.seed = 5;
  const OutputFiles simulated = run_simulate(sim);
  CHECK(run_simulate(sim) == simulated);
  const Dataset data = parse_dataset(simulated.at("data.csv"), true);

  RunConfig cfg;
  const OutputFiles fit = run_fit(cfg, data);
  CHECK(run_fit(cfg, data) == fit);
  const auto report = nlohmann::ordered_json::parse(fit.at("report.json"));
  CHECK(std::abs(report["levels"][0]["radius"].get<double>() - 0.6) < 0.02);
  CHECK(fit.at("report.txt").find("small") != std::string::npos);

  cfg.mode = SelectionMode::great;
  const auto great = nlohmann::ordered_json::parse(run_fit(cfg, data).at("report.json"));
  for (const auto& a : great["cumulative_radii"]) CHECK(a.get<double>() == 1.0);

  const ModelDocument doc = model_from_json(nlohmann::ordered_json::parse(fit.at("model.json")));
  CHECK(run_scores(doc, data).at("scores.csv") == fit.at("scores.csv"));
  const OutputFiles bp = run_biplot(cfg, doc, data);
  CHECK(bp.count("biplot.svg") == 1);
  CHECK(bp.at("biplot_ranking.csv").rfind("rank,variable,name,path_length", 0) == 0);

  Dataset narrow;
  narrow.matrix = random_cloud(rng, 3, 10, 0.3);
  CHECK_THROWS_AS(run_scores(doc, narrow), std::invalid_argument);
  CHECK_THROWS_AS(run_biplot(cfg, doc, narrow), std::invalid_argument);

  RunConfig bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(run_fit(bad, data), std::invalid_argument);

  CalibrationConfig cal;
  cal.test = SelectionMode::lr;
  cal.replicates = 100;
  const OutputFiles c1 = run_calibrate(cal);
  CHECK(run_calibrate(cal) == c1);
  cal.replicates = 10;
  CHECK_THROWS_AS(run_calibrate(cal), std::invalid_argument);
  cal.replicates = 100;
  cal.test = SelectionMode::bic;
  CHECK_THROWS_AS(run_calibrate(cal), std::invalid_argument);
}
