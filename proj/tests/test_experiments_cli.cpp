#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "activeset/cli.hpp"
#include "activeset/experiments.hpp"
#include "activeset/png.hpp"
#include "activeset/report.hpp"

using namespace activeset;

namespace {

GridConfig tiny_grid() {
  GridConfig gc;
  gc.problem = "f1";
  gc.half_width = 0.04;
  gc.resolution = 5;
  gc.noise_levels = {0.0, 1e-2};
  gc.trials = 4;
  gc.seed = 17;
  gc.threads = 2;
  return gc;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run_grid is deterministic and exact cells are 0/1 valued") {
  GridConfig gc = tiny_grid();
  std::vector<GridCell> a = run_grid(gc);
  gc.threads = 1;
  std::vector<GridCell> b = run_grid(gc);
  REQUIRE(a.size() == b.size());
  CHECK(heatmap_csv_text(a) == heatmap_csv_text(b));
  for (const GridCell& c : a)
    if (c.eps == 0.0) CHECK((c.lp_fraction == 0.0 || c.lp_fraction == 1.0));
}

TEST_CASE("exact cells in the tight f1 neighborhood: QP always succeeds") {
  // The LP rule over-includes the inactive constraint at cells strictly
  // inside the feasible region, so only the QP fraction is pinned to 1 here.
  GridConfig gc = tiny_grid();
  gc.noise_levels = {0.0};
  for (const GridCell& c : run_grid(gc)) CHECK(c.qp_fraction == 1.0);
}

TEST_CASE("run_grid validates its configuration") {
  GridConfig gc = tiny_grid();
  gc.resolution = 1;
  CHECK_THROWS_AS(run_grid(gc), std::invalid_argument);
  gc = tiny_grid();
  gc.half_width = 0.0;
  CHECK_THROWS_AS(run_grid(gc), std::invalid_argument);
}

TEST_CASE("success_statistics averages per noise level") {
  std::vector<GridCell> cells = {
      {0.0, 0.0, 0.0, 1.0, 1.0},
      {0.01, 0.0, 0.0, 0.0, 1.0},
      {5.0, 5.0, 0.0, 0.0, 0.0},  // outside the radius
  };
  auto stats = success_statistics(cells, 0.1, Vec{0.0, 0.0});
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].count == 2);
  CHECK(stats[0].lp_mean == doctest::Approx(0.5));
  CHECK(stats[0].qp_mean == doctest::Approx(1.0));
  CHECK_THROWS_AS(success_statistics(cells, 0.1, Vec{100.0, 100.0}), std::runtime_error);
}

TEST_CASE("zero-noise trajectory equals exact-mode trajectory") {
  TrajectoryConfig tc;
  tc.problem = "f1";
  tc.max_iters = 40;
  tc.eps = 0.0;
  tc.trials = 10;
  std::vector<TraceRecord> a = run_trajectory(tc);
  tc.trials = 1;
  std::vector<TraceRecord> b = run_trajectory(tc);
  REQUIRE(a.size() == b.size());
  CHECK(trajectory_csv_text(a) == trajectory_csv_text(b));
}

TEST_CASE("exact trajectory on f1 ends with correct identification") {
  TrajectoryConfig tc;
  tc.problem = "f1";
  std::vector<TraceRecord> trace = run_trajectory(tc);
  REQUIRE_FALSE(trace.empty());
  CHECK(trace.back().lp_exact_fraction == 1.0);
  CHECK(trace.back().qp_exact_fraction == 1.0);
}

TEST_CASE("heatmap CSV golden bytes for a hand-built cell") {
  std::vector<GridCell> cells = {{0.5, 0.25, 0.0, 1.0, 0.5}};
  CHECK(heatmap_csv_text(cells) ==
        "x1,x2,method,eps,success_fraction\n"
        "0.5,0.25,lp,0,1\n"
        "0.5,0.25,qp,0,0.5\n");
  CHECK_THROWS_AS(heatmap_csv_text({}), std::invalid_argument);
}

TEST_CASE("heatmap CSV rows are sorted by method, eps, x1, x2") {
  std::vector<GridCell> cells = {
      {1.0, 0.0, 1e-2, 1.0, 1.0},
      {0.0, 0.0, 0.0, 1.0, 1.0},
  };
  const std::string text = heatmap_csv_text(cells);
  CHECK(text.find("0,0,lp,0,1\n") < text.find("1,0,lp,0.01,1\n"));
  CHECK(text.find("1,0,lp,0.01,1\n") < text.find("0,0,qp,0,1\n"));
}

TEST_CASE("format_double round-trips 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.2957) == "-0.29570000000000002");
}

TEST_CASE("heatmap CSV writes, parses, and rejects malformed input") {
  const std::string path = "test_heatmap_tmp.csv";
  std::vector<GridCell> cells = {{0.1, 0.2, 0.0, 1.0, 0.0}};
  emit_heatmap_csv(cells, path);
  ParsedHeatmap hm = parse_heatmap_csv(path);
  REQUIRE(hm.x1.size() == 2);
  CHECK(hm.method[0] == "lp");
  CHECK(hm.fraction[0] == 1.0);

  write_file("x1,x2,method,eps,success_fraction\n1,2,lp\n", path);
  CHECK_THROWS_AS(parse_heatmap_csv(path), csv_parse_error);
  write_file("wrong,header\n", path);
  CHECK_THROWS_AS(parse_heatmap_csv(path), csv_parse_error);
  std::remove(path.c_str());
}

TEST_CASE("render_heatmap produces PNG files with the PNG signature") {
  const std::string csv = "test_render_tmp.csv";
  GridConfig gc = tiny_grid();
  gc.noise_levels = {0.0};
  emit_heatmap_csv(run_grid(gc), csv);
  auto files = render_heatmap(csv, "test_render_tmp.png", -0.2957, 0.4126);
  REQUIRE(files.size() == 2);  // one per method
  for (const std::string& f : files) {
    const std::string bytes = slurp(f);
    REQUIRE(bytes.size() > 8);
    CHECK(static_cast<unsigned char>(bytes[0]) == 0x89);
    CHECK(bytes.substr(1, 3) == "PNG");
    std::remove(f.c_str());
  }
  std::remove(csv.c_str());
}

TEST_CASE("parse_config applies documented defaults") {
  RunConfig cfg = parse_config({"heatmap"});
  CHECK(cfg.lp.M == 1e8);
  CHECK(cfg.lp.beta == 0.7071);
  CHECK(cfg.lp.sigma == 0.7);
  CHECK(cfg.qp.nu == 100.0);
  CHECK(cfg.qp.theta == 5.0);
  CHECK(cfg.eps_levels == std::vector<double>{0.0});
  CHECK(cfg.trials == 8);
  CHECK(cfg.resolution == 81);
}

TEST_CASE("flags override config-file values") {
  const std::string path = "test_config_tmp.cfg";
  write_file("theta = 5\nproblem = f2\n# comment\n", path);
  RunConfig cfg = parse_config({"heatmap", "--config", path, "--theta", "2"});
  CHECK(cfg.qp.theta == 2.0);
  CHECK(cfg.problem == "f2");
  std::remove(path.c_str());
}

TEST_CASE("parse_config rejects bad input") {
  CHECK_THROWS_AS(parse_config({}), usage_error);
  CHECK_THROWS_AS(parse_config({"frobnicate"}), usage_error);
  CHECK_THROWS_AS(parse_config({"heatmap", "--sigma", "1.5"}), usage_error);
  CHECK_THROWS_AS(parse_config({"heatmap", "--sigma", "abc"}), usage_error);
  CHECK_THROWS_AS(parse_config({"heatmap", "--wibble", "1"}), usage_error);
  CHECK_THROWS_AS(parse_config({"heatmap", "--theta"}), usage_error);
  const std::string path = "test_config_bad_tmp.cfg";
  write_file("unknown_key = 1\n", path);
  CHECK_THROWS_AS(parse_config({"heatmap", "--config", path}), usage_error);
  std::remove(path.c_str());
}

TEST_CASE("cli identify prints both estimates at the f1 minimizer") {
  TestProblem tp = make_parabola_problem("f1");
  std::ostringstream out, err;
  const int rc = cli_main({"identify", "--problem", "f1", "--x",
                           format_double(tp.x_star[0]) + "," + format_double(tp.x_star[1])},
                          out, err);
  CHECK(rc == 0);
  CHECK(out.str().find("A_lp={2}") != std::string::npos);
  CHECK(out.str().find("A_qp={2}") != std::string::npos);
}

TEST_CASE("cli exit codes: usage errors return 1") {
  std::ostringstream out, err;
  CHECK(cli_main({"identify"}, out, err) == 1);  // missing --x
  CHECK(cli_main({"nope"}, out, err) == 1);
  CHECK(err.str().find("usage:") != std::string::npos);
}

TEST_CASE("cli verify --quick passes and returns 0") {
  std::ostringstream out, err;
  const int rc = cli_main({"verify", "--quick"}, out, err);
  INFO(out.str());
  CHECK(rc == 0);
  CHECK(out.str().find("FAIL") == std::string::npos);
}
