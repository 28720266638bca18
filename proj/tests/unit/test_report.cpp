#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lognodal/report.hpp"

using namespace lognodal;
using nlohmann::json;

TEST_SUITE("report") {

TEST_CASE("config round trips through JSON") {
  RunConfig c;
  c.lambda = -0.5;
  c.theta = 2.0;
  c.exponent = 2.75;
  c.k = 3;
  c.sign = -1;
  c.init_nodes = {0.2, 0.6};
  c.eps = {1e-3, 2e-3};
  c.schedule = {2.5, 2.9};
  c.values = {0.5, 1.0};
  c.format = "json";
  c.plot = true;
  c.jobs = 4;
  const json j = c;
  const RunConfig back = j.get<RunConfig>();
  CHECK(json(back) == j);
  CHECK(back.exponent.value() == 2.75);
  CHECK(back.init_nodes == c.init_nodes);
  const json d = RunConfig{};
  CHECK_FALSE(d["params"].contains("exponent"));
  CHECK(d.get<RunConfig>().params().exponent == 3.0);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(json::parse(R"({"params": {"dimm": 6}})").get<RunConfig>(), std::invalid_argument);
  CHECK_THROWS_AS(json::parse(R"({"extra": 1})").get<RunConfig>(), std::invalid_argument);
  CHECK_THROWS_AS(json::parse(R"({"params": {"theta": "one"}})").get<RunConfig>(), std::invalid_argument);
  RunConfig c;
  c.sign = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.format = "xml";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.k = 3;
  c.init_nodes = {0.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("load_config reads a file and reports malformed documents") {
  const auto dir = std::filesystem::temp_directory_path() / "lognodal_report_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "good.json") << R"({"params": {"theta": 2}, "solve": {"k": 2}})";
    std::ofstream(dir / "bad.json") << R"({"params": {"theta": 2,}})";
  }
  const RunConfig c = load_config((dir / "good.json").string());
  CHECK(c.theta == 2.0);
  CHECK(c.k == 2);
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), std::invalid_argument);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), std::invalid_argument);
}

TEST_CASE("profile CSV has the fixed header and ends at R") {
  auto grid = std::make_shared<const RadialGrid>(build_grid(1.0, 8, 5, 6));
  const RadialFn u = RadialFn::sample(grid, [](double r) { return std::array<double, 2>{1 - r * r, -2 * r}; });
  std::ostringstream s;
  write_profile_csv(s, u);
  std::istringstream in(s.str());
  std::string line, last;
  std::getline(in, line);
  CHECK(line == "r,u,du");
  int rows = 0;
  while (std::getline(in, line)) last = line, ++rows;
  CHECK(rows == static_cast<int>(u.size()) + 1);
  CHECK(last.rfind("1,0,-2", 0) == 0);
}

TEST_CASE("sweep CSV writes failed points as NaN") {
  std::ostringstream s;
  write_sweep_csv(s, {{0.5, std::nan(""), "failed"}, {1.0, 2.5, "ok"}});
  CHECK(s.str() == "axis,value,status\n0.5,nan,failed\n1,2.5,ok\n");
}

TEST_CASE("SVG plot is self-contained and marks nodes") {
  PlotSeries s{{0.0, 0.5, 1.0}, {1.0, -0.5, 0.0}, "u & v"};
  const std::string svg = svg_plot({s}, {0.25, 0.75, 2.0}, "a < b", "r", "u");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  CHECK(svg.find("u &amp; v") != std::string::npos);
  std::size_t marks = 0;
  for (std::size_t pos = 0; (pos = svg.find("#cc3333", pos)) != std::string::npos; ++pos) ++marks;
  CHECK(marks == 2);
  CHECK(svg_plot({s}, {}, "t", "x", "y") == svg_plot({s}, {}, "t", "x", "y"));
}

TEST_CASE("JSON summaries are deterministic") {
  Params p;
  p.exponent = 2.5;
  const auto a = summary_json(shoot_k(p, 1, 1), p, 1, 1).dump();
  const auto b = summary_json(shoot_k(p, 1, 1), p, 1, 1).dump();
  CHECK(a == b);
}

}
