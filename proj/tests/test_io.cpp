#include <filesystem>
#include <sstream>

#include "doctest.h"

#include "cnkz/path_io.hpp"
#include "cnkz/svg.hpp"

using namespace cnkz;
using nlohmann::json;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

struct Planned {
  Scenario scenario;
  PlannerParams params;
  PlanResult result;
};

Planned short_plan() {
  Scenario s = reference_scenario("S_3").with_environment(Complexity::Low, 6);
  s.goal = s.start;
  s.goal.position.y() += 1.2;
  PlannerParams p;
  p.max_nodes = 300;
  p.goal_bias = 0.3;
  p.rng_seed = 4;
  return {s, p, plan(s, p)};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("parameter JSON round trip") {
  PlannerParams p;
  p.max_nodes = 77;
  p.steer_step = 0.25;
  p.sampler = Sampler::Uniform;
  p.projection.method = Method::CIM;
  p.projection.cim_relaxation = 1.5;
  p.projection.global_threshold = 0.002;
  p.projection.residual_mode = ResidualMode::Revert;
  const auto back = planner_params_from_json(json::parse(to_json(p).dump()), "p");
  CHECK(back.max_nodes == 77);
  CHECK(back.steer_step == 0.25);
  CHECK(back.sampler == Sampler::Uniform);
  CHECK(back.projection.method == Method::CIM);
  CHECK(back.projection.cim_relaxation == 1.5);
  CHECK(back.projection.global_threshold == 0.002);
  CHECK(back.projection.residual_mode == ResidualMode::Revert);

  json bad = to_json(p);
  bad["projection"]["method"] = "simplex";
  CHECK_THROWS_AS(planner_params_from_json(bad, "p"), SchemaError);
}

TEST_CASE("path files round trip") {
  const Planned pl = short_plan();
  REQUIRE(pl.result.success);
  const json j = path_to_json(pl.scenario, pl.result, pl.params);
  CHECK(j["schema"] == "cnkz.path/1");
  const PathFile f = path_from_json(json::parse(j.dump()));
  CHECK(f.scenario == pl.scenario);
  CHECK(f.waypoints == pl.result.waypoints());
  CHECK(f.residuals.size() == f.waypoints.size());
  CHECK(f.params.rng_seed == 4);

  const auto file = std::filesystem::temp_directory_path() / "cnkz_path_roundtrip.json";
  export_path(pl.scenario, pl.result, pl.params, file);
  CHECK(import_path(file).waypoints == f.waypoints);
  std::filesystem::remove(file);

  json broken = j;
  broken["waypoints"][0]["robots"].erase(0);
  CHECK_THROWS_AS(path_from_json(broken), SchemaError);
  PlanResult failed;
  CHECK_THROWS_AS(path_to_json(pl.scenario, failed, pl.params), StructuralError);
}

TEST_CASE("projection reports omit timing on request") {
  const Scenario s = reference_scenario("S_3");
  const auto sys = s.system();
  const auto rep = project(sys, s.configuration_at(s.start), {});
  const json with = to_json(sys, rep, true), without = to_json(sys, rep, false);
  CHECK(with.contains("wall_time_s"));
  CHECK_FALSE(without.contains("wall_time_s"));
  CHECK(without["schema"] == "cnkz.projection/1");
  CHECK(without["status"] == "Converged");
}

TEST_CASE("path rendering") {
  const Planned pl = short_plan();
  std::ostringstream out;
  write_path_svg(pl.scenario, pl.result.waypoints(), out, 5);
  const std::string svg = out.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  // Frame plus one rectangle per obstacle inside the obstacle group.
  const auto g0 = svg.find("<g id=\"obstacles\">"), g1 = svg.find("</g>", g0);
  CHECK(count(svg.substr(g0, g1 - g0), "<rect") == pl.scenario.environment.obstacles.size());
  CHECK(count(svg, "<polyline") >= std::size_t(pl.scenario.team));

  std::ostringstream empty;
  write_path_svg(reference_scenario("T_3"), {}, empty);
  CHECK(empty.str().find("</svg>") != std::string::npos);
}

TEST_CASE("line plots tolerate non-positive values on a log axis") {
  std::vector<PlotSeries> series{{"a & b", {0, 1, 2}, {1.0, 0.0, 1e-3}}, {"empty", {}, {}}};
  std::ostringstream out;
  write_line_plot_svg(series, "title <x>", "step", "norm", true, out);
  const std::string svg = out.str();
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("title &lt;x&gt;") != std::string::npos);
}

}
