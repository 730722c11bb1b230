#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "finsler/harness.hpp"

using namespace finsler;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string report_text(const VerificationConfig& cfg) {
  json j = to_json(run_verify(cfg));
  j.erase("wall_time_s");
  return format_json(j);
}

ParseError config_failure(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("config was accepted: " << text);
  throw std::logic_error("unreachable");
}

// Numbers within abs 1e-12 + rel 1e-8, everything else identical.
void compare_json(const json& a, const json& b, const std::string& where) {
  INFO(where);
  if (a.is_number_float() || b.is_number_float()) {
    REQUIRE(a.is_number());
    REQUIRE(b.is_number());
    const double x = a.get<double>(), y = b.get<double>();
    CHECK(std::abs(x - y) <= 1e-12 + 1e-8 * std::abs(y));
    return;
  }
  REQUIRE(a.type() == b.type());
  if (a.is_object()) {
    REQUIRE(a.size() == b.size());
    for (const auto& [k, v] : b.items()) {
      REQUIRE(a.contains(k));
      compare_json(a[k], v, where + "/" + k);
    }
  } else if (a.is_array()) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) compare_json(a[i], b[i], where + "/" + std::to_string(i));
  } else {
    CHECK(a == b);
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FINSLER_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kEuclidZero = R"j({"n": 3, "metric": {"kind": "euclidean"}, "sampling": {"count": 20, "seed": 1}})j";

}  // namespace

TEST_CASE("config defaults and overrides") {
  auto cfg = parse_config(R"j({"n": 2, "metric": {"kind": "euclidean"}})j");
  CHECK(cfg.sampling.count == 50);
  CHECK(cfg.sampling.box.size() == 2);
  CHECK(cfg.tolerances.closure == 1e-9);
  CHECK(cfg.suites == all_suites());
  CHECK(cfg.spec.h_vector.is_zero());
  cfg = parse_config(R"j({"n": 2, "metric": {"kind": "euclidean"}, "sampling": {"count": 5, "seed": 9, "box": [[0, 1], [2, 3]],
                          "rejection_limit": 40}, "tolerances": {"jet": 1e-6}, "suites": ["inverse", "change"]})j");
  CHECK(cfg.sampling.count == 5);
  CHECK(cfg.sampling.seed == 9);
  CHECK(cfg.sampling.box[1].first == 2.0);
  CHECK(cfg.sampling.rejection_limit == 40);
  CHECK(cfg.tolerances.jet == 1e-6);
  CHECK(cfg.tolerances.algebra == 1e-12);
  CHECK(cfg.suites == std::vector<std::string>{"inverse", "change"});
}

TEST_CASE("config errors") {
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "euclidean"}, "extra": 1})j").context() == "/extra");
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "euclidean"}, "sampling": {"cnt": 1}})j").context() ==
        "/sampling/cnt");
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "euclidean"}, "tolerances": {"jet": 0}})j").context() ==
        "/tolerances/jet");
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "euclidean"}, "sampling": {"count": 0}})j").context() ==
        "/sampling/count");
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "euclidean"}, "suites": ["bogus"]})j").context() == "/suites");
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "euclidean"}, "sampling": {"box": [1, 0]}})j").context() ==
        "/sampling/box");
  CHECK(config_failure(R"j({"n": 2, "metric": {"kind": "riemannian", "a": [["1", "0"], ["0", "y1"]]}})j").context() ==
        "/metric/a/1/1");
  const auto syntax = config_failure("{\"n\": 2,\n  \"metric\": }");
  CHECK(syntax.kind() == ParseError::Kind::syntax);
  CHECK(syntax.line() == 2);
  CHECK_THROWS_AS(parse_suite_list("change,nope"), ParseError);
  CHECK_THROWS_AS(parse_number_list("1,x"), ParseError);
  CHECK(parse_number_list("1,0.5,0.25") == std::vector<double>{1.0, 0.5, 0.25});
}

TEST_CASE("samples respect the box and the unit sphere") {
  const auto cfg = parse_config(R"j({"n": 3, "metric": {"kind": "euclidean"},
                                    "sampling": {"count": 25, "seed": 4, "box": [0.5, 1.5]}})j");
  const auto set = draw_samples(metric_field(cfg.spec.metric), {cfg.spec.h_vector}, cfg.sampling);
  CHECK(set.stats.accepted == 25);
  for (const auto& p : set.points) {
    double r = 0.0;
    for (double v : p.y) r += v * v;
    CHECK(std::abs(r - 1.0) < 1e-14);
    for (double v : p.x) CHECK((v >= 0.5 && v <= 1.5));
  }
}

TEST_CASE("gate rejecting everything is an error") {
  // s = rho = 0.6 at every point
  const auto cfg = parse_config(R"j({"n": 2, "metric": {"kind": "euclidean"}, "h_vector": {"c": ["0", "0"], "rho": "0.6"},
                                    "sampling": {"count": 3}})j");
  CHECK_THROWS_AS(run_verify(cfg), SamplingError);
}

TEST_CASE("identity change passes with the known discrepancy only") {
  const auto report = run_verify(parse_config(kEuclidZero));
  CHECK(report.status() == Status::pass);
  CHECK(report.exit_code() == 0);
  CHECK(report.suites.size() == all_suites().size());
  for (const auto& s : report.suites)
    for (const auto& c : s.checks) {
      INFO(c.name);
      if (c.name == "Q.derivative_is_B") {
        CHECK(c.status == Status::discrepancy);
        continue;
      }
      CHECK(c.status != Status::fail);
      if (c.samples > 0) CHECK(c.max_residual < 1e-10);
    }
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].check == "Q.derivative_is_B");
}

TEST_CASE("constant h-vector on a flat base satisfies the theorems") {
  auto cfg = parse_config(R"j({"n": 3, "metric": {"kind": "euclidean"}, "h_vector": {"c": ["0.2", "-0.1", "0.15"], "rho": "0"},
                              "sampling": {"count": 15, "seed": 3}, "suites": ["theorems"]})j");
  const auto report = run_verify(cfg);
  REQUIRE(report.suites.size() == 1);
  CHECK(report.suites[0].status == Status::pass);
  for (const auto& c : report.suites[0].checks) {
    CHECK(c.samples == 15);
    CHECK(c.max_residual <= 1e-10);
  }
  CHECK(report.suites[0].extra["certificate"]["parallel_samples"] == 15);
}

TEST_CASE("tolerance failures carry the worst point") {
  auto cfg = parse_config(R"j({"n": 3, "metric": {"kind": "randers", "b": ["0.1", "0.2*x1", "0"]},
                              "sampling": {"count": 10, "seed": 2}})j");
  cfg.suites = {"fundamentals"};
  cfg.tolerances.fd = 1e-30;
  const auto report = run_verify(cfg);
  CHECK(report.status() == Status::fail);
  CHECK(report.exit_code() == 1);
  bool found = false;
  for (const auto& c : report.suites[0].checks)
    if (c.status == Status::fail) {
      found = true;
      CHECK(c.worst_x.size() == 3);
      CHECK(c.worst_y.size() == 3);
    }
  CHECK(found);
}

TEST_CASE("reports are deterministic") {
  const auto cfg = load_config(std::string(GOLDEN_DIR) + "/randers_config.json");
  const auto a = report_text(cfg);
  CHECK(a == report_text(cfg));
  auto other = cfg;
  other.sampling.seed += 1;
  CHECK(a != report_text(other));
}

TEST_CASE("golden report for the seeded Randers configuration") {
  const auto cfg = load_config(std::string(GOLDEN_DIR) + "/randers_config.json");
  const std::string text = report_text(cfg);
  const std::string path = std::string(GOLDEN_DIR) + "/randers_report.json";
  if (std::getenv("FINSLER_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << text;
  }
  const std::string golden = read_file(path);
  REQUIRE(!golden.empty());
  compare_json(json::parse(text), json::parse(golden), "");
  const auto report = run_verify(cfg);
  for (const auto& s : report.suites)
    if (s.name == "defect_scan") {
      const auto& rows = s.extra["rows"];
      REQUIRE(rows.size() == 4);
      CHECK(s.extra["monotone"] == true);
    }
}

TEST_CASE("defect scan on an exact family and at scale 0") {
  auto cfg = parse_config(R"j({"n": 2, "metric": {"kind": "riemannian", "a": [["1+x2*x2/4", "x1*x2/10"], ["x1*x2/10", "2+x1/5"]]},
    "h_vector": {"c": ["0.2+x2/5", "-0.1+x1*x1/10"], "rho": "0"}, "sampling": {"count": 10, "seed": 5}})j");
  const auto scan = run_defect_scan(cfg, {1.0, 0.5, 0.0});
  REQUIRE(scan.rows.size() == 3);
  for (const auto& row : scan.rows) {
    CHECK(row.max_defect < 1e-12);
    CHECK(row.max_discrepancy < 1e-6);
  }
  CHECK(scan.monotone);

  cfg = load_config(std::string(GOLDEN_DIR) + "/randers_config.json");
  const auto ladder = run_defect_scan(cfg, {0.25, 1.0, 0.0, 0.5});
  REQUIRE(ladder.rows.size() == 4);
  CHECK(ladder.rows.front().scale == 1.0);
  CHECK(ladder.rows.back().scale == 0.0);
  CHECK(ladder.rows.back().max_defect == 0.0);
  CHECK(ladder.rows.back().max_discrepancy < 1e-6);
  for (std::size_t k = 1; k < ladder.rows.size(); ++k) CHECK(ladder.rows[k].max_defect < ladder.rows[k - 1].max_defect);
  CHECK(ladder.monotone);
}

TEST_CASE("floating-point output keeps 17 significant digits") {
  CHECK(format_json(json(0.1), 0) == "0.10000000000000001\n");
  CHECK(format_json(json(2.0), 0) == "2.0\n");
  CHECK(format_json(json{{"a", std::nan("")}}, 0) == "{\"a\":null}\n");
  CHECK(format_json(json{1, 2}, 0) == "[1,2]\n");
}

TEST_CASE("named quantities") {
  const auto cfg = parse_config(kEuclidZero);
  const auto g = change_geometry(metric_field(cfg.spec.metric), cfg.spec.h_vector, FiberPoint({0, 0, 0}, {3, 4, 0}));
  CHECK(named_quantity(g, "L").get<double>() == doctest::Approx(5.0));
  CHECK(named_quantity(g, "g").size() == 3);
  CHECK(named_quantity(g, "C").at(0).at(0).size() == 3);
  for (const auto& name : quantity_names()) CHECK_NOTHROW(named_quantity(g, name));
  CHECK_THROWS_AS(named_quantity(g, "nope"), std::invalid_argument);
}

TEST_CASE("command line exit codes") {
  const std::string golden = std::string(GOLDEN_DIR) + "/randers_config.json";
  CHECK(run_cli("verify --config " + golden) == 0);
  CHECK(run_cli("verify --config " + golden + " --suite inverse --seed 3") == 0);
  CHECK(run_cli("verify --config /nonexistent.json") == 2);
  CHECK(run_cli("verify --config " + golden + " --suite bogus") == 2);
  CHECK(run_cli("eval --config " + golden + " --x 0.1,0.2 --y 1,0.5 --quantity D_ijk") == 0);
  CHECK(run_cli("eval --config " + golden + " --x 0.1 --y 1,0.5 --quantity D_ijk") == 2);
  CHECK(run_cli("scan-defect --config " + golden + " --ladder 1,0.5,0.25") == 0);
  const std::string strict = std::string(FINSLER_TMP) + "/strict.json";
  std::ofstream(strict) << R"j({"n": 2, "metric": {"kind": "randers", "b": ["0.1", "0.2*x1"]}, "suites": ["fundamentals"],
                               "tolerances": {"fd": 1e-30}, "sampling": {"count": 3}})j";
  CHECK(run_cli("verify --config " + strict) == 1);
}
