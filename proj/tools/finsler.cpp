#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "finsler/harness.hpp"

using namespace finsler;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

void report_error(const ParseError& e) {
  std::cerr << "error: " << e.what();
  if (!e.context().empty()) std::cerr << " at " << e.context();
  std::cerr << " (line " << e.line() << ", column " << e.column() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matsumoto change verification toolkit"};
  app.require_subcommand(1);

  std::string config_path, suites, json_path, x_text, y_text, quantity, ladder_text;
  std::uint64_t seed = 0;

  auto* verify = app.add_subcommand("verify", "run the verification suites");
  verify->add_option("--config", config_path, "config file")->required();
  auto* suite_opt = verify->add_option("--suite", suites, "comma-separated suites");
  verify->add_option("--json", json_path, "write the JSON report here");
  auto* seed_opt = verify->add_option("--seed", seed, "override the sampling seed");

  auto* eval = app.add_subcommand("eval", "print a named quantity at one point");
  eval->add_option("--config", config_path, "config file")->required();
  eval->add_option("--x", x_text, "base point, comma-separated")->required();
  eval->add_option("--y", y_text, "support element, comma-separated")->required();
  eval->add_option("--quantity", quantity, "quantity name")->required();

  auto* scan = app.add_subcommand("scan-defect", "scale the h-vector toward 0 and track the closed-form discrepancy");
  scan->add_option("--config", config_path, "config file")->required();
  scan->add_option("--ladder", ladder_text, "comma-separated scale factors");
  scan->add_option("--json", json_path, "write the JSON table here");

  CLI11_PARSE(app, argc, argv);

  try {
    VerificationConfig cfg = load_config(config_path);
    if (*verify) {
      if (*suite_opt) cfg.suites = parse_suite_list(suites);
      if (*seed_opt) cfg.sampling.seed = seed;
      const auto report = run_verify(cfg);
      std::cout << format_table(report);
      if (!json_path.empty()) write_file(json_path, format_json(to_json(report)));
      return report.exit_code();
    }
    if (*eval) {
      const auto x = parse_number_list(x_text);
      const auto y = parse_number_list(y_text);
      const int n = cfg.spec.metric.dim;
      if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
        throw ParseError(ParseError::Kind::dimension_mismatch, "point has the wrong dimension", 1, 1);
      const auto& names = quantity_names();
      if (std::find(names.begin(), names.end(), quantity) == names.end()) {
        std::cerr << "error: unknown quantity '" << quantity << "'; one of:";
        for (const auto& q : names) std::cerr << " " << q;
        std::cerr << "\n";
        return 2;
      }
      const auto g = change_geometry(metric_field(cfg.spec.metric), cfg.spec.h_vector, FiberPoint(x, y));
      std::cout << format_json(named_quantity(g, quantity));
      return 0;
    }
    const auto ladder = ladder_text.empty() ? cfg.defect_ladder : parse_number_list(ladder_text);
    const auto result = run_defect_scan(cfg, ladder);
    std::cout << format_table(result);
    if (!json_path.empty()) write_file(json_path, format_json(to_json(result)));
    return 0;
  } catch (const ParseError& e) {
    report_error(e);
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
  } catch (const SingularMetricError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
