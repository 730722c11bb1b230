#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "finsler/expr.hpp"
#include "finsler/field.hpp"

namespace finsler {

/// Covector field c_i(x) and scalar rho(x) from which the h-vector
/// b_i = c_i + rho l_i is built.
struct HVectorSpec {
  std::vector<Expr> c;
  Expr rho;

  static HVectorSpec zero(int dim);
  /// Same field with c and rho multiplied by t.
  HVectorSpec scaled(double t) const;
  bool is_zero() const;
};

struct MetricSpec {
  enum class Kind { euclidean, riemannian, randers, expression, matsumoto_change };

  int dim = 2;
  Kind kind = Kind::euclidean;
  /// riemannian: a_ij(x). randers: the alpha metric (empty means Euclidean).
  std::vector<std::vector<Expr>> a;
  /// randers: drift covector b0_i(x).
  std::vector<Expr> b0;
  /// expression: L(x, y).
  Expr L;
  /// matsumoto_change: the base space and the h-vector of the change.
  std::shared_ptr<const MetricSpec> base;
  HVectorSpec change;
};

std::string_view to_string(MetricSpec::Kind kind);

/// Metric document: {"n": .., "kind": .., kind fields.., "h_vector": {...}}.
struct ParsedSpec {
  MetricSpec metric;
  HVectorSpec h_vector;
};

/// Parses a metric document. JSON errors carry the line/column of the
/// document; expression errors carry the JSON pointer plus the column inside
/// the expression string.
ParsedSpec parse_spec(std::string_view text);

/// JSON text to a document; syntax errors become ParseError with line and column.
nlohmann::json parse_json_document(std::string_view text);

/// Parses the metric object (without "n") found at `pointer` in a larger document.
MetricSpec parse_metric(const nlohmann::json& j, int dim, const std::string& pointer);
HVectorSpec parse_h_vector(const nlohmann::json& j, int dim, const std::string& pointer);

nlohmann::json metric_to_json(const MetricSpec& spec);  // without "n"
nlohmann::json h_vector_to_json(const HVectorSpec& spec);
std::string serialize_spec(const ParsedSpec& spec);

bool operator==(const MetricSpec& a, const MetricSpec& b);
bool operator==(const HVectorSpec& a, const HVectorSpec& b);

/// The fundamental function L(x, y) described by a spec.
ScalarField metric_field(const MetricSpec& spec);

/// L_bar = L^2 / (L - beta), beta = c.y + rho L. Raises DomainError where L - beta <= 0.
ScalarField matsumoto_field(const ScalarField& base, const HVectorSpec& h);

struct MetricCheck {
  bool symmetric = true;
  bool positive_definite = true;
  bool positive = true;
  double homogeneity_defect = 0.0;  // max_lambda |L(x, lambda y) - lambda L| / L
};

/// Numerical validation of the spec invariants at one point: a_ij symmetric
/// positive definite (riemannian / randers alpha), L > 0 and degree-1
/// homogeneity for lambda in {0.5, 2, 3}.
MetricCheck check_metric(const MetricSpec& spec, const ScalarField& L, const FiberPoint& p);

}  // namespace finsler
