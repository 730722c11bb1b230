#include "finsler/metric_defs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace finsler {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& pointer, const std::string& msg) {
  throw ParseError(ParseError::Kind::schema, msg, 1, 1, pointer.empty() ? "/" : pointer);
}

void require_keys(const json& j, const std::string& pointer, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
  if (!j.is_object()) schema_error(pointer, "expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) schema_error(pointer, std::string("missing key '") + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) schema_error(pointer, "unknown key '" + key + "'");
  }
}

Expr parse_expr(const json& j, int dim, const std::string& pointer, bool x_only) {
  Expr e;
  if (j.is_number()) {
    e = Expr::number(j.get<double>());
  } else if (j.is_string()) {
    try {
      e = Expr::parse(j.get<std::string>(), dim);
    } catch (const ParseError& err) {
      throw err.within(pointer);
    }
  } else {
    schema_error(pointer, "expected an expression string");
  }
  if (x_only && e.depends_on_y()) {
    throw ParseError(ParseError::Kind::schema, "expression must depend on x only", 1, 1, pointer);
  }
  return e;
}

std::vector<Expr> parse_expr_list(const json& j, int dim, const std::string& pointer, bool x_only) {
  if (!j.is_array()) schema_error(pointer, "expected an array");
  if (static_cast<int>(j.size()) != dim) {
    throw ParseError(ParseError::Kind::dimension_mismatch,
                     "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()), 1,
                     1, pointer);
  }
  std::vector<Expr> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_expr(j[i], dim, pointer + "/" + std::to_string(i), x_only));
  }
  return out;
}

std::vector<std::vector<Expr>> parse_matrix(const json& j, int dim, const std::string& pointer) {
  if (!j.is_array()) schema_error(pointer, "expected an array of rows");
  if (static_cast<int>(j.size()) != dim) {
    throw ParseError(ParseError::Kind::dimension_mismatch,
                     "expected " + std::to_string(dim) + " rows, got " + std::to_string(j.size()), 1, 1,
                     pointer);
  }
  std::vector<std::vector<Expr>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rows.push_back(parse_expr_list(j[i], dim, pointer + "/" + std::to_string(i), true));
  }
  return rows;
}

MetricSpec::Kind parse_kind(const json& j, const std::string& pointer) {
  if (!j.is_string()) schema_error(pointer, "kind must be a string");
  const auto s = j.get<std::string>();
  for (auto k : {MetricSpec::Kind::euclidean, MetricSpec::Kind::riemannian, MetricSpec::Kind::randers,
                 MetricSpec::Kind::expression, MetricSpec::Kind::matsumoto_change}) {
    if (s == to_string(k)) return k;
  }
  schema_error(pointer, "unknown metric kind '" + s + "'");
}

// Line and column (1-based) of a byte offset.
std::pair<int, int> locate(std::string_view text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Jet quadratic_form(const std::vector<std::vector<Expr>>& a, std::span<const Jet> x, std::span<const Jet> y) {
  const std::size_t n = y.size();
  Jet q(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q += a[i][j].evaluate(x, y) * y[i] * y[j];
  }
  return q;
}

Jet euclidean_norm(std::span<const Jet> y) {
  Jet q(0.0);
  for (const auto& v : y) q += v * v;
  return sqrt(q);
}

}  // namespace

HVectorSpec HVectorSpec::zero(int dim) {
  HVectorSpec h;
  h.c.assign(static_cast<std::size_t>(dim), Expr::number(0.0));
  h.rho = Expr::number(0.0);
  return h;
}

HVectorSpec HVectorSpec::scaled(double t) const {
  HVectorSpec h;
  const int dim = static_cast<int>(c.size());
  const std::string factor = json(t).dump();
  for (const auto& e : c) h.c.push_back(Expr::parse(factor + "*(" + e.to_string() + ")", dim));
  h.rho = Expr::parse(factor + "*(" + rho.to_string() + ")", dim);
  return h;
}

bool HVectorSpec::is_zero() const {
  auto zero = [](const Expr& e) { return e == Expr::number(0.0); };
  return std::all_of(c.begin(), c.end(), zero) && zero(rho);
}

std::string_view to_string(MetricSpec::Kind kind) {
  switch (kind) {
    case MetricSpec::Kind::euclidean:
      return "euclidean";
    case MetricSpec::Kind::riemannian:
      return "riemannian";
    case MetricSpec::Kind::randers:
      return "randers";
    case MetricSpec::Kind::expression:
      return "expression";
    case MetricSpec::Kind::matsumoto_change:
      return "matsumoto_change";
  }
  return "?";
}

HVectorSpec parse_h_vector(const json& j, int dim, const std::string& pointer) {
  require_keys(j, pointer, {"c", "rho"}, {});
  HVectorSpec h;
  h.c = parse_expr_list(j["c"], dim, pointer + "/c", true);
  h.rho = parse_expr(j["rho"], dim, pointer + "/rho", true);
  return h;
}

MetricSpec parse_metric(const json& j, int dim, const std::string& pointer) {
  if (!j.is_object()) schema_error(pointer, "expected an object");
  if (!j.contains("kind")) schema_error(pointer, "missing key 'kind'");
  MetricSpec spec;
  spec.dim = dim;
  spec.kind = parse_kind(j["kind"], pointer + "/kind");
  switch (spec.kind) {
    case MetricSpec::Kind::euclidean:
      require_keys(j, pointer, {"kind"}, {});
      break;
    case MetricSpec::Kind::riemannian:
      require_keys(j, pointer, {"kind", "a"}, {});
      spec.a = parse_matrix(j["a"], dim, pointer + "/a");
      break;
    case MetricSpec::Kind::randers:
      require_keys(j, pointer, {"kind", "b"}, {"a"});
      if (j.contains("a")) spec.a = parse_matrix(j["a"], dim, pointer + "/a");
      spec.b0 = parse_expr_list(j["b"], dim, pointer + "/b", true);
      break;
    case MetricSpec::Kind::expression:
      require_keys(j, pointer, {"kind", "L"}, {});
      spec.L = parse_expr(j["L"], dim, pointer + "/L", false);
      break;
    case MetricSpec::Kind::matsumoto_change:
      require_keys(j, pointer, {"kind", "base", "change"}, {});
      spec.base = std::make_shared<const MetricSpec>(parse_metric(j["base"], dim, pointer + "/base"));
      spec.change = parse_h_vector(j["change"], dim, pointer + "/change");
      break;
  }
  return spec;
}

json parse_json_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(ParseError::Kind::syntax, "malformed JSON document", line, col);
  }
}

ParsedSpec parse_spec(std::string_view text) {
  json doc = parse_json_document(text);
  if (!doc.is_object()) schema_error("", "expected an object");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) schema_error("/n", "n must be an integer");
  const int dim = doc["n"].get<int>();
  if (dim < 2 || dim > kMaxDim) schema_error("/n", "n must lie in [2, 6]");

  json metric = doc;
  metric.erase("n");
  metric.erase("h_vector");
  ParsedSpec out;
  out.metric = parse_metric(metric, dim, "");
  out.h_vector = doc.contains("h_vector") ? parse_h_vector(doc["h_vector"], dim, "/h_vector")
                                          : HVectorSpec::zero(dim);
  return out;
}

json h_vector_to_json(const HVectorSpec& spec) {
  json c = json::array();
  for (const auto& e : spec.c) c.push_back(e.to_string());
  return json{{"c", c}, {"rho", spec.rho.to_string()}};
}

json metric_to_json(const MetricSpec& spec) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  auto matrix = [](const std::vector<std::vector<Expr>>& a) {
    json rows = json::array();
    for (const auto& row : a) {
      json r = json::array();
      for (const auto& e : row) r.push_back(e.to_string());
      rows.push_back(r);
    }
    return rows;
  };
  switch (spec.kind) {
    case MetricSpec::Kind::euclidean:
      break;
    case MetricSpec::Kind::riemannian:
      j["a"] = matrix(spec.a);
      break;
    case MetricSpec::Kind::randers: {
      if (!spec.a.empty()) j["a"] = matrix(spec.a);
      json b = json::array();
      for (const auto& e : spec.b0) b.push_back(e.to_string());
      j["b"] = b;
      break;
    }
    case MetricSpec::Kind::expression:
      j["L"] = spec.L.to_string();
      break;
    case MetricSpec::Kind::matsumoto_change:
      j["base"] = metric_to_json(*spec.base);
      j["change"] = h_vector_to_json(spec.change);
      break;
  }
  return j;
}

std::string serialize_spec(const ParsedSpec& spec) {
  json j = metric_to_json(spec.metric);
  j["n"] = spec.metric.dim;
  j["h_vector"] = h_vector_to_json(spec.h_vector);
  return j.dump(2);
}

bool operator==(const HVectorSpec& a, const HVectorSpec& b) { return a.c == b.c && a.rho == b.rho; }

bool operator==(const MetricSpec& a, const MetricSpec& b) {
  if (a.dim != b.dim || a.kind != b.kind || a.a != b.a || a.b0 != b.b0 || !(a.L == b.L)) return false;
  if (a.kind != MetricSpec::Kind::matsumoto_change) return true;
  return *a.base == *b.base && a.change == b.change;
}

ScalarField metric_field(const MetricSpec& spec) {
  switch (spec.kind) {
    case MetricSpec::Kind::euclidean:
      return ScalarField(spec.dim, [](std::span<const Jet>, std::span<const Jet> y) { return euclidean_norm(y); });
    case MetricSpec::Kind::riemannian:
      return ScalarField(spec.dim, [a = spec.a](std::span<const Jet> x, std::span<const Jet> y) {
        const Jet q = quadratic_form(a, x, y);
        if (!(q.value() > 0.0)) throw DomainError("Riemannian quadratic form is not positive");
        return sqrt(q);
      });
    case MetricSpec::Kind::randers:
      return ScalarField(spec.dim, [a = spec.a, b = spec.b0](std::span<const Jet> x, std::span<const Jet> y) {
        Jet alpha = a.empty() ? euclidean_norm(y) : sqrt(quadratic_form(a, x, y));
        for (std::size_t i = 0; i < y.size(); ++i) alpha += b[i].evaluate(x, y) * y[i];
        return alpha;
      });
    case MetricSpec::Kind::expression:
      return ScalarField(spec.dim, [L = spec.L](std::span<const Jet> x, std::span<const Jet> y) {
        return L.evaluate(x, y);
      });
    case MetricSpec::Kind::matsumoto_change:
      return matsumoto_field(metric_field(*spec.base), spec.change);
  }
  throw std::logic_error("unreachable");
}

ScalarField matsumoto_field(const ScalarField& base, const HVectorSpec& h) {
  return ScalarField(base.dim(), [base, h](std::span<const Jet> x, std::span<const Jet> y) {
    const Jet L = base(x, y);
    Jet beta = h.rho.evaluate(x, y) * L;
    for (std::size_t i = 0; i < y.size(); ++i) beta += h.c[i].evaluate(x, y) * y[i];
    const Jet den = L - beta;
    if (!(den.value() > 0.0)) throw DomainError("Matsumoto change undefined where L - beta <= 0");
    return L * L / den;
  });
}

MetricCheck check_metric(const MetricSpec& spec, const ScalarField& L, const FiberPoint& p) {
  MetricCheck out;
  const int n = p.dim();
  if (!spec.a.empty()) {
    std::vector<double> a(static_cast<std::size_t>(n * n));
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        a[i * n + j] = spec.a[i][j].evaluate(std::span<const double>(p.x), std::span<const double>(p.y));
        scale = std::max(scale, std::abs(a[i * n + j]));
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(a[i * n + j] - a[j * n + i]) > 1e-12 * std::max(1.0, scale)) out.symmetric = false;
    // Cholesky on the symmetric part.
    std::vector<double> lower(a.size(), 0.0);
    for (int i = 0; i < n && out.positive_definite; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = 0.5 * (a[i * n + j] + a[j * n + i]);
        for (int k = 0; k < j; ++k) s -= lower[i * n + k] * lower[j * n + k];
        if (i == j) {
          if (!(s > 0.0)) {
            out.positive_definite = false;
            break;
          }
          lower[i * n + i] = std::sqrt(s);
        } else {
          lower[i * n + j] = s / lower[j * n + j];
        }
      }
    }
  }
  const double value = L(p);
  out.positive = value > 0.0;
  for (double lambda : {0.5, 2.0, 3.0}) {
    std::vector<double> ys(p.y);
    for (auto& v : ys) v *= lambda;
    const double scaled = L(FiberPoint(p.x, ys));
    out.homogeneity_defect = std::max(out.homogeneity_defect, std::abs(scaled - lambda * value) / std::abs(value));
  }
  return out;
}

}  // namespace finsler
