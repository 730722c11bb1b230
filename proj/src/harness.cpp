#include "finsler/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "finsler/random.hpp"

namespace finsler {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& pointer, const std::string& msg) {
  throw ParseError(ParseError::Kind::schema, msg, 1, 1, pointer);
}

void only_keys(const json& j, const std::string& pointer, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(pointer.empty() ? "/" : pointer, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) config_error(pointer + "/" + key, "unknown key");
  }
}

double positive_number(const json& j, const std::string& pointer) {
  if (!j.is_number()) config_error(pointer, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) config_error(pointer, "must be positive and finite");
  return v;
}

std::pair<double, double> interval(const json& j, const std::string& pointer) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    config_error(pointer, "expected [lo, hi]");
  const double lo = j[0].get<double>(), hi = j[1].get<double>();
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) config_error(pointer, "box bounds must be finite, lo <= hi");
  return {lo, hi};
}

}  // namespace

std::vector<std::string> parse_suite_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (std::find(all_suites().begin(), all_suites().end(), item) == all_suites().end())
      config_error("/suites", "unknown suite '" + item + "'");
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) config_error("/suites", "no suite selected");
  return out;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw ParseError(ParseError::Kind::syntax, "expected a comma-separated list of numbers", 1, 1);
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(ParseError::Kind::syntax, "empty number list", 1, 1);
  return out;
}

VerificationConfig parse_config(std::string_view text) {
  const json doc = parse_json_document(text);
  only_keys(doc, "", {"n", "metric", "h_vector", "sampling", "tolerances", "suites", "defect_ladder"});
  if (!doc.contains("n") || !doc["n"].is_number_integer()) config_error("/n", "n must be an integer");
  const int n = doc["n"].get<int>();
  if (n < 2 || n > 6) config_error("/n", "n must lie in [2, 6]");
  if (!doc.contains("metric")) config_error("/metric", "missing metric");

  VerificationConfig cfg;
  cfg.spec.metric = parse_metric(doc["metric"], n, "/metric");
  cfg.spec.h_vector = doc.contains("h_vector") ? parse_h_vector(doc["h_vector"], n, "/h_vector")
                                               : HVectorSpec::zero(n);

  cfg.sampling.box.assign(n, {-0.5, 0.5});
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    only_keys(s, "/sampling", {"count", "seed", "box", "rejection_limit"});
    if (s.contains("count")) {
      if (!s["count"].is_number_integer() || s["count"].get<long long>() < 1 || s["count"].get<long long>() > 100000)
        config_error("/sampling/count", "count must be an integer in [1, 100000]");
      cfg.sampling.count = s["count"].get<int>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) config_error("/sampling/seed", "seed must be a non-negative integer");
      cfg.sampling.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("box")) {
      const json& b = s["box"];
      if (b.is_array() && b.size() == 2 && b[0].is_number()) {
        cfg.sampling.box.assign(n, interval(b, "/sampling/box"));
      } else if (b.is_array() && static_cast<int>(b.size()) == n) {
        for (int i = 0; i < n; ++i) cfg.sampling.box[i] = interval(b[i], "/sampling/box/" + std::to_string(i));
      } else {
        config_error("/sampling/box", "expected [lo, hi] or one [lo, hi] per coordinate");
      }
    }
    if (s.contains("rejection_limit")) {
      if (!s["rejection_limit"].is_number_integer() || s["rejection_limit"].get<long long>() < 1)
        config_error("/sampling/rejection_limit", "rejection_limit must be a positive integer");
      cfg.sampling.rejection_limit = s["rejection_limit"].get<int>();
    }
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    only_keys(t, "/tolerances", {"algebra", "closure", "jet", "connection", "fd"});
    auto set = [&](const char* key, double& target) {
      if (t.contains(key)) target = positive_number(t[key], std::string("/tolerances/") + key);
    };
    set("algebra", cfg.tolerances.algebra);
    set("closure", cfg.tolerances.closure);
    set("jet", cfg.tolerances.jet);
    set("connection", cfg.tolerances.connection);
    set("fd", cfg.tolerances.fd);
  }
  if (doc.contains("suites")) {
    const json& s = doc["suites"];
    if (!s.is_array()) config_error("/suites", "expected an array of suite names");
    std::string joined;
    for (const auto& v : s) {
      if (!v.is_string()) config_error("/suites", "expected an array of suite names");
      joined += v.get<std::string>() + ",";
    }
    cfg.suites = parse_suite_list(joined);
  }
  if (doc.contains("defect_ladder")) {
    const json& l = doc["defect_ladder"];
    if (!l.is_array() || l.empty()) config_error("/defect_ladder", "expected a non-empty array of numbers");
    cfg.defect_ladder.clear();
    for (const auto& v : l) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) config_error("/defect_ladder", "expected numbers");
      cfg.defect_ladder.push_back(v.get<double>());
    }
  }
  return cfg;
}

VerificationConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::discrepancy: return "DISCREPANCY";
    case Status::info: return "INFO";
    case Status::skipped: return "SKIPPED";
  }
  return "?";
}

Status VerificationReport::status() const {
  for (const auto& s : suites)
    if (s.status == Status::fail) return Status::fail;
  return Status::pass;
}

namespace {

// Runs f(0..count-1) over a few threads; f must not throw.
template <class F>
void parallel_for(int count, F f) {
  const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) f(i);
    });
}

enum class Rejection { none, regularity, singular, domain };

}  // namespace

SampleSet draw_samples(const ScalarField& L, const std::vector<HVectorSpec>& h_family, const SamplingConfig& cfg,
                       const GeometryOptions& options) {
  const int n = L.dim();
  const int limit = cfg.rejection_limit > 0 ? cfg.rejection_limit : 100 * cfg.count;
  Rng rng(cfg.seed);
  SampleSet out;
  out.stats.requested = cfg.count;
  GeometryOptions gate_only = options;
  gate_only.fiber_jets = false;
  gate_only.direct = false;

  while (out.stats.accepted < cfg.count && out.stats.attempts < limit) {
    const int batch = std::min(std::max(16, 2 * (cfg.count - out.stats.accepted)), limit - out.stats.attempts);
    std::vector<FiberPoint> cand;
    for (int b = 0; b < batch; ++b) {
      std::vector<double> x(n), y(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(cfg.box[i].first, cfg.box[i].second);
      double norm = 0.0;
      while (!(norm > 1e-8)) {
        norm = 0.0;
        for (auto& v : y) {
          v = rng.normal();
          norm += v * v;
        }
        norm = std::sqrt(norm);
      }
      for (auto& v : y) v /= norm;
      cand.emplace_back(x, y);
    }
    std::vector<std::optional<ChangeGeometry>> geo(batch);
    std::vector<Rejection> why(batch, Rejection::none);
    parallel_for(batch, [&](int b) {
      try {
        for (std::size_t k = 1; k < h_family.size(); ++k) change_geometry(L, h_family[k], cand[b], gate_only);
        geo[b] = change_geometry(L, h_family.front(), cand[b], options);
      } catch (const RegularityError&) {
        why[b] = Rejection::regularity;
      } catch (const SingularMetricError&) {
        why[b] = Rejection::singular;
      } catch (const DomainError&) {
        why[b] = Rejection::domain;
      }
    });
    for (int b = 0; b < batch && out.stats.accepted < cfg.count; ++b) {
      ++out.stats.attempts;
      switch (why[b]) {
        case Rejection::none:
          out.points.push_back(cand[b]);
          out.geometry.push_back(std::move(*geo[b]));
          ++out.stats.accepted;
          break;
        case Rejection::regularity: ++out.stats.rejected_regularity; break;
        case Rejection::singular: ++out.stats.rejected_singular; break;
        case Rejection::domain: ++out.stats.rejected_domain; break;
      }
    }
  }
  if (out.stats.accepted == 0)
    throw SamplingError("the regularity gate rejected all " + std::to_string(out.stats.attempts) + " candidate points");
  return out;
}

namespace {

// Collects one residual per sample for a named check, keeping the worst point.
class Checks {
 public:
  Checks(const Tolerances& tol) : tol_(tol) {}

  void add(const std::string& name, const std::string& level, double r, const FiberPoint& p,
           double tolerance = -1.0) {
    auto& e = entry(name, level, tolerance);
    if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
    if (e.rec.samples == 0 || r > e.rec.max_residual) {
      e.rec.max_residual = r;
      e.rec.worst_x = p.x;
      e.rec.worst_y = p.y;
    }
    e.sum += r;
    ++e.rec.samples;
  }

  // Registers a check that may receive no samples.
  void declare(const std::string& name, const std::string& level, double tolerance = -1.0) {
    entry(name, level, tolerance);
  }

  std::vector<CheckRecord> finish() {
    std::vector<CheckRecord> out;
    for (auto& e : entries_) {
      CheckRecord r = e.rec;
      if (r.samples == 0) {
        r.status = Status::skipped;
      } else {
        r.mean_residual = e.sum / r.samples;
        r.status = r.max_residual <= r.tolerance ? Status::pass : Status::fail;
      }
      out.push_back(r);
    }
    return out;
  }

 private:
  struct Entry {
    CheckRecord rec;
    double sum = 0.0;
  };

  Entry& entry(const std::string& name, const std::string& level, double tolerance) {
    for (auto& e : entries_)
      if (e.rec.name == name) return e;
    Entry e;
    e.rec.name = name;
    e.rec.level = level;
    e.rec.tolerance = tolerance >= 0.0 ? tolerance : level_tolerance(level);
    entries_.push_back(e);
    return entries_.back();
  }

  double level_tolerance(const std::string& level) const {
    if (level == "algebra") return tol_.algebra;
    if (level == "closure") return tol_.closure;
    if (level == "jet") return tol_.jet;
    if (level == "connection") return tol_.connection;
    if (level == "fd") return tol_.fd;
    return 0.0;
  }

  const Tolerances& tol_;
  std::vector<Entry> entries_;
};

CheckRecord* find(std::vector<CheckRecord>& checks, const std::string& name) {
  for (auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

// A failing check whose explanation passes is a known formula discrepancy.
void mark_discrepancy(std::vector<CheckRecord>& checks, const std::string& name, const std::string& explained_by,
                      const std::string& note, std::vector<Finding>& findings) {
  CheckRecord* c = find(checks, name);
  CheckRecord* e = find(checks, explained_by);
  if (!c || !e || c->status != Status::fail || e->status != Status::pass) return;
  c->status = Status::discrepancy;
  c->note = note;
  findings.push_back({name, note});
}

Status suite_status(const std::vector<CheckRecord>& checks) {
  bool any = false;
  for (const auto& c : checks) {
    if (c.status == Status::fail) return Status::fail;
    any = any || c.status == Status::pass || c.status == Status::discrepancy;
  }
  return any ? Status::pass : Status::skipped;
}

double scaled_zero(double v, double scale) { return std::abs(v) / std::max(1.0, std::abs(scale)); }
double scaled_zero(const Tensor<double>& t, double scale) { return max_abs(t) / std::max(1.0, std::abs(scale)); }

Tensor<double> identity(int n) {
  Tensor<double> I(n, 2);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

Tensor<double> swap_first(const Tensor<double>& t) {
  const int n = t.dim();
  Tensor<double> out(n, t.rank());
  const std::size_t stride = t.size() / (n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (std::size_t k = 0; k < stride; ++k) out[(j * n + i) * stride + k] = t[(i * n + j) * stride + k];
  return out;
}

Tensor<double> swap_last(const Tensor<double>& t) {
  const int n = t.dim();
  Tensor<double> out(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = t(i, k, j);
  return out;
}

SuiteResult fundamentals_suite(const ScalarField& L, const SampleSet& set, const Tolerances& tol) {
  Checks c(tol);
  const ScalarField half_sq(L.dim(), [L](std::span<const Jet> x, std::span<const Jet> y) {
    const Jet v = L(x, y);
    return 0.5 * v * v;
  });
  for (std::size_t s = 0; s < set.points.size(); ++s) {
    const auto& p = set.points[s];
    const auto& g = set.geometry[s];
    const auto& b = g.base;
    const int n = b.g.dim();
    c.add("base.euler_l", "algebra", scaled_zero(dot(b.l, b.y) - b.L, b.L), p);
    c.add("base.g_symmetric", "algebra", residual(b.g, swap_first(b.g)), p);
    c.add("base.h_indicatory", "algebra", scaled_zero(matmul(b.h, b.y), max_abs(b.h) * frobenius(b.y)), p);
    c.add("base.C_symmetric", "algebra",
          std::max(residual(b.C, swap_first(b.C)), residual(b.C, swap_last(b.C))), p);
    c.add("base.C_indicatory", "algebra", scaled_zero(transvect_last(b.C, b.y), max_abs(b.C) * frobenius(b.y)), p);
    c.add("base.g_inverse", "closure", residual(matmul(b.g, b.g_inv), identity(n)), p);
    c.add("base.spray_euler", "closure", residual(matmul(g.conn.N, b.y), g.conn.G * 2.0), p);
    c.add("base.cartan_transvected", "closure", residual(transvect_last(g.conn.F, b.y), g.conn.N), p);
    c.add("base.berwald_transvected", "closure", residual(transvect_last(g.conn.berwald, b.y), g.conn.N), p);
    Tensor<double> g_fd(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g_fd(i, j) = fd_derivative(half_sq, p, {}, {i, j});
    c.add("base.g_finite_difference", "fd", residual(b.g, g_fd), p);
  }
  auto checks = c.finish();
  return {"fundamentals", suite_status(checks), checks, json::object()};
}

SuiteResult change_suite(const SampleSet& set, const Tolerances& tol, std::vector<Finding>& findings) {
  Checks c(tol);
  c.declare("change.scalars_tau_form", "closure");
  for (std::size_t s = 0; s < set.points.size(); ++s) {
    const auto& p = set.points[s];
    const auto& g = set.geometry[s];
    const auto& d = g.direct_base;
    const auto& bar = g.barred;
    c.add("change.L_bar", "jet", residual(bar.L_bar, d.L), p);
    c.add("change.l_bar", "jet", residual(bar.l_bar, d.l), p);
    c.add("change.h_bar", "jet", residual(bar.h_bar, d.h), p);
    c.add("change.g_bar", "jet", residual(bar.g_bar, d.g), p);
    c.add("change.g_bar_expanded", "algebra", residual(barred_metric_expanded(g.base, g.h, g.sc), bar.g_bar), p);
    c.add("change.C_bar", "jet", residual(bar.C_bar, d.C), p);
    c.add("change.C_bar_mixed", "jet", residual(bar.C_bar_mixed, d.C_mixed), p);
    c.add("change.C_bar_mixed_defect_attributed", "jet",
          residual(bar.C_bar_mixed - mixed_torsion_defect_term(g.base, g.h, g.sc), d.C_mixed), p);
    c.add("change.C_bar_raised", "jet", residual(raise_first(bar.g_bar_inv, bar.C_bar), d.C_mixed), p);
    if (std::isfinite(g.h.tau)) {
      const auto t = change_scalars_tau(g.h.tau, g.h.rho, g.base.L);
      const double r = std::max({residual(t.p, g.sc.p), residual(t.p1, g.sc.p1), residual(t.p2, g.sc.p2),
                                 residual(t.p3, g.sc.p3), residual(t.K1, g.sc.K1), residual(t.K2, g.sc.K2)});
      c.add("change.scalars_tau_form", "closure", r, p);
    }
  }
  auto checks = c.finish();
  mark_discrepancy(checks, "change.C_bar_mixed", "change.C_bar_mixed_defect_attributed",
                   "the displayed mixed torsion assumes L C^h_jk b_h = rho h_jk; on these samples that condition "
                   "fails and the residual is exactly the defect term",
                   findings);
  return {"change", suite_status(checks), checks, json::object()};
}

SuiteResult inverse_suite(const SampleSet& set, const Tolerances& tol, std::vector<Finding>& findings) {
  Checks c(tol);
  for (std::size_t s = 0; s < set.points.size(); ++s) {
    const auto& p = set.points[s];
    const auto& g = set.geometry[s];
    const int n = g.base.g.dim();
    const auto I = identity(n);
    c.add("inverse.printed_closure", "closure", residual(matmul(g.g_bar_inv_literal, g.barred.g_bar), I), p);
    c.add("inverse.corrected_closure", "closure", residual(matmul(g.barred.g_bar_inv, g.barred.g_bar), I), p);
    c.add("inverse.rank_one_chain", "closure", residual(g.chain.inverse, g.barred.g_bar_inv), p);
    c.add("inverse.chain_determinant", "closure", residual(g.chain.determinant, determinant(g.barred.g_bar)), p);
    c.add("inverse.direct", "jet", residual(g.barred.g_bar_inv, g.direct_base.g_inv), p);
    c.add("inverse.direct_determinant", "jet", residual(g.chain.determinant, g.direct_base.det_g), p);
  }
  auto checks = c.finish();
  mark_discrepancy(checks, "inverse.printed_closure", "inverse.corrected_closure",
                   "the printed coefficient of l^i l^j does not invert g_bar; (2/p) times it does", findings);
  return {"inverse", suite_status(checks), checks, json::object()};
}

SuiteResult connection_suite(const SampleSet& set, const Tolerances& tol, std::vector<Finding>& findings) {
  Checks c(tol);
  double off_max = 0.0, off_sum = 0.0;
  int off_count = 0;
  FiberPoint off_worst = set.points.front();
  for (std::size_t s = 0; s < set.points.size(); ++s) {
    const auto& p = set.points[s];
    const auto& g = set.geometry[s];
    const auto& d = g.delta;
    const double rG = residual(d.barred_G, g.direct_conn.G);
    const double rN = residual(d.barred_N, g.direct_conn.N);
    const double rF = residual(d.barred_F, g.direct_conn.F);
    const double rB = residual(d.barred_G_berwald, g.direct_conn.berwald);
    c.add("connection.spray", "connection", rG, p);
    c.add("connection.nonlinear", "connection", rN, p);
    c.add("connection.cartan", "connection", rF, p);
    c.add("connection.berwald", "fd", rB, p);
    c.add("connection.cartan_displayed_order", "connection", residual(g.conn.F + g.D_ijk_literal, g.direct_conn.F),
          p);
    if (g.defect > tol.closure) {
      const double r = std::max({rG, rN, rF});
      if (off_count == 0 || r > off_max) off_worst = p;
      off_max = std::max(off_max, r);
      off_sum += r;
      ++off_count;
    }
  }
  auto checks = c.finish();
  mark_discrepancy(checks, "connection.cartan_displayed_order", "connection.cartan",
                   "the signed cyclic sum in the displayed order misses the direct path; with the lowered index in "
                   "the first slot it matches",
                   findings);
  CheckRecord off;
  off.name = "connection.nonzero_defect";
  off.level = "connection";
  off.tolerance = tol.connection;
  off.max_residual = off_max;
  off.mean_residual = off_count ? off_sum / off_count : 0.0;
  off.samples = off_count;
  off.worst_x = off_worst.x;
  off.worst_y = off_worst.y;
  off.status = off_count ? Status::info : Status::skipped;
  off.note = "spray, nonlinear and Cartan closed forms on the samples where b is not an exact h-vector";
  checks.push_back(off);
  return {"connection", suite_status(checks), checks, json::object()};
}

json certificate_json(const ParallelCertificate& c) {
  return {{"samples", c.samples},
          {"parallel_samples", c.parallel_samples},
          {"zero_delta_samples", c.zero_delta_samples},
          {"forward_violations", c.forward_violations},
          {"converse_violations", c.converse_violations},
          {"max_b_deriv", c.max_b_deriv},
          {"min_b_deriv", c.min_b_deriv},
          {"max_delta", c.max_delta},
          {"min_delta", c.min_delta}};
}

SuiteResult theorems_suite(const SampleSet& set, const Tolerances& tol, std::vector<Finding>& findings) {
  Checks c(tol);
  c.declare("theorems.cartan_forward", "closure");
  c.declare("theorems.berwald_forward", "closure");
  c.declare("theorems.converse", "closure");
  for (std::size_t s = 0; s < set.points.size(); ++s) {
    const auto& p = set.points[s];
    const auto& g = set.geometry[s];
    const double b = frobenius(g.ing.b_h_deriv);
    const double d = std::max({frobenius(g.delta.D_i), frobenius(g.delta.D_ij), frobenius(g.delta.D_ijk)});
    if (b <= tol.closure) {
      c.add("theorems.cartan_forward", "closure", d, p);
      c.add("theorems.berwald_forward", "closure", frobenius(g.delta.D_berwald), p);
    }
    if (d <= tol.closure) c.add("theorems.converse", "closure", b, p);
  }
  auto checks = c.finish();
  const auto cert = parallel_b_certificate(set.geometry, tol.closure);
  if (CheckRecord* conv = find(checks, "theorems.converse"); conv && conv->status == Status::fail) {
    conv->note = "vanishing deltas at a non-parallel h-vector: sampled counterexample to the converse";
    findings.push_back({conv->name, conv->note});
  }
  return {"theorems", suite_status(checks), checks, {{"certificate", certificate_json(cert)}}};
}

SuiteResult remarks_suite(const SampleSet& set, const Tolerances& tol, std::vector<Finding>& findings) {
  Checks c(tol);
  for (std::size_t s = 0; s < set.points.size(); ++s)
    for (const auto& r : set.geometry[s].identities) c.add(r.name, "pinned", r.residual, set.points[s], r.tolerance);
  auto checks = c.finish();
  mark_discrepancy(checks, "Q.derivative_is_B", "Q.derivative_is_2B",
                   "the fiber derivative of Q_i is 2 B_ij, not B_ij", findings);
  return {"remarks", suite_status(checks), checks, json::object()};
}

GeometryOptions verify_options() { return {}; }

}  // namespace

DefectScanReport run_defect_scan(const VerificationConfig& config, std::vector<double> ladder) {
  if (ladder.empty()) throw ParseError(ParseError::Kind::schema, "empty defect ladder", 1, 1, "/defect_ladder");
  std::stable_sort(ladder.begin(), ladder.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  const ScalarField L = metric_field(config.spec.metric);
  std::vector<HVectorSpec> family;
  for (double t : ladder) family.push_back(config.spec.h_vector.scaled(t));
  GeometryOptions opt;
  opt.fiber_jets = false;
  const SampleSet set = draw_samples(L, family, config.sampling, opt);

  DefectScanReport out;
  out.sampling = set.stats;
  for (std::size_t k = 0; k < family.size(); ++k) {
    std::vector<ChangeGeometry> geo(set.points.size());
    if (k == 0) {
      geo = set.geometry;
    } else {
      parallel_for(static_cast<int>(set.points.size()),
                   [&](int s) { geo[s] = change_geometry(L, family[k], set.points[s], opt); });
    }
    DefectScanRow row;
    row.scale = ladder[k];
    double sum = 0.0;
    for (const auto& g : geo) {
      const double r = std::max({residual(g.delta.barred_G, g.direct_conn.G),
                                 residual(g.delta.barred_N, g.direct_conn.N),
                                 residual(g.delta.barred_F, g.direct_conn.F)});
      row.max_defect = std::max(row.max_defect, g.defect);
      row.max_discrepancy = std::max(row.max_discrepancy, r);
      sum += r;
    }
    row.mean_discrepancy = sum / static_cast<double>(geo.size());
    out.rows.push_back(row);
  }
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    const double rise = out.rows[k].max_discrepancy - out.rows[k - 1].max_discrepancy;
    out.worst_increase = std::max(out.worst_increase, rise);
    if (rise > config.tolerances.algebra) out.monotone = false;
  }
  // least squares of log discrepancy on log defect over rows where both are resolved
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : out.rows)
    if (r.max_defect > config.tolerances.algebra && r.max_discrepancy > config.tolerances.algebra)
      pts.emplace_back(std::log(r.max_defect), std::log(r.max_discrepancy));
  if (pts.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    if (sxx > 0.0) {
      out.slope = sxy / sxx;
      out.slope_defined = true;
    }
  }
  return out;
}

VerificationReport run_verify(const VerificationConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.config = {{"n", config.spec.metric.dim},
                   {"metric", metric_to_json(config.spec.metric)},
                   {"h_vector", h_vector_to_json(config.spec.h_vector)},
                   {"sampling",
                    {{"count", config.sampling.count},
                     {"seed", config.sampling.seed},
                     {"box", config.sampling.box},
                     {"rejection_limit", config.sampling.rejection_limit > 0 ? config.sampling.rejection_limit
                                                                             : 100 * config.sampling.count}}},
                   {"tolerances",
                    {{"algebra", config.tolerances.algebra},
                     {"closure", config.tolerances.closure},
                     {"jet", config.tolerances.jet},
                     {"connection", config.tolerances.connection},
                     {"fd", config.tolerances.fd}}},
                   {"suites", config.suites}};

  const ScalarField L = metric_field(config.spec.metric);
  const bool needs_samples = std::any_of(config.suites.begin(), config.suites.end(),
                                         [](const std::string& s) { return s != "defect_scan"; });
  SampleSet set;
  if (needs_samples) {
    set = draw_samples(L, {config.spec.h_vector}, config.sampling, verify_options());
    report.sampling = set.stats;
  }
  const Tolerances& tol = config.tolerances;
  for (const auto& name : all_suites()) {
    if (std::find(config.suites.begin(), config.suites.end(), name) == config.suites.end()) continue;
    if (name == "fundamentals") report.suites.push_back(fundamentals_suite(L, set, tol));
    if (name == "change") report.suites.push_back(change_suite(set, tol, report.findings));
    if (name == "inverse") report.suites.push_back(inverse_suite(set, tol, report.findings));
    if (name == "connection") report.suites.push_back(connection_suite(set, tol, report.findings));
    if (name == "theorems") report.suites.push_back(theorems_suite(set, tol, report.findings));
    if (name == "remarks") report.suites.push_back(remarks_suite(set, tol, report.findings));
    if (name == "defect_scan") {
      const auto scan = run_defect_scan(config, config.defect_ladder);
      CheckRecord mono;
      mono.name = "defect_scan.monotone";
      mono.level = "algebra";
      mono.tolerance = tol.algebra;
      mono.max_residual = mono.mean_residual = scan.worst_increase;
      mono.samples = scan.sampling.accepted;
      mono.status = scan.monotone ? Status::pass : Status::fail;
      mono.note = "largest rise of the discrepancy column as the h-vector is scaled toward 0";
      SuiteResult suite{"defect_scan", mono.status, {mono}, to_json(scan)};
      if (!needs_samples) report.sampling = scan.sampling;
      report.suites.push_back(std::move(suite));
    }
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

json record_json(const CheckRecord& r) {
  json j{{"name", r.name},
         {"level", r.level},
         {"tolerance", r.tolerance},
         {"max_residual", r.max_residual},
         {"mean_residual", r.mean_residual},
         {"samples", r.samples},
         {"status", std::string(to_string(r.status))}};
  if (r.samples > 0) j["worst_point"] = {{"x", r.worst_x}, {"y", r.worst_y}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json stats_json(const SamplingStats& s) {
  return {{"requested", s.requested},
          {"accepted", s.accepted},
          {"attempts", s.attempts},
          {"acceptance_rate", s.acceptance_rate()},
          {"rejected", {{"regularity", s.rejected_regularity},
                        {"singular", s.rejected_singular},
                        {"domain", s.rejected_domain}}}};
}

}  // namespace

json to_json(const DefectScanReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"scale", row.scale},
                    {"max_defect", row.max_defect},
                    {"max_discrepancy", row.max_discrepancy},
                    {"mean_discrepancy", row.mean_discrepancy}});
  json j{{"rows", rows}, {"monotone", r.monotone}, {"worst_increase", r.worst_increase},
         {"sampling", stats_json(r.sampling)}};
  j["slope"] = r.slope_defined ? json(r.slope) : json(nullptr);
  return j;
}

json to_json(const VerificationReport& r) {
  json suites = json::array();
  for (const auto& s : r.suites) {
    json checks = json::array();
    double worst = 0.0, mean = 0.0;
    int counted = 0;
    for (const auto& c : s.checks) {
      checks.push_back(record_json(c));
      if (c.samples > 0 && c.status != Status::info) {
        worst = std::max(worst, c.max_residual);
        mean += c.mean_residual;
        ++counted;
      }
    }
    json js{{"name", s.name},
            {"status", std::string(to_string(s.status))},
            {"max_residual", worst},
            {"mean_residual", counted ? mean / counted : 0.0},
            {"checks", checks}};
    if (!s.extra.empty()) js["details"] = s.extra;
    suites.push_back(js);
  }
  json findings = json::array();
  for (const auto& f : r.findings) findings.push_back({{"check", f.check}, {"kind", "formula-discrepancy"},
                                                       {"message", f.message}});
  return {{"schema_version", VerificationReport::schema_version},
          {"status", std::string(to_string(r.status()))},
          {"config", r.config},
          {"sampling", stats_json(r.sampling)},
          {"suites", suites},
          {"findings", findings},
          {"wall_time_s", r.wall_time_s}};
}

namespace {

void write_json(std::string& out, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + json(key).dump() + sep;
        write_json(out, value, indent, depth + 1);
      }
      out += nl + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) {
          out += ",";
          out += nl;
        }
        out += pad;
        write_json(out, j[k], indent, depth + 1);
      }
      out += nl + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s = buf;
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

std::string format_json(const json& j, int indent) {
  std::string out;
  write_json(out, j, indent, 0);
  out += "\n";
  return out;
}

std::string format_table(const VerificationReport& r) {
  std::vector<std::array<std::string, 8>> rows;
  rows.push_back({"suite", "check", "level", "tolerance", "max", "mean", "n", "status"});
  for (const auto& s : r.suites)
    for (const auto& c : s.checks)
      rows.push_back({s.name, c.name, c.level, sci(c.tolerance), sci(c.max_residual), sci(c.mean_residual),
                      std::to_string(c.samples), std::string(to_string(c.status))});
  std::array<std::size_t, 8> width{};
  for (const auto& row : rows)
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const bool right = k >= 3 && k <= 6;
      const std::string cell = row[k];
      const std::string fill(width[k] - cell.size(), ' ');
      out << (right ? fill + cell : cell + (k + 1 < row.size() ? fill : ""));
      if (k + 1 < row.size()) out << "  ";
    }
    out << "\n";
  }
  out << "\nsamples: " << r.sampling.accepted << " accepted of " << r.sampling.attempts << " drawn\n";
  for (const auto& f : r.findings) out << "DISCREPANCY " << f.check << ": " << f.message << "\n";
  out << "status: " << to_string(r.status()) << "\n";
  return out.str();
}

std::string format_table(const DefectScanReport& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%12s  %12s  %15s  %16s\n", "scale", "max defect", "max discrepancy",
                "mean discrepancy");
  out << buf;
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%12.6g  %12.3e  %15.3e  %16.3e\n", row.scale, row.max_defect,
                  row.max_discrepancy, row.mean_discrepancy);
    out << buf;
  }
  out << "\nsamples: " << r.sampling.accepted << "\n";
  out << "log-log slope: " << (r.slope_defined ? sci(r.slope) : std::string("undefined")) << "\n";
  out << "monotone: " << (r.monotone ? "yes" : "no") << "\n";
  return out.str();
}

namespace {

json tensor_json(const Tensor<double>& t) {
  if (t.rank() == 0 || t.size() == 0) return json(nullptr);
  std::function<json(std::size_t, int)> build = [&](std::size_t offset, int depth) -> json {
    const int n = t.dim();
    std::size_t stride = 1;
    for (int r = depth + 1; r < t.rank(); ++r) stride *= n;
    json a = json::array();
    for (int i = 0; i < n; ++i) {
      if (depth + 1 == t.rank()) {
        a.push_back(t[offset + i]);
      } else {
        a.push_back(build(offset + i * stride, depth + 1));
      }
    }
    return a;
  };
  return build(0, 0);
}

}  // namespace

const std::vector<std::string>& quantity_names() {
  static const std::vector<std::string> names{
      "L",        "l",          "g",          "g_inv",     "h",        "C",          "C_mixed",
      "G",        "N",          "F",          "berwald",   "b",        "m",          "scalars",
      "defect",   "L_bar",      "l_bar",      "h_bar",     "g_bar",    "g_bar_inv",  "g_bar_inv_printed",
      "C_bar",    "C_bar_mixed", "V",         "M",         "b_deriv",  "E",          "Fskew",
      "beta_k",   "D_i",        "D_ij",       "D_ijk",     "D_berwald", "G_bar",     "N_bar",
      "F_bar",    "berwald_bar", "direct.g",  "direct.C_mixed", "direct.G", "direct.N", "direct.F",
      "direct.berwald"};
  return names;
}

json named_quantity(const ChangeGeometry& g, const std::string& name) {
  if (name == "L") return g.base.L;
  if (name == "l") return tensor_json(g.base.l);
  if (name == "g") return tensor_json(g.base.g);
  if (name == "g_inv") return tensor_json(g.base.g_inv);
  if (name == "h") return tensor_json(g.base.h);
  if (name == "C") return tensor_json(g.base.C);
  if (name == "C_mixed") return tensor_json(g.base.C_mixed);
  if (name == "G") return tensor_json(g.conn.G);
  if (name == "N") return tensor_json(g.conn.N);
  if (name == "F") return tensor_json(g.conn.F);
  if (name == "berwald") return tensor_json(g.conn.berwald);
  if (name == "b") return tensor_json(g.h.b);
  if (name == "m") return tensor_json(g.h.m);
  if (name == "scalars") {
    const auto& s = g.sc;
    return {{"beta", g.h.beta}, {"s", s.s},   {"rho", s.rho}, {"m2", s.m2}, {"p", s.p},   {"p1", s.p1},
            {"p2", s.p2},       {"p3", s.p3}, {"q", s.q},     {"q1", s.q1}, {"q1_corrected", s.q1_corrected},
            {"q2", s.q2},       {"q3", s.q3}, {"K1", s.K1},   {"K2", s.K2}};
  }
  if (name == "defect") return g.defect;
  if (name == "L_bar") return g.barred.L_bar;
  if (name == "l_bar") return tensor_json(g.barred.l_bar);
  if (name == "h_bar") return tensor_json(g.barred.h_bar);
  if (name == "g_bar") return tensor_json(g.barred.g_bar);
  if (name == "g_bar_inv") return tensor_json(g.barred.g_bar_inv);
  if (name == "g_bar_inv_printed") return tensor_json(g.g_bar_inv_literal);
  if (name == "C_bar") return tensor_json(g.barred.C_bar);
  if (name == "C_bar_mixed") return tensor_json(g.barred.C_bar_mixed);
  if (name == "V") return tensor_json(g.barred.V);
  if (name == "M") return tensor_json(g.barred.M);
  if (name == "b_deriv") return tensor_json(g.ing.b_h_deriv);
  if (name == "E") return tensor_json(g.ing.E);
  if (name == "Fskew") return tensor_json(g.ing.Fskew);
  if (name == "beta_k") return tensor_json(g.ing.beta_k);
  if (name == "D_i") return tensor_json(g.delta.D_i);
  if (name == "D_ij") return tensor_json(g.delta.D_ij);
  if (name == "D_ijk") return tensor_json(g.delta.D_ijk);
  if (name == "D_berwald") return tensor_json(g.delta.D_berwald);
  if (name == "G_bar") return tensor_json(g.delta.barred_G);
  if (name == "N_bar") return tensor_json(g.delta.barred_N);
  if (name == "F_bar") return tensor_json(g.delta.barred_F);
  if (name == "berwald_bar") return tensor_json(g.delta.barred_G_berwald);
  if (name == "direct.g") return tensor_json(g.direct_base.g);
  if (name == "direct.C_mixed") return tensor_json(g.direct_base.C_mixed);
  if (name == "direct.G") return tensor_json(g.direct_conn.G);
  if (name == "direct.N") return tensor_json(g.direct_conn.N);
  if (name == "direct.F") return tensor_json(g.direct_conn.F);
  if (name == "direct.berwald") return tensor_json(g.direct_conn.berwald);
  throw std::invalid_argument("unknown quantity '" + name + "'");
}

}  // namespace finsler
