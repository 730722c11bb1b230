#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "finsler/matsumoto.hpp"

using namespace finsler;

namespace {

struct Sample {
  FiberPoint p;
  BaseTensors base;
  HVectorData h;
  ChangeScalars sc;
  ScalarField L_bar;
};

const char* kRanders = R"j({"n": 3, "kind": "randers", "a": [["1+x1*x1","0","0"],["0","2","0.1*x3"],["0","0.1*x3","1"]],
                         "b": ["0.2*x2", "0.1", "-0.1*x1"],
                         "h_vector": {"c": ["0.1", "0.05*x1", "-0.1"], "rho": "0.05+0.02*x2"}})j";

Sample make_sample(const char* doc, const FiberPoint& p) {
  const auto spec = parse_spec(doc);
  const auto L = metric_field(spec.metric);
  const auto base = base_tensors(L, p);
  const auto h = make_h_vector(spec.h_vector, L, p);
  const auto sc = change_scalars(base.L, h.beta, h.rho, h.m2);
  return {p, base, h, sc, matsumoto_field(L, spec.h_vector)};
}

Tensor<double> identity(int n) {
  Tensor<double> id(n, 2);
  for (int i = 0; i < n; ++i) id(i, i) = 1.0;
  return id;
}

Eigen::MatrixXd to_eigen(const Tensor<double>& t) {
  const int n = t.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = t(i, j);
  return m;
}

Tensor<double> from_eigen(const Eigen::MatrixXd& m) {
  Tensor<double> t(static_cast<int>(m.rows()), 2);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) t(i, j) = m(i, j);
  return t;
}

}  // namespace

TEST_CASE("change scalars at hand-computed points") {
  // tau = 3, rho = 0
  auto c = change_scalars(3.0, 1.0, 0.0, 0.0);
  CHECK(c.p == doctest::Approx(9.0 / 8.0).epsilon(1e-15));
  CHECK(c.p1 == doctest::Approx(9.0 / 8.0).epsilon(1e-15));
  CHECK(c.p2 == doctest::Approx(27.0 / 8.0).epsilon(1e-15));
  CHECK(c.p3 == doctest::Approx(243.0 / 16.0).epsilon(1e-15));
  CHECK(std::abs(c.p1 + c.p2 * (0.0 - 1.0 / 3.0)) < 1e-15);

  // tau = 2, rho = 1 sits on the gate; pure scalar check.
  CHECK_THROWS_AS(change_scalars(2.0, 1.0, 1.0, 0.0), RegularityError);
  c = change_scalars(2.0, 1.0, 1.0, 0.0, false);
  CHECK(c.p == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(c.p1 == doctest::Approx(-4.0).epsilon(1e-15));
  CHECK(c.p2 == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(c.p3 == doctest::Approx(48.0).epsilon(1e-15));
  CHECK(c.K1 == doctest::Approx(16.0 / 2.0).epsilon(1e-15));
  CHECK((c.p2 + c.p3 * (1.0 - 0.5)) / (2.0 * 2.0) == doctest::Approx(8.0).epsilon(1e-15));

  // Identity change.
  c = change_scalars(1.7, 0.0, 0.0, 0.0);
  CHECK(c.p == 1.0);
  CHECK(c.p1 == 0.0);
  CHECK(c.p2 == 1.0);
  CHECK(c.p3 == 3.0);
  CHECK(c.q == 1.0);
  CHECK(c.q1 == 0.0);
  CHECK(c.q1_corrected == 0.0);

  CHECK_THROWS_AS(change_scalars(1.0, 0.6, 0.0, 0.0), RegularityError);
  CHECK_THROWS_AS(change_scalars(1.0, 0.3, -2.0, 0.0), RegularityError);
}

TEST_CASE("s-forms equal the printed tau-forms") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> tau_mag(2.05, 40.0), sign(-1.0, 1.0), rho_d(-0.8, 0.8), L_d(0.3, 3.0);
  for (int k = 0; k < 20; ++k) {
    const double tau = tau_mag(rng) * (sign(rng) < 0 ? -1.0 : 1.0);
    const double rho = rho_d(rng);
    const double L = L_d(rng);
    const auto t = change_scalars_tau(tau, rho, L);
    const auto c = change_scalars(L, L / tau, rho, 0.1, false);
    CHECK(residual(c.p, t.p) < 1e-12);
    CHECK(residual(c.p1, t.p1) < 1e-12);
    CHECK(residual(c.p2, t.p2) < 1e-12);
    CHECK(residual(c.p3, t.p3) < 1e-12);
    CHECK(residual(c.K1, t.K1) < 1e-12);
    CHECK(residual(c.K2, t.K2) < 1e-12);
  }
}

TEST_CASE("rank-one inverse") {
  auto r = rank_one_inverse(identity(2), vector_from<double>(std::vector<double>{1.0, 0.0}));
  CHECK(r.inverse(0, 0) == 0.5);
  CHECK(r.inverse(1, 1) == 1.0);
  CHECK(r.inverse(0, 1) == 0.0);
  CHECK(r.determinant == 2.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
    const Eigen::MatrixXd m = a * a.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = trial == 0 ? 0.0 : nd(rng);
    Tensor<double> nv(n, 1);
    for (int i = 0; i < n; ++i) nv(i) = v(i);
    const auto got = rank_one_inverse(from_eigen(m), nv);
    const Eigen::MatrixXd full = m + v * v.transpose();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(full);
    CHECK(residual(got.inverse, from_eigen(lu.inverse())) < 1e-10);
    CHECK(residual(got.determinant, lu.determinant()) < 1e-10);
  }
}

TEST_CASE("identity change reproduces the base") {
  const char* doc = R"j({"n": 3, "kind": "randers", "b": ["0.2", "0.1", "-0.1*x1"]})j";
  const auto s = make_sample(doc, FiberPoint({0.2, 0.1, -0.3}, {0.9, -0.4, 0.3}));
  const auto bar = barred_tensors(s.base, s.h, s.sc);
  CHECK(residual(bar.l_bar, s.base.l) <= 1e-12);
  CHECK(residual(bar.h_bar, s.base.h) <= 1e-12);
  CHECK(residual(bar.g_bar, s.base.g) <= 1e-12);
  CHECK(residual(bar.g_bar_inv, s.base.g_inv) <= 1e-12);
  CHECK(residual(bar.C_bar, s.base.C) <= 1e-12);
  CHECK(residual(bar.C_bar_mixed, s.base.C_mixed) <= 1e-12);
  CHECK(max_abs(bar.V) == 0.0);
  CHECK(max_abs(bar.M) == 0.0);
}

TEST_CASE("closed forms against the direct path through L_bar") {
  const FiberPoint p({0.3, -0.2, 0.4}, {0.8, 0.5, -0.6});
  const auto s = make_sample(kRanders, p);
  const auto bar = barred_tensors(s.base, s.h, s.sc, Variant::corrected);
  const auto direct = base_tensors(s.L_bar, p);
  CHECK(residual(bar.L_bar, direct.L) < 1e-12);
  CHECK(residual(bar.l_bar, direct.l) < 1e-9);
  CHECK(residual(bar.h_bar, direct.h) < 1e-8);
  CHECK(residual(bar.g_bar, direct.g) < 1e-8);
  CHECK(residual(bar.C_bar, direct.C) < 1e-7);
  CHECK(residual(bar.g_bar_inv, direct.g_inv) < 1e-9);
  CHECK(residual(barred_metric_expanded(s.base, s.h, s.sc), bar.g_bar) < 1e-12);

  // Indicatory and Euler identities of the barred space.
  CHECK(std::abs(dot(bar.l_bar, s.base.y) - bar.L_bar) < 1e-12);
  CHECK(max_abs(matmul(bar.h_bar, s.base.y)) < 1e-12);
  CHECK(residual(matmul(bar.g_bar, s.base.y), bar.l_bar * bar.L_bar) < 1e-12);
  CHECK(max_abs(transvect_last(bar.C_bar, s.base.y)) < 1e-12);
  CHECK(max_abs(transvect_last(bar.V, s.base.y)) < 1e-12);
}

TEST_CASE("inverse closure decides between the printed and corrected q1") {
  const FiberPoint p({0.3, -0.2, 0.4}, {0.8, 0.5, -0.6});
  const auto s = make_sample(kRanders, p);
  const auto g_bar = barred_metric(s.base, s.h, s.sc);
  const auto corrected = barred_metric_inverse(s.base, s.h, s.sc, Variant::corrected);
  const auto literal = barred_metric_inverse(s.base, s.h, s.sc, Variant::literal);
  CHECK(residual(matmul(corrected, g_bar), identity(3)) < 1e-9);
  // The printed coefficient does not invert g_bar; kept as a recorded finding.
  CHECK(residual(matmul(literal, g_bar), identity(3)) > 1e-4);

  const auto chain = barred_metric_inverse_chain(s.base, s.h, s.sc);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(to_eigen(g_bar));
  CHECK(residual(chain.inverse, from_eigen(lu.inverse())) < 1e-9);
  CHECK(residual(corrected, from_eigen(lu.inverse())) < 1e-9);
  CHECK(residual(chain.determinant, lu.determinant()) < 1e-9);
}

TEST_CASE("mixed torsion: exact on zero-defect points, defect-attributed otherwise") {
  // Riemannian base with rho = 0 has zero h-vector defect.
  const char* riem = R"j({"n": 3, "kind": "riemannian", "a": [["1+x1*x1","0","0"],["0","2","0.1*x3"],["0","0.1*x3","1"]],
                       "h_vector": {"c": ["0.1*x2", "0.2", "-0.1"], "rho": "0"}})j";
  const FiberPoint p({0.3, -0.2, 0.4}, {0.8, 0.5, -0.6});
  auto s = make_sample(riem, p);
  auto bar = barred_tensors(s.base, s.h, s.sc, Variant::corrected);
  const auto contracted = raise_first(bar.g_bar_inv, bar.C_bar);
  CHECK(residual(bar.C_bar_mixed, contracted) < 1e-12);
  CHECK(residual(bar.C_bar_mixed, base_tensors(s.L_bar, p).C_mixed) < 1e-7);

  s = make_sample(kRanders, p);
  bar = barred_tensors(s.base, s.h, s.sc, Variant::corrected);
  const int n = 3;
  // printed - contracted = -p (q2 l^i + q3 m^i) Delta_jk / L, Delta = L C^h b_h - rho h
  const auto l_up = matmul(s.base.g_inv, s.base.l);
  const auto m_up = matmul(s.base.g_inv, s.h.m);
  Tensor<double> predicted(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double cb = 0.0;
        for (int h = 0; h < n; ++h) cb += s.base.C_mixed(h, j, k) * s.h.b(h);
        const double delta = s.base.L * cb - s.h.rho * s.base.h(j, k);
        predicted(i, j, k) = -s.sc.p * (s.sc.q2 * l_up(i) + s.sc.q3 * m_up(i)) * delta / s.base.L;
      }
  const auto diff = bar.C_bar_mixed - raise_first(bar.g_bar_inv, bar.C_bar);
  CHECK(h_vector_defect(s.base, s.h) > 1e-3);
  CHECK(max_abs(diff) > 1e-4);
  CHECK(residual(diff, predicted) < 1e-12);
  CHECK(residual(mixed_torsion_defect_term(s.base, s.h, s.sc), predicted) < 1e-14);
}

TEST_CASE("change identities") {
  const FiberPoint p({0.3, -0.2, 0.4}, {0.8, 0.5, -0.6});
  const auto spec = parse_spec(kRanders);
  const auto L = metric_field(spec.metric);
  const Jet Lj = metric_jet(L, p);
  const auto base = base_tensors_from<Jet>(Lj, p, 1);
  const auto h = h_vector_from<Jet>(spec.h_vector, Lj, p, base, 1);
  const auto sc = change_scalars_t<Jet>(base.L, h.beta, h.rho, h.m2);
  for (const auto& r : change_identity_suite(base, h, sc)) {
    CAPTURE(r.name);
    CAPTURE(r.residual);
    if (r.name == "Q.derivative_is_B") {
      // As printed the identity is off by a factor of two.
      CHECK_FALSE(r.passed());
    } else {
      CHECK(r.passed());
    }
  }
}

TEST_CASE("scale covariance of the barred tensors") {
  const FiberPoint p({0.3, -0.2, 0.4}, {0.8, 0.5, -0.6});
  const auto s = make_sample(kRanders, p);
  const auto bar = barred_tensors(s.base, s.h, s.sc);
  for (double lambda : {0.5, 2.0, 3.0}) {
    const FiberPoint q(p.x, {lambda * p.y[0], lambda * p.y[1], lambda * p.y[2]});
    const auto t = make_sample(kRanders, q);
    const auto bq = barred_tensors(t.base, t.h, t.sc);
    CHECK(residual(bq.l_bar, bar.l_bar) < 1e-12);
    CHECK(residual(bq.g_bar, bar.g_bar) < 1e-12);
    CHECK(residual(bq.C_bar * lambda, bar.C_bar) < 1e-12);
  }
}
