#include <doctest.h>

#include <cmath>
#include <random>

#include "finsler/fundamental.hpp"
#include "finsler/h_vector.hpp"
#include "finsler/metric_defs.hpp"

using namespace finsler;

namespace {

ScalarField spec_field(const char* doc) { return metric_field(parse_spec(doc).metric); }

const char* kRanders = R"j({"n": 2, "kind": "randers", "b": ["0.2", "0"]})j";
const char* kRandersVar = R"j({"n": 3, "kind": "randers", "a": [["1+x1*x1","0","0"],["0","2","0.1*x3"],["0","0.1*x3","1"]],
                            "b": ["0.2*x2", "0.1", "-0.1*x1"]})j";

// Spray component i as a plain field, for finite differencing in y.
ScalarField spray_field(const ScalarField& L, int i) {
  return ScalarField(L.dim(), [L, i](std::span<const Jet> x, std::span<const Jet> y) {
    std::vector<double> xs, ys;
    for (const auto& v : x) xs.push_back(v.value());
    for (const auto& v : y) ys.push_back(v.value());
    return Jet(connection_data(L, FiberPoint(xs, ys)).G(i));
  });
}

}  // namespace

TEST_CASE("Euclidean base tensors") {
  const auto L = spec_field(R"j({"n": 2, "kind": "euclidean"})j");
  const FiberPoint p({0.0, 0.0}, {3.0, 4.0});
  const auto b = base_tensors(L, p);
  CHECK(b.L == doctest::Approx(5.0));
  CHECK(b.l(0) == doctest::Approx(0.6));
  CHECK(b.l(1) == doctest::Approx(0.8));
  CHECK(std::abs(b.g(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(b.g(0, 1)) < 1e-14);
  CHECK(max_abs(b.C) < 1e-14);
  const auto c = connection_data(L, p);
  CHECK(max_abs(c.gamma) == 0.0);
  CHECK(max_abs(c.G) == 0.0);
  CHECK(max_abs(c.N) == 0.0);
  CHECK(max_abs(c.F) < 1e-15);
}

TEST_CASE("diagonal Riemannian base and Christoffel symbols") {
  const auto L = spec_field(R"j({"n": 2, "kind": "riemannian", "a": [["1+x1*x1", "0"], ["0", "1"]]})j");
  const FiberPoint p({1.0, 0.0}, {1.0, 1.0});
  const auto b = base_tensors(L, p);
  CHECK(b.L == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(b.g(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(b.g(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs(b.C) < 1e-14);
  const auto c = connection_data(L, p);
  CHECK(c.gamma(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(residual(c.F, c.gamma) < 1e-13);
  CHECK(residual(c.berwald, c.gamma) < 1e-12);
}

TEST_CASE("Randers metric tensor against its closed form and finite differences") {
  const auto L = spec_field(kRanders);
  const FiberPoint p({0.0, 0.0}, {3.0, 4.0});
  const auto b = base_tensors(L, p);
  // alpha Euclidean: g_ij = (L/alpha)(delta_ij - y_i y_j / alpha^2) + (y_i/alpha + b_i)(y_j/alpha + b_j)
  CHECK(std::abs(b.g(0, 0) - 1.3568) < 1e-13);
  ScalarField L2(2, [L](auto x, auto y) {
    const Jet v = L(x, y);
    return v * v;
  });
  CHECK(std::abs(0.5 * fd_derivative(L2, p, {}, {0, 0}) - b.g(0, 0)) < 1e-5 * b.g(0, 0));
}

TEST_CASE("fundamental identities on a position-dependent Randers space") {
  const auto L = spec_field(kRandersVar);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const FiberPoint p({u(rng), u(rng), u(rng)}, {1.0 + u(rng), u(rng), u(rng)});
    const auto b = base_tensors(L, p);
    const auto c = connection_data(L, p);
    const int n = 3;
    CHECK(std::abs(dot(b.l, b.y) - b.L) < 1e-12);
    CHECK(residual(matmul(b.g, b.y), b.l * b.L) < 1e-12);
    CHECK(max_abs(matmul(b.h, b.y)) < 1e-12);
    CHECK(max_abs(transvect_last(b.C, b.y)) < 1e-12);
    Tensor<double> id(n, 2);
    for (int i = 0; i < n; ++i) id(i, i) = 1.0;
    CHECK(residual(matmul(b.g, b.g_inv), id) < 1e-12);
    CHECK(residual(transvect_last(c.N, b.y), c.G * 2.0) < 1e-12);
    CHECK(residual(transvect_last(c.F, b.y), c.N) < 1e-11);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          CHECK(std::abs(c.gamma(i, j, k) - c.gamma(i, k, j)) < 1e-13);
          CHECK(std::abs(c.berwald(i, j, k) - c.berwald(i, k, j)) < 1e-12);
          CHECK(std::abs(b.C(i, j, k) - b.C(j, k, i)) == 0.0);
        }
    // Homogeneity degrees in y.
    for (double lambda : {0.5, 2.0}) {
      const FiberPoint q(p.x, {lambda * p.y[0], lambda * p.y[1], lambda * p.y[2]});
      const auto bq = base_tensors(L, q);
      const auto cq = connection_data(L, q);
      CHECK(residual(bq.g, b.g) < 1e-12);
      CHECK(residual(bq.C * lambda, b.C) < 1e-12);
      CHECK(residual(cq.G, c.G * (lambda * lambda)) < 1e-12);
      CHECK(residual(cq.N, c.N * lambda) < 1e-12);
      CHECK(residual(cq.F, c.F) < 1e-12);
    }
  }
}

TEST_CASE("nonlinear connection against finite differences of the spray") {
  const auto L = spec_field(kRandersVar);
  const FiberPoint p({0.3, -0.4, 0.2}, {1.1, 0.5, -0.7});
  const auto c = connection_data(L, p);
  for (int i = 0; i < 3; ++i) {
    const auto Gi = spray_field(L, i);
    for (int j = 0; j < 3; ++j) {
      const double fd = fd_derivative(Gi, p, {}, {j});
      CHECK(std::abs(fd - c.N(i, j)) < 1e-6 * std::max(1.0, std::abs(c.N(i, j))));
    }
  }
}

TEST_CASE("fiber jets of the base tensors differentiate to the next order") {
  const auto L = spec_field(kRandersVar);
  const FiberPoint p({0.3, -0.4, 0.2}, {1.1, 0.5, -0.7});
  const Jet Lj = metric_jet(L, p);
  const auto b1 = base_tensors_from<Jet>(Lj, p, 1);
  const auto c1 = connection_from<Jet>(Lj, p, b1, 1, false);
  const auto b0 = base_tensors_from<double>(Lj, p);
  const auto c0 = connection_from<double>(Lj, p, b0);
  CHECK(residual(values(b1.g), b0.g) < 1e-14);
  CHECK(residual(values(c1.N), c0.N) < 1e-12);
  for (int k = 0; k < 3; ++k) {
    const auto dg = fiber_derivative(b1.g, k);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(0.5 * dg(i, j) - b0.C(i, j, k)) < 1e-12);
    const auto dN = fiber_derivative(c1.N, k);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(dN(i, j) - c0.berwald(i, j, k)) < 1e-10);
  }
}

TEST_CASE("covariant derivatives") {
  const auto L = spec_field(kRandersVar);
  const FiberPoint p({0.3, -0.4, 0.2}, {1.1, 0.5, -0.7});
  const auto base = base_tensors(L, p);
  const auto conn = connection_data(L, p);
  CHECK(max_abs(h_cov_deriv(scalar_tensor_field(L), conn, p)) < 1e-12);
  CHECK(max_abs(h_cov_deriv(metric_tensor_field(L), conn, p)) < 1e-8);
  CHECK(max_abs(h_cov_deriv(support_tensor_field(3), conn, p)) < 1e-12);
  CHECK(residual(v_cov_deriv(scalar_tensor_field(L), base, p), base.l) < 1e-14);
  Tensor<double> id(3, 2);
  for (int i = 0; i < 3; ++i) id(i, i) = 1.0;
  CHECK(residual(v_cov_deriv(support_tensor_field(3), base, p), id) < 1e-13);
  CHECK(max_abs(v_cov_deriv(metric_tensor_field(L), base, p)) < 1e-12);
  CHECK(max_abs(v_cov_deriv(supporting_element_field(L), base, p) - base.h * (1.0 / base.L)) < 1e-12);
}

TEST_CASE("parallel covector on flat space and Riemannian v-derivative of b") {
  const auto E = spec_field(R"j({"n": 2, "kind": "euclidean"})j");
  const FiberPoint p({0.5, 1.5}, {0.8, -0.3});
  HVectorSpec constant = HVectorSpec::zero(2);
  constant.c = {Expr::parse("0.3", 2), Expr::parse("-0.1", 2)};
  CHECK(max_abs(h_cov_deriv(h_vector_field(constant, E), connection_data(E, p), p)) < 1e-15);

  const auto R = spec_field(R"j({"n": 2, "kind": "riemannian", "a": [["1+x1*x1", "0"], ["0", "1"]]})j");
  HVectorSpec h = HVectorSpec::zero(2);
  h.c = {Expr::parse("x2", 2), Expr::parse("0.2", 2)};
  h.rho = Expr::parse("0.1*x1", 2);
  const auto base = base_tensors(R, p);
  const auto vb = v_cov_deriv(h_vector_field(h, R), base, p);
  CHECK(residual(vb, base.h * (0.05 / base.L)) < 1e-13);
  h.rho = Expr::parse("0", 2);
  CHECK(max_abs(v_cov_deriv(h_vector_field(h, R), base, p)) < 1e-15);
}

TEST_CASE("h-vector construction") {
  const auto E = spec_field(R"j({"n": 2, "kind": "euclidean"})j");
  const FiberPoint p({0.0, 0.0}, {3.0, 4.0});
  const auto zero = make_h_vector(HVectorSpec::zero(2), E, p);
  CHECK(zero.beta == 0.0);
  CHECK(zero.s == 0.0);
  CHECK(max_abs(zero.m) == 0.0);
  CHECK(std::isinf(zero.tau));

  HVectorSpec h = HVectorSpec::zero(2);
  h.c[0] = Expr::parse("0.3", 2);
  auto d = make_h_vector(h, E, p);
  CHECK(d.beta == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(d.s == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(d.tau == doctest::Approx(50.0 / 9.0).epsilon(1e-15));
  CHECK(h_vector_defect(E, d, p) < 1e-15);

  h.rho = Expr::parse("0.1", 2);
  d = make_h_vector(h, E, p);
  CHECK(d.b(0) == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(d.b(1) == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(d.beta == doctest::Approx(1.4).epsilon(1e-15));
  // C = 0, so the defect is |0.1 h| with h = I - l l.
  CHECK(h_vector_defect(E, d, p) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(dot(d.m, base_tensors(E, p).y)) < 1e-15);
  CHECK(std::abs(d.m2 - (d.b2 - d.s * d.s)) < 1e-15);
}

TEST_CASE("h-vector fiber derivatives") {
  const auto L = spec_field(kRandersVar);
  const FiberPoint p({0.3, -0.4, 0.2}, {1.1, 0.5, -0.7});
  HVectorSpec h = HVectorSpec::zero(3);
  h.c = {Expr::parse("0.1", 3), Expr::parse("0.05*x1", 3), Expr::parse("0", 3)};
  h.rho = Expr::parse("0.05+0.01*x2", 3);
  const Jet Lj = metric_jet(L, p);
  const auto b1 = base_tensors_from<Jet>(Lj, p, 1);
  const auto hd = h_vector_from<Jet>(h, Lj, p, b1, 1);
  const auto b0 = values(b1.h);
  const double rho = hd.rho.value();
  for (int j = 0; j < 3; ++j) {
    // d beta / dy^j = b_j and d b_i / dy^j = (rho / L) h_ij
    CHECK(std::abs(hd.beta.derivative({}, {j}) - hd.b(j).value()) < 1e-12);
    const auto db = fiber_derivative(hd.b, j);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(db(i) - rho / b1.L.value() * b0(i, j)) < 1e-12);
  }
}
