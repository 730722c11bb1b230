#include <doctest.h>

#include <cmath>
#include <random>

#include "finsler/field.hpp"
#include "finsler/jet.hpp"

using namespace finsler;

namespace {

ScalarField field2(ScalarField::Evaluator f) { return ScalarField(2, std::move(f)); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("polynomial second y-derivative is exact") {
  auto f = field2([](auto, auto y) { return y[0] * y[0]; });
  const FiberPoint p({0.3, -0.2}, {3.0, 4.0});
  const Jet j = jet_eval(f, p, 1, 4);
  CHECK(j.value() == 9.0);
  CHECK(j.derivative({}, {0, 0}) == 2.0);
  CHECK(j.derivative({}, {0}) == 6.0);
  CHECK(j.derivative({}, {0, 0, 0}) == 0.0);
}

TEST_CASE("Euclidean norm gradient") {
  auto f = field2([](auto, auto y) { return sqrt(y[0] * y[0] + y[1] * y[1]); });
  const FiberPoint p({0.0, 0.0}, {3.0, 4.0});
  const Jet j = jet_eval(f, p, 1, 4);
  CHECK(j.value() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(j.derivative({}, {0}) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(std::abs(fd_derivative(f, p, {}, {0}) - 0.6) < 1e-8);
}

TEST_CASE("mixed x-y derivative") {
  auto f = field2([](auto x, auto y) { return x[0] * y[0]; });
  const FiberPoint p({0.7, 1.1}, {2.0, -1.0});
  const Jet j = jet_eval(f, p, 1, 4);
  CHECK(j.derivative({0}, {0}) == 1.0);
  CHECK(j.derivative({1}, {0}) == 0.0);
  CHECK(j.derivative({0}, {1}) == 0.0);
}

TEST_CASE("third derivative by finite differences") {
  auto f = field2([](auto, auto y) { return y[0] * y[0] * y[0]; });
  const FiberPoint p({0.0, 0.0}, {1.3, 0.4});
  CHECK(std::abs(fd_derivative(f, p, {}, {0, 0, 0}) - 6.0) < 1e-4);
}

TEST_CASE("every monomial of degree at most 4 differentiates exactly") {
  // Integer data: all derivatives are integers and must come out bit-exact.
  const int n = 2;
  const FiberPoint p({2.0, -1.0}, {3.0, -2.0});
  for (int ax = 0; ax <= 1; ++ax)
    for (int a0 = 0; a0 <= 4; ++a0)
      for (int a1 = 0; a0 + a1 <= 4; ++a1) {
        const int xvar = 0;
        ScalarField f(n, [=](auto x, auto y) {
          Jet m(1.0);
          for (int k = 0; k < ax; ++k) m *= x[xvar];
          for (int k = 0; k < a0; ++k) m *= y[0];
          for (int k = 0; k < a1; ++k) m *= y[1];
          return m;
        });
        const Jet j = jet_eval(f, p, 1, 4);
        for (int dx = 0; dx <= 1; ++dx)
          for (int d0 = 0; d0 <= 4; ++d0)
            for (int d1 = 0; d0 + d1 <= 4; ++d1) {
              auto falling = [](int a, int d, double v) {
                if (d > a) return 0.0;
                double c = 1.0;
                for (int k = 0; k < d; ++k) c *= a - k;
                return c * std::pow(v, a - d);
              };
              const double expect = falling(ax, dx, p.x[0]) * falling(a0, d0, p.y[0]) * falling(a1, d1, p.y[1]);
              std::vector<int> dxs(dx, 0);
              std::vector<int> dys;
              dys.insert(dys.end(), d0, 0);
              dys.insert(dys.end(), d1, 1);
              CHECK(j.derivative(dxs, dys) == expect);
            }
      }
}

TEST_CASE("jet and finite differences agree on composite fields") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto f = ScalarField(3, [](auto x, auto y) {
    const Jet q = (1.0 + x[0] * x[0]) * y[0] * y[0] + y[1] * y[1] + (2.0 + x[1]) * y[2] * y[2] + 0.3 * y[0] * y[1];
    return sqrt(q) + 0.2 * x[2] * y[0] + pow(q, 1.5) / (3.0 + y[2] * y[2]);
  });
  const std::vector<std::vector<int>> dys = {{0}, {1, 2}, {0, 0}, {0, 1, 2}, {2, 2, 1}, {0, 0, 1, 1}};
  for (int trial = 0; trial < 5; ++trial) {
    const FiberPoint p({u(rng), u(rng), u(rng)}, {u(rng) + 1.5, u(rng), u(rng)});
    const Jet j = jet_eval(f, p, 1, 4);
    for (const auto& dy : dys) {
      const double a = j.derivative({}, dy);
      const double b = fd_derivative(f, p, {}, dy);
      CHECK((rel_err(a, b) < 1e-5 || std::abs(a - b) < 1e-7));
    }
    const int dx[1] = {0};
    const int dy1[2] = {0, 1};
    const double a = j.derivative(dx, dy1);
    const double b = fd_derivative(f, p, dx, dy1);
    CHECK((rel_err(a, b) < 1e-5 || std::abs(a - b) < 1e-7));
  }
}

TEST_CASE("homogeneity pushforward") {
  auto f = field2([](auto x, auto y) { return sqrt((1.0 + x[0] * x[0]) * y[0] * y[0] + y[1] * y[1]) + 0.2 * y[0]; });
  const FiberPoint p({0.4, 0.1}, {1.2, -0.7});
  const Jet j = jet_eval(f, p, 1, 4);
  for (double lambda : {0.5, 2.0, 3.0}) {
    const FiberPoint q(p.x, {lambda * p.y[0], lambda * p.y[1]});
    const Jet k = jet_eval(f, q, 1, 4);
    CHECK(std::abs(k.value() - lambda * j.value()) < 1e-10 * lambda * j.value());
    for (int i = 0; i < 2; ++i) CHECK(std::abs(k.derivative({}, {i}) - j.derivative({}, {i})) < 1e-10);
  }
}

TEST_CASE("domain errors and orders") {
  auto f = field2([](auto, auto y) { return sqrt(y[0] - 10.0); });
  const FiberPoint p({0.0, 0.0}, {1.0, 0.0});
  CHECK_THROWS_AS(jet_eval(f, p, 1, 4), DomainError);
  auto g = field2([](auto, auto y) { return y[0]; });
  CHECK_THROWS(jet_eval(g, p, 2, 4));
  CHECK_THROWS(jet_eval(g, p, 1, 5));
  CHECK_THROWS(FiberPoint({0.0, 0.0}, {0.0, 0.0}));
  CHECK_THROWS(FiberPoint({0.0}, {1.0}));
  const Jet j = jet_eval(g, p, 1, 2);
  CHECK_THROWS_AS(j.derivative({}, {0, 0, 0}), std::out_of_range);
}

TEST_CASE("constant fields produce shaped jets") {
  auto f = field2([](auto, auto) { return Jet(2.5); });
  const Jet j = jet_eval(f, FiberPoint({0.0, 0.0}, {1.0, 1.0}), 1, 3);
  CHECK(j.value() == 2.5);
  CHECK(j.derivative({0}, {1}) == 0.0);
}
