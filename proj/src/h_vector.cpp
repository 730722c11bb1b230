#include "finsler/h_vector.hpp"

#include <limits>

namespace finsler {

namespace {

// b_i and rho as jets one y-order below `L`.
std::vector<Jet> b_jets(const HVectorSpec& spec, const Jet& L, const FiberPoint& p, Jet* rho) {
  const int n = p.dim();
  const auto z = coordinate_jets(p, L.shape()->order_x(), L.shape()->order_y() - 1);
  const std::span<const Jet> all(z);
  const auto x = all.first(n);
  const auto y = all.last(n);
  *rho = spec.rho.evaluate(x, y);
  std::vector<Jet> b;
  for (int i = 0; i < n; ++i) b.push_back(spec.c[i].evaluate(x, y) + *rho * L.diff_y(i));
  return b;
}

}  // namespace

template <class S>
HVectorDataT<S> h_vector_from(const HVectorSpec& spec, const Jet& L, const FiberPoint& p,
                              const BaseTensorsT<S>& base, int K) {
  const int n = p.dim();
  if (static_cast<int>(spec.c.size()) != n) throw std::invalid_argument("h-vector dimension mismatch");
  HVectorDataT<S> out;
  Jet rho;
  out.b_jet = b_jets(spec, L, p, &rho);
  out.rho = S(rho.value());
  out.rho_k = Tensor<double>(n, 1);
  for (int k = 0; k < n; ++k) {
    const int dk[1] = {k};
    out.rho_k(k) = rho.derivative(dk, {});
  }
  out.b = Tensor<S>(n, 1);
  for (int i = 0; i < n; ++i) out.b(i) = lift<S>(out.b_jet[i], K);
  out.beta = dot(out.b, base.y);
  out.s = out.beta / base.L;
  const double beta = value_of(out.beta);
  out.tau = beta == 0.0 ? std::numeric_limits<double>::infinity() : value_of(base.L) / beta;
  out.m = out.b - base.l * out.s;
  out.m2 = dot(out.m, matmul(base.g_inv, out.m));
  out.b2 = dot(out.b, matmul(base.g_inv, out.b));
  return out;
}

template HVectorDataT<double> h_vector_from<double>(const HVectorSpec&, const Jet&, const FiberPoint&,
                                                    const BaseTensorsT<double>&, int);
template HVectorDataT<Jet> h_vector_from<Jet>(const HVectorSpec&, const Jet&, const FiberPoint&,
                                              const BaseTensorsT<Jet>&, int);

HVectorData make_h_vector(const HVectorSpec& spec, const ScalarField& L, const FiberPoint& p) {
  const Jet Lj = metric_jet(L, p);
  return h_vector_from<double>(spec, Lj, p, base_tensors_from<double>(Lj, p));
}

double h_vector_defect(const BaseTensors& base, const HVectorData& b) {
  const int n = base.g.dim();
  Tensor<double> d(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int h = 0; h < n; ++h) v += base.C_mixed(h, i, j) * b.b(h);
      d(i, j) = base.L * v - b.rho * base.h(i, j);
    }
  return frobenius(d);
}

double h_vector_defect(const ScalarField& L, const HVectorData& b, const FiberPoint& p) {
  return h_vector_defect(base_tensors(L, p), b);
}

TensorField h_vector_field(const HVectorSpec& spec, const ScalarField& L) {
  return {L.dim(), {false}, [spec, L](const FiberPoint& p, int ox, int oy) {
            const Jet Lj = jet_eval(L, p, ox, oy + 1);
            Jet rho;
            const auto b = b_jets(spec, Lj, p, &rho);
            Tensor<Jet> t(p.dim(), 1);
            for (int i = 0; i < p.dim(); ++i) t(i) = b[i];
            return t;
          }};
}

}  // namespace finsler
