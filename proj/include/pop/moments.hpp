#pragma once

// Planar moments mu_{jk} (contour route) and contour moments nu^{(i)}_p,
// assembled into the moment matrices D_n and d_n.

#include <map>

#include "pop/chi.hpp"
#include "pop/contour.hpp"

namespace pop {

template <class R>
class MomentEngine {
 public:
  MomentEngine(WeightConfig<R> cfg, QuadratureSpec<R> spec)
      : cfg_(std::move(cfg)),
        spec_(spec),
        gamma_(gamma_polygon(cfg_)),
        chi_(cfg_, spec.with_tol(spec.rel_tol / R(4))) {}

  const WeightConfig<R>& config() const { return cfg_; }
  const ContourGamma<R>& contour() const { return gamma_; }
  const ChiEvaluator<R>& chi() const { return chi_; }
  const QuadratureSpec<R>& spec() const { return spec_; }

  // mu_{jk} = (1/2i) oint z^j chi_k_inf(z) dz.  One contour pass per k keeps
  // the cancellation scales of different k separated.
  Cx<R> mu(int j, int k) const {
    if (j < 0 || k < 0) throw InvalidIndex("mu needs j, k >= 0");
    return mu_column(k, j)[j];
  }

  // (K+1)x(K+1) table, entry (j, k) = mu_{jk}.
  MatC<R> mu_table(int K) const {
    MatC<R> t(K + 1, K + 1);
    for (int k = 0; k <= K; ++k) t.col(k) = mu_column(k, K).head(K + 1);
    return t;
  }

  // nu^{(i)}_p = (1/2i) oint z^p chi_{n - e_i}(z) dz for p = 0..pmax.
  VecC<R> nu_row(const MultiIndex& n, int i, int pmax, bool tilde_route = false) const {
    if (i < 0 || i >= n.size() || n[i] < 1)
      throw InvalidIndex("nu^(i) needs [n]_i >= 1");
    auto key = std::make_tuple(n.k, i, tilde_route);
    auto it = nu_cache_.find(key);
    if (it != nu_cache_.end() && it->second.size() > pmax) return it->second.head(pmax + 1);
    const MultiIndex idx = n.minus(i);
    auto f = [&](Cx<R> z, VecC<R>& out) {
      Cx<R> c = tilde_route ? chi_.chi_tilde(idx, z) : chi_.chi_vec(idx, z);
      Cx<R> p(1);
      for (int q = 0; q <= pmax; ++q, p *= z) out[q] = p * c;
    };
    quad::AdaptResult res;
    VecC<R> v = integrate_contour(f, gamma_, pmax + 1, spec_, &res);
    check_convergence<R>(res, "nu_row");
    v /= Cx<R>(0, 2);
    nu_cache_[key] = v;
    return v;
  }

  // D_n: entry (row k, col j) = mu_{jk};  Hermitian positive definite.
  MatC<R> build_D(int n) const {
    if (n < 1) throw InvalidIndex("D_n needs n >= 1");
    MatC<R> mu_t = mu_table(n - 1);
    MatC<R> D(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) D(k, j) = mu_t(j, k);
    return D;
  }

  // d_n: l blocks of heights n_i, block i row k col j = nu^{(i)}_{j+k}.
  MatC<R> build_d(const MultiIndex& n) const {
    const int N = n.total();
    if (N < 1) throw InvalidIndex("d_n needs |n| >= 1");
    MatC<R> d(N, N);
    int row = 0;
    for (int i = 0; i < n.size(); ++i) {
      if (n[i] == 0) continue;
      VecC<R> nu = nu_row(n, i, N - 1 + n[i] - 1);
      for (int k = 0; k < n[i]; ++k, ++row)
        for (int j = 0; j < N; ++j) d(row, j) = nu[j + k];
    }
    return d;
  }

  // |area route - contour route| for  int p(z) zbar^m e^{-|z|^2} |W|^2 dA.
  R verify_prop1(const VecC<R>& poly_coeffs, int m, const QuadratureSpec<R>& area_spec,
                 R* scale_out = nullptr) const {
    auto horner = [&](Cx<R> z) {
      Cx<R> v(0);
      for (int i = int(poly_coeffs.size()) - 1; i >= 0; --i) v = v * z + poly_coeffs[i];
      return v;
    };
    auto g = [&](Cx<R> z, VecC<R>& o) { o[0] = horner(z) * std::pow(std::conj(z), m); };
    quad::AdaptResult ares;
    Cx<R> area =
        area_integral(cfg_, g, R(int(poly_coeffs.size()) - 1 + m), 1, area_spec, &ares)[0];
    check_convergence<R>(ares, "prop1 area route");
    auto fc = [&](Cx<R> z, VecC<R>& o) { o[0] = horner(z) * chi_.chi_m_inf(m, z); };
    quad::AdaptResult cres;
    Cx<R> contour_v = integrate_contour(fc, gamma_, 1, spec_, &cres)[0] / Cx<R>(0, 2);
    check_convergence<R>(cres, "prop1 contour route");
    if (scale_out) *scale_out = std::max(std::abs(area), std::abs(contour_v));
    return std::abs(area - contour_v);
  }

 private:
  const VecC<R>& mu_column(int k, int jmax) const {
    auto it = mu_cache_.find(k);
    if (it != mu_cache_.end() && it->second.size() > jmax) return it->second;
    auto f = [&](Cx<R> z, VecC<R>& out) {
      Cx<R> c = chi_.chi_m_inf(k, z);
      Cx<R> p(1);
      for (int j = 0; j <= jmax; ++j, p *= z) out[j] = p * c;
    };
    quad::AdaptResult res;
    VecC<R> v = integrate_contour(f, gamma_, jmax + 1, spec_, &res);
    check_convergence<R>(res, "mu_column");
    v /= Cx<R>(0, 2);
    return mu_cache_[k] = v;
  }

  WeightConfig<R> cfg_;
  QuadratureSpec<R> spec_;
  ContourGamma<R> gamma_;
  ChiEvaluator<R> chi_;
  mutable std::map<int, VecC<R>> mu_cache_;
  mutable std::map<std::tuple<std::vector<int>, int, bool>, VecC<R>> nu_cache_;
};

}  // namespace pop
