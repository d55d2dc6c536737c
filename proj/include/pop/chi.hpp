#pragma once

// The chi families: weighted incomplete Laplace-type integrals
//
//   chi_m(z)      = W(z) int_0^{zbar}       s^m Wbar(s) e^{-zs} ds
//   chi_m_inf(z)  = W(z) int_0^{zbar * inf} s^m Wbar(s) e^{-zs} ds
//   chi_k(z)      = W(z) int_0^{zbar * inf} prod_j (s - abar_j)^{k_j} Wbar(s) e^{-zs} ds
//   chitilde_k(z) = same integrand with the path abar_1 -> 0 -> ray {zbar t}
//
// plus residual checks for the recurrence and difference identities they obey.

#include <map>

#include "pop/quadrature.hpp"
#include "pop/weight.hpp"

namespace pop {

template <class R>
class ChiEvaluator {
 public:
  ChiEvaluator(WeightConfig<R> cfg, QuadratureSpec<R> spec, R eps_dir = R(1e-6))
      : cfg_(std::move(cfg)), spec_(spec), eps_dir_(eps_dir) {}

  const WeightConfig<R>& config() const { return cfg_; }
  const QuadratureSpec<R>& spec() const { return spec_; }

  // ---- the four families (batched versions share one quadrature pass)

  VecC<R> chi_m_finite_batch(int mmax, Cx<R> z) const {
    require_direction(z);
    auto f = [&](Cx<R> s, VecC<R>& out) { power_kernel(s, z, mmax, out); };
    quad::AdaptResult res;
    VecC<R> v =
        integrate_segment(f, Cx<R>(0), std::conj(z), mmax + 1, spec_, R(1), &res);
    check_convergence<R>(res, "chi_m_finite");
    return eval_W(cfg_, z) * v;
  }
  Cx<R> chi_m_finite(int m, Cx<R> z) const { return chi_m_finite_batch(m, z)[m]; }

  VecC<R> chi_m_inf_batch(int mmax, Cx<R> z) const {
    require_direction(z);
    auto f = [&](Cx<R> s, VecC<R>& out) { power_kernel(s, z, mmax, out); };
    quad::AdaptResult res;
    VecC<R> v = integrate_ray(f, Cx<R>(0), std::conj(z) / std::abs(z), std::abs(z),
                              R(mmax) + cfg_.sum_c(), mmax + 1, spec_, &res);
    check_convergence<R>(res, "chi_m_inf");
    return eval_W(cfg_, z) * v;
  }
  Cx<R> chi_m_inf(int m, Cx<R> z) const { return chi_m_inf_batch(m, z)[m]; }

  VecC<R> chi_vec_batch(const std::vector<MultiIndex>& ks, Cx<R> z) const {
    require_direction(z);
    check_indices(ks);
    auto f = [&](Cx<R> s, VecC<R>& out) { product_kernel(s, z, ks, out); };
    quad::AdaptResult res;
    VecC<R> v = integrate_ray(f, Cx<R>(0), std::conj(z) / std::abs(z), std::abs(z),
                              max_total(ks) + cfg_.sum_c(), int(ks.size()), spec_, &res);
    check_convergence<R>(res, "chi_vec");
    return eval_W(cfg_, z) * v;
  }
  Cx<R> chi_vec(const MultiIndex& k, Cx<R> z) const { return chi_vec_batch({k}, z)[0]; }

  // Path abar_1 -> 0 -> ray; the leg never meets the reflected cuts because
  // all node arguments are distinct.
  VecC<R> chi_tilde_batch(const std::vector<MultiIndex>& ks, Cx<R> z) const {
    return chi_tilde_path(ks, z, {});
  }
  Cx<R> chi_tilde(const MultiIndex& k, Cx<R> z) const { return chi_tilde_batch({k}, z)[0]; }

  // Same value over abar_1 -> waypoints... -> 0 -> ray (path-independence probe).
  VecC<R> chi_tilde_path(const std::vector<MultiIndex>& ks, Cx<R> z,
                         const std::vector<Cx<R>>& waypoints) const {
    require_direction(z);
    check_indices(ks);
    auto f = [&](Cx<R> s, VecC<R>& out) { product_kernel(s, z, ks, out); };
    const int dim = int(ks.size());
    // grading for the Hoelder factor (s - abar_1)^{c_1 + k_1} at the start
    R expo = cfg_.exponents[0] + R(min_first_entry(ks));
    R grade = std::clamp(std::ceil(R(6) / (expo + R(1))), R(1), R(8));
    std::vector<Cx<R>> pts{std::conj(cfg_.nodes[0])};
    pts.insert(pts.end(), waypoints.begin(), waypoints.end());
    pts.push_back(Cx<R>(0));
    VecC<R> total = VecC<R>::Zero(dim);
    quad::AdaptResult worst;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      quad::AdaptResult res;
      total += integrate_segment(f, pts[i], pts[i + 1], dim, spec_, i == 0 ? grade : R(1), &res);
      worst.err = std::max(worst.err, res.err);
      worst.converged = worst.converged && res.converged;
    }
    quad::AdaptResult res;
    total += integrate_ray(f, Cx<R>(0), std::conj(z) / std::abs(z), std::abs(z),
                           max_total(ks) + cfg_.sum_c(), dim, spec_, &res);
    worst.err = std::max(worst.err, res.err);
    worst.converged = worst.converged && res.converged;
    check_convergence<R>(worst, "chi_tilde");
    return eval_W(cfg_, z) * total;
  }

  // ---- identity residuals

  // | z chitilde_k - sum_j (c_j + k_j) chitilde_{k - e_j} |, scaled by the
  // largest participating value.
  R lemma1_residual(const MultiIndex& k, Cx<R> z, R* scale_out = nullptr) const {
    for (int j = 0; j < k.size(); ++j)
      if (k[j] < 1) throw InvalidIndex("lemma1 needs every k_j >= 1");
    std::vector<MultiIndex> ks{k};
    for (int j = 0; j < k.size(); ++j) ks.push_back(k.minus(j));
    VecC<R> v = chi_tilde_batch(ks, z);
    Cx<R> lhs = z * v[0], rhs = 0;
    for (int j = 0; j < k.size(); ++j) rhs += (cfg_.exponents[j] + R(k[j])) * v[j + 1];
    R scale = v.cwiseAbs().maxCoeff();
    if (scale_out) *scale_out = scale;
    return std::abs(lhs - rhs);
  }

  // | chitilde_{k+e_n} - chitilde_{k+e_m} + (abar_n - abar_m) chitilde_k |
  R lemma2_residual(const MultiIndex& k, int n, int m, Cx<R> z, R* scale_out = nullptr) const {
    if (n == m || n < 0 || m < 0 || n >= k.size() || m >= k.size())
      throw InvalidIndex("lemma2 needs two distinct node indices");
    VecC<R> v = chi_tilde_batch({k.plus(n), k.plus(m), k}, z);
    Cx<R> an = std::conj(cfg_.nodes[n]), am = std::conj(cfg_.nodes[m]);
    R scale = v.cwiseAbs().maxCoeff();
    if (scale_out) *scale_out = scale;
    return std::abs(v[0] - v[1] + (an - am) * v[2]);
  }

  // Coefficients of z^s chitilde_k = sum_{|d| = s} coeff(d) chitilde_{k - d},
  // obtained by iterating the recurrence s times.
  std::map<MultiIndex, Cx<R>> corollary_expansion(const MultiIndex& k, int s) const {
    int kmin = k[0];
    for (int j = 0; j < k.size(); ++j) kmin = std::min(kmin, k[j]);
    if (s < 1 || s > kmin) throw InvalidIndex("expansion order must satisfy 1 <= s <= min k_j");
    std::map<MultiIndex, Cx<R>> cur{{k, Cx<R>(1)}};
    for (int step = 0; step < s; ++step) {
      std::map<MultiIndex, Cx<R>> next;
      for (auto& [m, co] : cur)
        for (int j = 0; j < k.size(); ++j)
          next[m.minus(j)] += co * (cfg_.exponents[j] + R(m[j]));
      cur = std::move(next);
    }
    std::map<MultiIndex, Cx<R>> out;  // keyed by the decrement d = k - m
    for (auto& [m, co] : cur) {
      std::vector<int> d(k.size());
      for (int j = 0; j < k.size(); ++j) d[j] = k[j] - m.k[j];
      out[MultiIndex(d)] = co;
    }
    return out;
  }

  struct DecayReport {
    std::vector<R> radii, values, ratios;  // g(rho) and g(rho)/e^{-(rho-1)^2}
    bool bounded = false;                  // ratios stay within 10x the first one
  };

  // g(rho) = |z^k| |chi_m_inf(z) - chi_m(z)| along z = rho e^{i theta}.
  DecayReport decay_check(int m, int power_k, R theta, const std::vector<R>& radii) const {
    DecayReport rep;
    rep.radii = radii;
    for (R rho : radii) {
      Cx<R> z = std::polar(rho, theta);
      Cx<R> diff = chi_m_inf(m, z) - chi_m_finite(m, z);
      R g = std::pow(rho, R(power_k)) * std::abs(diff);
      rep.values.push_back(g);
      rep.ratios.push_back(g * std::exp((rho - R(1)) * (rho - R(1))));
    }
    rep.bounded = true;
    for (R r : rep.ratios)
      if (r > R(10) * rep.ratios.front()) rep.bounded = false;
    return rep;
  }

 private:
  void require_direction(Cx<R> z) const {
    if (std::abs(z) == R(0)) throw UndefinedDirection("chi undefined at z = 0");
    R az = arg_in_0_2pi(z);
    for (R b : cfg_.cut_angles)
      if (angle_gap(az, b) <= eps_dir_)
        throw UndefinedDirection("arg z coincides with a cut direction");
  }
  static void check_indices(const std::vector<MultiIndex>& ks) {
    if (ks.empty()) throw InvalidIndex("empty index batch");
  }
  static R max_total(const std::vector<MultiIndex>& ks) {
    int t = 0;
    for (auto& k : ks) t = std::max(t, k.total());
    return R(t);
  }
  int min_first_entry(const std::vector<MultiIndex>& ks) const {
    int m = ks.front()[0];
    for (auto& k : ks) m = std::min(m, k[0]);
    return m;
  }

  // out[m] = s^m Wbar(s) e^{-zs}
  void power_kernel(Cx<R> s, Cx<R> z, int mmax, VecC<R>& out) const {
    Cx<R> common = eval_Wbar(cfg_, s) * std::exp(-z * s);
    Cx<R> p(1);
    for (int m = 0; m <= mmax; ++m, p *= s) out[m] = p * common;
  }

  // out[i] = prod_j (s - abar_j)^{k^{(i)}_j} Wbar(s) e^{-zs}
  void product_kernel(Cx<R> s, Cx<R> z, const std::vector<MultiIndex>& ks, VecC<R>& out) const {
    Cx<R> common = eval_Wbar(cfg_, s) * std::exp(-z * s);
    for (size_t i = 0; i < ks.size(); ++i) {
      Cx<R> p(1);
      for (int j = 0; j < ks[i].size(); ++j) {
        Cx<R> base = s - std::conj(cfg_.nodes[j]);
        for (int e = 0; e < ks[i][j]; ++e) p *= base;
      }
      out[i] = p * common;
    }
  }

  WeightConfig<R> cfg_;
  QuadratureSpec<R> spec_;
  R eps_dir_;
};

}  // namespace pop
