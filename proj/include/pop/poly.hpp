#pragma once

// Monic orthogonal polynomials: the planar p_n, the multiple (type II)
// p_n-vector and q_n^{(i)}, the staircase index map, and supporting
// linear-algebra/root-finding utilities.

#include <random>

#include "pop/moments.hpp"

namespace pop {

template <class R>
struct MonicPoly {
  VecC<R> coeffs;  // ascending; back() == 1

  int degree() const { return int(coeffs.size()) - 1; }
  Cx<R> eval(Cx<R> z) const {
    Cx<R> v(0);
    for (int i = int(coeffs.size()) - 1; i >= 0; --i) v = v * z + coeffs[i];
    return v;
  }
  static MonicPoly constant() {
    MonicPoly p;
    p.coeffs = VecC<R>::Ones(1);
    return p;
  }
};

struct StaircaseIndex {
  int n = 0, l = 1, kappa = 0, r = 0;
  MultiIndex nvec;
};

// n = kappa*l + r, nvec = (kappa+1 x r, kappa x (l-r)).
inline StaircaseIndex staircase(int n, int l) {
  if (n < 0 || l < 1) throw InvalidIndex("staircase needs n >= 0, l >= 1");
  StaircaseIndex s;
  s.n = n;
  s.l = l;
  s.kappa = n / l;
  s.r = n % l;
  std::vector<int> v(l, s.kappa);
  for (int j = 0; j < s.r; ++j) v[j] = s.kappa + 1;
  s.nvec = MultiIndex(v);
  return s;
}

// ---------------------------------------------------------------- linear solve

// Column-pivoted solve with row/column equilibration and one refinement pass.
// Moment systems are near-Hankel; the condition estimate is reported.
template <class R>
VecC<R> solve_refined(const MatC<R>& M, const VecC<R>& b, R* cond_out = nullptr) {
  const int n = int(M.rows());
  VecR<R> rs(n), cs(n);
  for (int i = 0; i < n; ++i) {
    R m = M.row(i).cwiseAbs().maxCoeff();
    rs[i] = m > R(0) ? R(1) / std::sqrt(m) : R(1);
  }
  MatC<R> T = rs.asDiagonal() * M;
  for (int j = 0; j < n; ++j) {
    R m = T.col(j).cwiseAbs().maxCoeff();
    cs[j] = m > R(0) ? R(1) / m : R(1);
  }
  T = T * cs.template cast<Cx<R>>().asDiagonal();
  Eigen::FullPivLU<MatC<R>> lu(T);
  R pmax = std::abs(lu.matrixLU()(0, 0));
  R pmin = std::abs(lu.matrixLU()(n - 1, n - 1));
  R cond = pmin > R(0) ? pmax / pmin : std::numeric_limits<R>::infinity();
  if (cond_out) *cond_out = cond;
  if (!lu.isInvertible())
    throw SingularSystem("moment system numerically singular, pivot ratio " +
                         std::to_string(double(cond)));
  VecC<R> bs = rs.template cast<Cx<R>>().asDiagonal() * b;
  VecC<R> y = lu.solve(bs);
  y += lu.solve(bs - T * y);  // one step of iterative refinement
  return cs.template cast<Cx<R>>().asDiagonal() * y;
}

// ---------------------------------------------------------------- solves

template <class R>
struct PlanarSolution {
  MonicPoly<R> p;
  Cx<R> h;     // norming constant, real positive
  R cond = 0;
  R residual = 0;  // max orthogonality defect relative to the mu scale
};

// p_n from  sum_j alpha_j mu_{j,m} = 0, m = 0..n-1, alpha_n = 1.
template <class R>
PlanarSolution<R> solve_planar(const MomentEngine<R>& eng, int n) {
  PlanarSolution<R> sol;
  MatC<R> mu = eng.mu_table(n);
  if (n == 0) {
    sol.p = MonicPoly<R>::constant();
    sol.h = mu(0, 0);
    return sol;
  }
  MatC<R> M(n, n);
  VecC<R> b(n);
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) M(m, j) = mu(j, m);
    b[m] = -mu(n, m);
  }
  VecC<R> alpha = solve_refined(M, b, &sol.cond);
  sol.p.coeffs.resize(n + 1);
  sol.p.coeffs.head(n) = alpha;
  sol.p.coeffs[n] = Cx<R>(1);
  sol.h = 0;
  for (int j = 0; j <= n; ++j) sol.h += sol.p.coeffs[j] * mu(j, n);
  R mu_scale = mu.cwiseAbs().maxCoeff();
  for (int m = 0; m < n; ++m) {
    Cx<R> resid = 0;
    for (int j = 0; j <= n; ++j) resid += sol.p.coeffs[j] * mu(j, m);
    sol.residual = std::max(sol.residual, std::abs(resid) / mu_scale);
  }
  return sol;
}

template <class R>
struct MultipleSolution {
  MonicPoly<R> p;
  R cond = 0;
  R residual = 0;
};

// p_nvec from  sum_j alpha_j nu^{(i)}_{j+k} = 0, k = 0..n_i - 1, each i.
template <class R>
MultipleSolution<R> solve_multiple(const MomentEngine<R>& eng, const MultiIndex& nvec,
                                   bool tilde_route = false) {
  MultipleSolution<R> sol;
  const int n = nvec.total();
  if (n == 0) {
    sol.p = MonicPoly<R>::constant();
    return sol;
  }
  MatC<R> M(n, n);
  VecC<R> b(n);
  int row = 0;
  R scale = 0;
  for (int i = 0; i < nvec.size(); ++i) {
    if (nvec[i] == 0) continue;
    VecC<R> nu = eng.nu_row(nvec, i, n + nvec[i] - 1, tilde_route);
    scale = std::max(scale, nu.cwiseAbs().maxCoeff());
    for (int k = 0; k < nvec[i]; ++k, ++row) {
      for (int j = 0; j < n; ++j) M(row, j) = nu[j + k];
      b[row] = -nu[n + k];
    }
  }
  VecC<R> alpha = solve_refined(M, b, &sol.cond);
  sol.p.coeffs.resize(n + 1);
  sol.p.coeffs.head(n) = alpha;
  sol.p.coeffs[n] = Cx<R>(1);
  VecC<R> resid = M * alpha - b;
  sol.residual = resid.cwiseAbs().maxCoeff() / scale;
  return sol;
}

// q_nvec^{(i)}: monic of degree |n| - 1 with the delta-reduced conditions
// (k = 0..n_j - 1 - delta_{ij}); a consistent square system.
template <class R>
MultipleSolution<R> solve_q(const MomentEngine<R>& eng, const MultiIndex& nvec, int i) {
  MultipleSolution<R> sol;
  const int n = nvec.total();
  if (n < 1) throw InvalidIndex("q needs |n| >= 1");
  if (n == 1) {
    sol.p = MonicPoly<R>::constant();
    return sol;
  }
  MatC<R> M(n - 1, n - 1);
  VecC<R> b(n - 1);
  int row = 0;
  R scale = 0;
  for (int j = 0; j < nvec.size(); ++j) {
    const int rows_j = nvec[j] - (j == i ? 1 : 0);
    if (rows_j <= 0 || nvec[j] == 0) continue;
    VecC<R> nu = eng.nu_row(nvec, j, (n - 1) + rows_j - 1);
    scale = std::max(scale, nu.cwiseAbs().maxCoeff());
    for (int k = 0; k < rows_j; ++k, ++row) {
      for (int t = 0; t < n - 1; ++t) M(row, t) = nu[t + k];
      b[row] = -nu[n - 1 + k];
    }
  }
  if (row != n - 1) throw InvalidIndex("q system is not square for this multi-index");
  VecC<R> alpha = solve_refined(M, b, &sol.cond);
  sol.p.coeffs.resize(n);
  sol.p.coeffs.head(n - 1) = alpha;
  sol.p.coeffs[n - 1] = Cx<R>(1);
  VecC<R> resid = M * alpha - b;
  sol.residual = resid.cwiseAbs().maxCoeff() / scale;
  return sol;
}

// Max coefficient deviation between p_n (planar route) and p_nvec (multiple
// route at the staircase index), relative to the coefficient norm.
template <class R>
R verify_theorem1(const MomentEngine<R>& eng, int n, R* abs_dev = nullptr) {
  auto planar = solve_planar(eng, n);
  auto multiple = solve_multiple(eng, staircase(n, eng.config().l()).nvec);
  R dev = (planar.p.coeffs - multiple.p.coeffs).cwiseAbs().maxCoeff();
  if (abs_dev) *abs_dev = dev;
  return dev / planar.p.coeffs.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- span ranks

struct RankReport {
  int rank_lower = 0;   // span { chitilde_k : |k| < n }
  int rank_shift = 0;   // span { z^k chitilde_{n - e_j} }
  int rank_union = 0;
  bool equal() const { return rank_lower == rank_shift && rank_shift == rank_union; }
};

template <class R>
int numerical_rank(const MatC<R>& A, R rel_threshold) {
  Eigen::JacobiSVD<MatC<R>> svd(A);
  auto sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == R(0)) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_threshold * sv[0]) ++rank;
  return rank;
}

template <class R>
RankReport span_rank_check(const ChiEvaluator<R>& chi, int n, int sample_count,
                           unsigned seed = 12345u) {
  const auto& cfg = chi.config();
  const int l = cfg.l();
  if (sample_count < 2 * n) throw RankDeficientSampling("need at least 2n sample points");
  auto idx = staircase(n, l);
  // sample points off every cut direction
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> rad(0.6, 2.2), ang(0.0, 2 * 3.14159265358979);
  std::vector<Cx<R>> pts;
  while (int(pts.size()) < sample_count) {
    Cx<R> z = std::polar(R(rad(rng)), R(ang(rng)));
    bool ok = true;
    for (R b : cfg.cut_angles)
      if (angle_gap(arg_in_0_2pi(z), b) < R(1e-2)) ok = false;
    if (ok) pts.push_back(z);
  }
  std::vector<MultiIndex> lower = indices_below_total(l, n);
  std::vector<MultiIndex> shifted_idx;
  std::vector<int> shifted_pow;
  for (int j = 0; j < l; ++j)
    for (int k = 0; k < idx.nvec[j]; ++k) {
      shifted_idx.push_back(idx.nvec.minus(j));
      shifted_pow.push_back(k);
    }
  MatC<R> A(sample_count, int(lower.size()));
  MatC<R> B(sample_count, int(shifted_idx.size()));
  for (int t = 0; t < sample_count; ++t) {
    VecC<R> va = chi.chi_tilde_batch(lower, pts[t]);
    A.row(t) = va.transpose();
    VecC<R> vb = chi.chi_tilde_batch(shifted_idx, pts[t]);
    for (size_t c = 0; c < shifted_idx.size(); ++c)
      B(t, int(c)) = std::pow(pts[t], shifted_pow[c]) * vb[int(c)];
  }
  MatC<R> U(sample_count, A.cols() + B.cols());
  U << A, B;
  RankReport rep;
  const R thr = R(1e-8);
  rep.rank_lower = numerical_rank(A, thr);
  rep.rank_shift = numerical_rank(B, thr);
  rep.rank_union = numerical_rank(U, thr);
  return rep;
}

// ---------------------------------------------------------------- roots

// Aberth-Ehrlich simultaneous iteration from a perturbed circle.
template <class R>
std::vector<Cx<R>> roots(const MonicPoly<R>& poly, int max_iter = 400) {
  const int n = poly.degree();
  if (n < 1) throw InvalidIndex("roots need degree >= 1");
  R radius = 0;  // Cauchy bound
  for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(poly.coeffs[i]));
  radius = R(1) + radius;
  std::vector<Cx<R>> x(n);
  for (int i = 0; i < n; ++i)
    x[i] = std::polar(radius * R(0.7), R(2) * pi_v<R> * R(i) / R(n) + R(0.41));
  auto deriv = [&](Cx<R> z) {
    Cx<R> v(0);
    for (int i = n; i >= 1; --i) v = v * z + R(i) * poly.coeffs[i];
    return v;
  };
  for (int it = 0; it < max_iter; ++it) {
    R moved = 0;
    for (int i = 0; i < n; ++i) {
      Cx<R> p = poly.eval(x[i]);
      Cx<R> d = deriv(x[i]);
      if (d == Cx<R>(0)) d = Cx<R>(std::numeric_limits<R>::epsilon());
      Cx<R> newton = p / d;
      Cx<R> sum(0);
      for (int j = 0; j < n; ++j)
        if (j != i) sum += Cx<R>(1) / (x[i] - x[j]);
      Cx<R> step = newton / (Cx<R>(1) - newton * sum);
      x[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < R(1e-14) * radius) break;
  }
  R coeff_norm = poly.coeffs.cwiseAbs().maxCoeff();
  for (auto& root : x)
    if (std::abs(poly.eval(root)) > R(1e-10) * coeff_norm * std::pow(std::max(R(1), std::abs(root)), R(n)))
      throw NoConvergence("root iteration did not reach residual tolerance", 0.0);
  return x;
}

}  // namespace pop
