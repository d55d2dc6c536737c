#pragma once

// The constant matrix A_n linking the two moment systems (d_n = A_n D_n),
// its closed-form determinant, and the three-factor transfer chain
// B = B3 B2 B1 that peels one degree off the staircase index.

#include "pop/poly.hpp"

namespace pop {

template <class R>
struct MatrixA {
  MatC<R> A;
  Cx<R> det;
  R residual = 0;  // ||A D - d||_inf / ||d||_inf
};

// A_n from the row system A_n D_n = d_n (solve, do not invert).
template <class R>
MatrixA<R> compute_A(const MomentEngine<R>& eng, int n) {
  MatrixA<R> out;
  MatC<R> D = eng.build_D(n);
  MatC<R> d = eng.build_d(staircase(n, eng.config().l()).nvec);
  Eigen::FullPivLU<MatC<R>> lu(D.transpose());
  if (!lu.isInvertible()) throw SingularD("moment matrix D_n is numerically singular");
  out.A = lu.solve(d.transpose()).transpose();
  out.A += lu.solve((d - out.A * D).transpose()).transpose();
  out.det = out.A.determinant();
  out.residual = (out.A * D - d).cwiseAbs().maxCoeff() / d.cwiseAbs().maxCoeff();
  return out;
}

// Closed form of det A_n, evaluated through both printed forms (the generic
// multi-index product and its kappa/r expansion); they must agree.
template <class R>
Cx<R> det_A_closed(const WeightConfig<R>& cfg, int n) {
  const int l = cfg.l();
  auto st = staircase(n, l);
  const int kappa = st.kappa, r = st.r;
  std::vector<Cx<R>> ab(l);
  for (int j = 0; j < l; ++j) ab[j] = std::conj(cfg.nodes[j]);
  const R sign = (n * (n - 1) / 2) % 2 == 0 ? R(1) : R(-1);

  Cx<R> generic = sign;
  for (int i = 0; i < l; ++i)
    for (int j = 1; j <= st.nvec[i] - 1; ++j)
      generic *= std::pow(cfg.exponents[i] + R(j), R(j));
  for (int i = 0; i < l; ++i)
    for (int j = i + 1; j < l; ++j)
      generic *= std::pow(ab[j] - ab[i], R(st.nvec[i] * st.nvec[j]));

  Cx<R> expanded = sign;
  for (int i = 0; i < l; ++i)
    for (int j = 1; j <= kappa - 1; ++j)
      expanded *= std::pow(cfg.exponents[i] + R(j), R(j));
  for (int i = 0; i < r; ++i)
    expanded *= std::pow(cfg.exponents[i] + R(kappa), R(kappa));
  for (int i = 0; i < l; ++i)
    for (int j = i + 1; j < l; ++j)
      expanded *= std::pow(ab[j] - ab[i], R(kappa * kappa));
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      expanded *= std::pow(ab[j] - ab[i], R(2 * kappa + 1));
  for (int j = r; j < l; ++j)
    for (int i = 0; i < r; ++i)
      expanded *= std::pow(ab[j] - ab[i], R(kappa));

  R scale = std::max(std::abs(generic), std::abs(expanded));
  if (std::abs(generic - expanded) > R(1e-12) * std::max(scale, R(1)))
    throw InternalMismatch("the two closed determinant forms disagree");
  return generic;
}

// ---------------------------------------------------------------- B chain

template <class R>
struct TransferChain {
  MatC<R> B1, B2, B3, B;
  Cx<R> det_B1, det_B2, det_B3;
};

// Row layout of the length-(n+1) vector V_{m} for a multi-index m with one
// extra slot: blocks j = 1..l of rows z^t chi_{m - e_j}, t = 0..m_j - 1.
inline std::vector<std::pair<int, int>> v_layout(const MultiIndex& m) {
  std::vector<std::pair<int, int>> rows;
  for (int j = 0; j < m.size(); ++j)
    for (int t = 0; t < m[j]; ++t) rows.emplace_back(j, t);
  return rows;
}

template <class R>
TransferChain<R> build_B(const WeightConfig<R>& cfg, int n) {
  const int l = cfg.l();
  auto st = staircase(n, l);
  const int kappa = st.kappa, r = st.r;
  const int N = n + 1;
  const MultiIndex m = st.nvec.plus(r);  // target index, |m| = n + 1
  auto rows = v_layout(m);               // input layout of V_m
  auto at = [&](int j, int t) {
    for (int i = 0; i < N; ++i)
      if (rows[i] == std::make_pair(j, t)) return i;
    throw InternalMismatch("row lookup out of range");
  };
  std::vector<Cx<R>> ab(l);
  for (int j = 0; j < l; ++j) ab[j] = std::conj(cfg.nodes[j]);

  TransferChain<R> tc;
  // (A): rows for j != r use  chi_{n-e_j} = (chi_{m-e_j} - chi_n)/(ab_j - ab_r)
  tc.B1 = MatC<R>::Identity(N, N);
  tc.det_B1 = Cx<R>(1);
  for (int i = 0; i < N; ++i) {
    auto [j, t] = rows[i];
    if (j == r) continue;
    Cx<R> den = ab[j] - ab[r];
    tc.B1(i, i) = Cx<R>(1) / den;
    tc.B1(i, at(r, t)) = Cx<R>(-1) / den;
    tc.det_B1 /= den;
  }
  // (B): inside the j = r block, rows t >= 1 become z^{t-1} chi_{n - e_r}
  // via the recurrence  z chi_n = sum_j (c_j + n_j) chi_{n - e_j}.
  tc.B2 = MatC<R>::Identity(N, N);
  const Cx<R> den = Cx<R>(cfg.exponents[r] + R(kappa));
  for (int t = 1; t <= kappa; ++t) {
    int i = at(r, t);
    tc.B2.row(i).setZero();
    tc.B2(i, at(r, t)) = Cx<R>(1) / den;  // z^t chi_n with t = (t-1)+1
    for (int j = 0; j < l; ++j) {
      if (j == r) continue;
      tc.B2(i, at(j, t - 1)) = -Cx<R>(cfg.exponents[j] + R(st.nvec[j])) / den;
    }
  }
  tc.det_B2 = std::pow(den, R(-kappa));
  // (C): cyclic shift bringing chi_n (the j = r, t = 0 row) to the top.
  tc.B3 = MatC<R>::Zero(N, N);
  const int pos = at(r, 0);  // equals (kappa+1) * r
  tc.B3(0, pos) = Cx<R>(1);
  for (int i = 0; i < pos; ++i) tc.B3(i + 1, i) = Cx<R>(1);
  for (int i = pos + 1; i < N; ++i) tc.B3(i, i) = Cx<R>(1);
  tc.det_B3 = Cx<R>(pos % 2 == 0 ? R(1) : R(-1));

  tc.B = tc.B3 * tc.B2 * tc.B1;
  if ((tc.B3 * tc.B3.transpose() - MatC<R>::Identity(N, N)).cwiseAbs().maxCoeff() > R(0))
    throw InternalMismatch("B3 is not a permutation");
  return tc;
}

// | B_n V_{n + e_{r+1}}(z) - [chi_n; V_n(z)] | / scale, using the tilde
// family (the recurrence behind the middle rows holds pointwise for it).
template <class R>
R verify_B_action(const ChiEvaluator<R>& chi, int n, Cx<R> z, R* scale_out = nullptr) {
  const int l = chi.config().l();
  auto st = staircase(n, l);
  auto tc = build_B(chi.config(), n);
  const MultiIndex m = st.nvec.plus(st.r);
  auto in_rows = v_layout(m);
  std::vector<MultiIndex> need;
  std::vector<int> pows;
  for (auto [j, t] : in_rows) {
    need.push_back(m.minus(j));
    pows.push_back(t);
  }
  // target: chi_n on top, then V_n
  need.push_back(st.nvec);
  pows.push_back(0);
  for (auto [j, t] : v_layout(st.nvec)) {
    need.push_back(st.nvec.minus(j));
    pows.push_back(t);
  }
  VecC<R> vals = chi.chi_tilde_batch(need, z);
  const int N = n + 1;
  VecC<R> vin(N), vtarget(N);
  for (int i = 0; i < N; ++i) vin[i] = std::pow(z, pows[i]) * vals[i];
  for (int i = 0; i < N; ++i) vtarget[i] = std::pow(z, pows[N + i]) * vals[N + i];
  R scale = std::max(vin.cwiseAbs().maxCoeff(), vtarget.cwiseAbs().maxCoeff());
  if (scale_out) *scale_out = scale;
  return ((tc.B * vin - vtarget).cwiseAbs()).maxCoeff();
}

// One-step determinant ratio  det A_{n+1} / det A_n, from the block
// determinants of the transfer chain.
template <class R>
Cx<R> det_ratio_closed(const WeightConfig<R>& cfg, int n) {
  const int l = cfg.l();
  auto st = staircase(n, l);
  std::vector<Cx<R>> ab(l);
  for (int j = 0; j < l; ++j) ab[j] = std::conj(cfg.nodes[j]);
  Cx<R> ratio = Cx<R>(n % 2 == 0 ? R(1) : R(-1));
  ratio *= std::pow(Cx<R>(cfg.exponents[st.r] + R(st.kappa)), R(st.kappa));
  for (int i = 0; i < st.r; ++i) ratio *= std::pow(ab[st.r] - ab[i], R(st.nvec[i]));
  for (int j = st.r + 1; j < l; ++j) ratio *= std::pow(ab[j] - ab[st.r], R(st.nvec[j]));
  return ratio;
}

struct DetRecursionReport {
  double closed_residual = 0;   // closed forms: |det A_{n+1} - ratio det A_n| rel
  double block_residual = 0;    // ratio vs (-1)^{n+2} / (det B1 det B2 det B3)
};

template <class R>
DetRecursionReport det_recursion_check(const WeightConfig<R>& cfg, int n) {
  DetRecursionReport rep;
  Cx<R> an = det_A_closed(cfg, n);
  Cx<R> an1 = det_A_closed(cfg, n + 1);
  Cx<R> ratio = det_ratio_closed(cfg, n);
  rep.closed_residual = double(std::abs(an1 - ratio * an) / std::abs(an1));
  auto tc = build_B(cfg, n);
  Cx<R> via_blocks = Cx<R>(n % 2 == 0 ? R(1) : R(-1)) /
                     (tc.det_B1 * tc.det_B2 * tc.det_B3);
  rep.block_residual = double(std::abs(ratio - via_blocks) / std::abs(ratio));
  return rep;
}

// Coefficients C_0..C_N of prod_i (z - ab_i)^{n_i}.
template <class R>
VecC<R> expand_C(const WeightConfig<R>& cfg, const MultiIndex& nvec) {
  VecC<R> c(1);
  c[0] = Cx<R>(1);
  for (int i = 0; i < nvec.size(); ++i) {
    Cx<R> root = std::conj(cfg.nodes[i]);
    for (int e = 0; e < nvec[i]; ++e) {
      VecC<R> next = VecC<R>::Zero(c.size() + 1);
      next.tail(c.size()) += c;
      next.head(c.size()) -= root * c;
      c = next;
    }
  }
  return c;
}

// max_j | (1/2i) oint z^j chi_n dz - sum_k C_k mu_{jk} | / scale, j < n.
template <class R>
R first_row_identity(const MomentEngine<R>& eng, int n, R* scale_out = nullptr) {
  auto st = staircase(n, eng.config().l());
  VecC<R> C = expand_C(eng.config(), st.nvec);
  MatC<R> mu = eng.mu_table(n);
  // nu_{j,0} for chi_n: treat it as chi_{(n + e_1) - e_1}
  VecC<R> nu = eng.nu_row(st.nvec.plus(0), 0, n);
  R worst = 0, scale = 0;
  for (int j = 0; j <= n; ++j) {
    Cx<R> rhs = 0;
    for (int k = 0; k <= n; ++k) rhs += C[k] * mu(j, k);
    scale = std::max({scale, std::abs(nu[j]), std::abs(rhs)});
    worst = std::max(worst, std::abs(nu[j] - rhs));
  }
  if (scale_out) *scale_out = scale;
  return worst;
}

}  // namespace pop
