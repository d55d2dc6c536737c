#pragma once

// Branched weight W(z) = prod_j (z - a_j)^{c_j} with one ray cut per node,
// B_j = { a_j t : t >= 1 }, and its conjugate-reflected companion Wbar.

#include <algorithm>
#include <cmath>

#include "pop/types.hpp"

namespace pop {

template <class R>
struct WeightConfig {
  std::vector<Cx<R>> nodes;    // sorted so 0 <= arg a_1 < ... < arg a_l < 2*pi
  std::vector<R> exponents;    // c_j > 0
  std::vector<R> cut_angles;   // beta_j = arg a_j in [0, 2*pi)

  int l() const { return int(nodes.size()); }
  R sum_c() const { return std::accumulate(exponents.begin(), exponents.end(), R(0)); }
  R max_node_abs() const {
    R m = 0;
    for (auto& a : nodes) m = std::max(m, std::abs(a));
    return m;
  }
};

template <class R>
struct WeightTol {
  static constexpr R eps_arg = R(1e-8);    // min pairwise angle gap
  static constexpr R eps_node = R(1e-12);  // |a_j| below this is "zero"
  static constexpr R eps_cut = R(1e-12);   // relative distance treated as on-cut
};

template <class R>
R arg_in_0_2pi(Cx<R> z) {
  R a = std::arg(z);
  if (a < R(0)) a += R(2) * pi_v<R>;
  if (a >= R(2) * pi_v<R>) a -= R(2) * pi_v<R>;
  return a;
}

// Circular distance between two angles, result in [0, pi].
template <class R>
R angle_gap(R a, R b) {
  R d = std::fmod(std::abs(a - b), R(2) * pi_v<R>);
  return std::min(d, R(2) * pi_v<R> - d);
}

template <class R>
WeightConfig<R> validate_config(const std::vector<Cx<R>>& raw_nodes,
                                const std::vector<R>& raw_exponents) {
  if (raw_nodes.empty() || raw_nodes.size() != raw_exponents.size())
    throw EmptyConfig("config needs equally many nodes and exponents, at least one each");
  const int l = int(raw_nodes.size());
  for (int j = 0; j < l; ++j) {
    if (std::abs(raw_nodes[j]) < WeightTol<R>::eps_node)
      throw ZeroNode("node " + std::to_string(j) + " is at (or too close to) the origin");
    if (!(raw_exponents[j] > R(0)))
      throw NonPositiveExponent("exponent " + std::to_string(j) + " must be positive");
  }
  std::vector<int> order(l);
  for (int j = 0; j < l; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return arg_in_0_2pi(raw_nodes[i]) < arg_in_0_2pi(raw_nodes[j]);
  });
  WeightConfig<R> cfg;
  for (int j : order) {
    cfg.nodes.push_back(raw_nodes[j]);
    cfg.exponents.push_back(raw_exponents[j]);
    cfg.cut_angles.push_back(arg_in_0_2pi(raw_nodes[j]));
  }
  for (int j = 0; j < l; ++j) {
    R gap = angle_gap(cfg.cut_angles[j], cfg.cut_angles[(j + 1) % l]);
    if (l > 1 && gap < WeightTol<R>::eps_arg)
      throw ArgumentCollision("nodes " + std::to_string(j) + " and " +
                              std::to_string((j + 1) % l) + " share a cut direction");
  }
  return cfg;
}

// Distance from z to the ray {a*t : t >= 1}.
template <class R>
R dist_to_cut(Cx<R> z, Cx<R> a) {
  Cx<R> dir = a / std::abs(a);
  Cx<R> w = (z - a) * std::conj(dir);  // coordinates along/across the ray
  if (w.real() <= R(0)) return std::abs(z - a);
  return std::abs(w.imag());
}

// W(z) with the branch of each factor taken as |z-a_j|^{c_j} e^{i c_j phi_j},
// phi_j in (beta_j, beta_j + 2*pi).  Continuous on C minus the cuts.
template <class R>
Cx<R> eval_W(const WeightConfig<R>& cfg, Cx<R> z) {
  const R two_pi = R(2) * pi_v<R>;
  R log_mod = 0, phase = 0;
  const R scale = std::max(std::abs(z), cfg.max_node_abs());
  for (int j = 0; j < cfg.l(); ++j) {
    Cx<R> d = z - cfg.nodes[j];
    R r = std::abs(d);
    if (r < WeightTol<R>::eps_cut * scale) return Cx<R>(0);  // continuous extension, c_j > 0
    if (dist_to_cut(z, cfg.nodes[j]) < WeightTol<R>::eps_cut * scale)
      throw OnBranchCut("z lies on branch cut " + std::to_string(j));
    R phi = std::arg(d) - cfg.cut_angles[j];
    phi -= two_pi * std::floor(phi / two_pi);  // into [0, 2*pi)
    if (phi == R(0)) phi = two_pi;             // window is (beta, beta + 2*pi]
    log_mod += cfg.exponents[j] * std::log(r);
    phase += cfg.exponents[j] * (cfg.cut_angles[j] + phi);
  }
  return std::exp(Cx<R>(log_mod, phase));
}

template <class R>
Cx<R> eval_Wbar(const WeightConfig<R>& cfg, Cx<R> s) {
  return std::conj(eval_W(cfg, std::conj(s)));
}

// |W_+ - e^{-2 pi i c_j} W_-| at a_j*t, sides offset transversally by eps.
template <class R>
R jump_factor_check(const WeightConfig<R>& cfg, int j, R t, R eps) {
  if (!(t > R(1))) throw InvalidIndex("jump check needs t > 1 (point inside the cut)");
  Cx<R> unit = cfg.nodes[j] / std::abs(cfg.nodes[j]);
  Cx<R> p = cfg.nodes[j] * t;
  Cx<R> off = Cx<R>(0, 1) * unit * eps;  // + side = left of the outward-directed cut
  Cx<R> wp = eval_W(cfg, p + off);
  Cx<R> wm = eval_W(cfg, p - off);
  Cx<R> phase = std::exp(Cx<R>(0, -R(2) * pi_v<R> * cfg.exponents[j]));
  return std::abs(wp - phase * wm);
}

}  // namespace pop
