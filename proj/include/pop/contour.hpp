#pragma once

// The closed curve Gamma through the nodes a_1..a_l enclosing the origin,
// plus contour quadrature (including pole-aware Cauchy transforms) and the
// 2D area-integral oracle for the planar moments.

#include <cmath>

#include "pop/quadrature.hpp"
#include "pop/weight.hpp"

namespace pop {

template <class R>
struct ContourPiece {
  bool is_arc = false;
  Cx<R> z0, z1;    // segment endpoints
  Cx<R> center;    // arc data
  R radius = 0, th0 = 0, th1 = 0;  // th1 > th0 for ccw

  void map(R t, Cx<R>& z, Cx<R>& dz) const {
    if (is_arc) {
      R th = th0 + (th1 - th0) * t;
      Cx<R> e = std::polar(radius, th);
      z = center + e;
      dz = Cx<R>(0, 1) * e * (th1 - th0);
    } else {
      z = z0 + (z1 - z0) * t;
      dz = z1 - z0;
    }
  }
  R length() const { return is_arc ? radius * (th1 - th0) : std::abs(z1 - z0); }
};

template <class R>
struct ContourGamma {
  std::vector<ContourPiece<R>> pieces;  // counterclockwise, closed
  R grade = R(1);                       // endpoint grading for vertex Hoelder factors

  R diameter() const {
    R d = 0;
    for (auto& p : pieces) d = std::max(d, p.length());
    return d;
  }
  Cx<R> sample(R t_global) const {  // t_global in [0, pieces.size())
    int i = std::min(int(t_global), int(pieces.size()) - 1);
    Cx<R> z, dz;
    pieces[i].map(t_global - R(i), z, dz);
    return z;
  }
};

namespace detail {

template <class R>
R winding_number(const ContourGamma<R>& g, int samples_per_piece = 512) {
  R total = 0;
  Cx<R> prev, dz;
  g.pieces.front().map(R(0), prev, dz);
  for (auto& p : g.pieces)
    for (int i = 1; i <= samples_per_piece; ++i) {
      Cx<R> z;
      p.map(R(i) / R(samples_per_piece), z, dz);
      total += std::arg(z / prev);
      prev = z;
    }
  return total / (R(2) * pi_v<R>);
}

template <class R>
void check_gamma(const WeightConfig<R>& cfg, const ContourGamma<R>& g) {
  R w = winding_number(g);
  if (std::abs(w - R(1)) > R(1e-6))
    throw OriginNotEnclosed("contour winding about the origin is " + std::to_string(double(w)));
  // no interior point of Gamma may lie on B beyond the nodes
  const R scale = cfg.max_node_abs();
  for (auto& p : g.pieces)
    for (int i = 1; i < 64; ++i) {
      Cx<R> z, dz;
      p.map(R(i) / R(64), z, dz);
      for (int j = 0; j < cfg.l(); ++j) {
        if (std::abs(z - cfg.nodes[j]) < R(1e-9) * scale) continue;
        if (dist_to_cut(z, cfg.nodes[j]) < R(1e-9) * scale)
          throw OriginNotEnclosed("contour intersects branch cut " + std::to_string(j));
      }
    }
}

template <class R>
R contour_grade(const WeightConfig<R>& cfg) {
  R cmin = cfg.exponents[0];
  for (R c : cfg.exponents) cmin = std::min(cmin, c);
  R g = std::ceil(R(6) / (cmin + R(1)));
  return std::clamp(g, R(1), R(8));
}

}  // namespace detail

// Definition-1 contour: the vertex polygon for l >= 3; a circle through a_1
// centered at the origin for l = 1; for l = 2 a circle through both nodes,
// center chosen on the bisector to maximize the origin clearance.
template <class R>
ContourGamma<R> gamma_polygon(const WeightConfig<R>& cfg) {
  ContourGamma<R> g;
  g.grade = detail::contour_grade(cfg);
  const int l = cfg.l();
  if (l == 1) {
    const R b = cfg.cut_angles[0];
    ContourPiece<R> p1, p2;
    p1.is_arc = p2.is_arc = true;
    p1.center = p2.center = Cx<R>(0);
    p1.radius = p2.radius = std::abs(cfg.nodes[0]);
    p1.th0 = b;
    p1.th1 = b + pi_v<R>;
    p2.th0 = b + pi_v<R>;
    p2.th1 = b + R(2) * pi_v<R>;
    g.pieces = {p1, p2};
  } else if (l == 2) {
    const Cx<R> a1 = cfg.nodes[0], a2 = cfg.nodes[1];
    const Cx<R> mid = (a1 + a2) / R(2);
    Cx<R> u = (a2 - a1) * Cx<R>(0, 1);
    u /= std::abs(u);  // unit normal to the chord
    R best_t = 0, best_clear = -1;
    const R chord = std::abs(a2 - a1);
    for (R t : {R(0), R(0.25), R(-0.25), R(0.5), R(-0.5), R(1), R(-1), R(2), R(-2), R(4), R(-4)}) {
      Cx<R> c = mid + u * (t * chord);
      R rad = std::abs(a1 - c);
      R clear = (rad - std::abs(c)) / rad;  // > 0 iff origin strictly inside
      if (clear > best_clear) {
        best_clear = clear;
        best_t = t;
      }
    }
    if (best_clear < R(1e-3))
      throw OriginNotEnclosed("no circle through the two nodes encloses the origin cleanly");
    Cx<R> c = mid + u * (best_t * chord);
    R rad = std::abs(a1 - c);
    R t1 = std::arg(a1 - c), t2 = std::arg(a2 - c);
    // split the circle at the two nodes, keeping ccw orientation
    while (t2 <= t1) t2 += R(2) * pi_v<R>;
    ContourPiece<R> p1, p2;
    p1.is_arc = p2.is_arc = true;
    p1.center = p2.center = c;
    p1.radius = p2.radius = rad;
    p1.th0 = t1;
    p1.th1 = t2;
    p2.th0 = t2;
    p2.th1 = t1 + R(2) * pi_v<R>;
    g.pieces = {p1, p2};
  } else {
    for (int j = 0; j < l; ++j) {
      ContourPiece<R> p;
      p.z0 = cfg.nodes[j];
      p.z1 = cfg.nodes[(j + 1) % l];
      g.pieces.push_back(p);
    }
  }
  detail::check_gamma(cfg, g);
  return g;
}

// ---------------------------------------------------------------- contour quadrature

template <class R, class F>
VecC<R> integrate_contour(F&& fz, const ContourGamma<R>& g, int dim,
                          const QuadratureSpec<R>& spec, quad::AdaptResult* res = nullptr) {
  VecC<R> total = VecC<R>::Zero(dim);
  quad::AdaptResult worst;
  for (auto& piece : g.pieces) {
    quad::Integrand<R> f = [&](R u, VecC<R>& out) {
      R t, dt;
      quad::graded_map(u, g.grade, t, dt);
      Cx<R> z, dz;
      piece.map(t, z, dz);
      fz(z, out);
      out *= dz * dt;
    };
    quad::AdaptResult r;
    total += quad::adapt(f, std::vector<R>{R(0), R(1)}, dim, spec, &r);
    worst.converged = worst.converged && r.converged;
    worst.err = std::max(worst.err, r.err);
  }
  if (res) *res = worst;
  return total;
}

// Same, with panels pre-split so no panel is longer than a fifth of its
// distance to the pole (Cauchy transforms evaluated near Gamma).
template <class R, class F>
VecC<R> integrate_contour_cauchy(F&& fz, const ContourGamma<R>& g, Cx<R> pole, int dim,
                                 const QuadratureSpec<R>& spec,
                                 quad::AdaptResult* res = nullptr) {
  VecC<R> total = VecC<R>::Zero(dim);
  quad::AdaptResult worst;
  for (auto& piece : g.pieces) {
    // locate the parameter nearest the pole (coarse scan + refinement)
    R tbest = 0, dbest = std::numeric_limits<R>::max();
    for (int i = 0; i <= 256; ++i) {
      R t = R(i) / R(256);
      Cx<R> z, dz;
      piece.map(t, z, dz);
      R d = std::abs(z - pole);
      if (d < dbest) {
        dbest = d;
        tbest = t;
      }
    }
    const R speed = piece.length();
    if (dbest < R(1e-13) * speed)
      throw TooCloseToContour("Cauchy pole sits on the contour");
    std::vector<R> breaks{tbest};
    for (R w = dbest / (R(5) * speed); breaks.back() < R(1); w *= R(2))
      breaks.push_back(std::min(R(1), breaks.back() + w));
    for (R w = dbest / (R(5) * speed); breaks.front() > R(0); w *= R(2))
      breaks.insert(breaks.begin(), std::max(R(0), breaks.front() - w));
    quad::Integrand<R> f = [&](R t, VecC<R>& out) {
      Cx<R> z, dz;
      piece.map(t, z, dz);
      fz(z, out);
      out *= dz;
    };
    quad::AdaptResult r;
    total += quad::adapt(f, breaks, dim, spec, &r);
    worst.converged = worst.converged && r.converged;
    worst.err = std::max(worst.err, r.err);
  }
  if (res) *res = worst;
  return total;
}

// ---------------------------------------------------------------- area oracle

// Integral over the plane of g(z) e^{-|z|^2} prod_j |z - a_j|^{2 c_j} dA,
// by polar quadrature.  Radial panels split at each |a_j| and angular panels
// at each cut direction, where the integrand loses smoothness.
template <class R, class F>
VecC<R> area_integral(const WeightConfig<R>& cfg, F&& g, R growth_power, int dim,
                      const QuadratureSpec<R>& spec, quad::AdaptResult* res = nullptr) {
  const R p = growth_power + R(2) * cfg.sum_c() + R(1);
  R rmax = 3;
  for (int it = 0; it < 6; ++it)
    rmax = std::sqrt(-std::log(spec.abs_floor) + spec.tail_pad + p * std::log(rmax));
  std::vector<R> rbreaks{R(0)};
  for (auto& a : cfg.nodes) rbreaks.push_back(std::abs(a));
  rbreaks.push_back(rmax);
  std::sort(rbreaks.begin(), rbreaks.end());

  std::vector<R> thbreaks = cfg.cut_angles;
  std::sort(thbreaks.begin(), thbreaks.end());
  thbreaks.push_back(thbreaks.front() + R(2) * pi_v<R>);

  const QuadratureSpec<R> inner = spec.with_tol(spec.rel_tol / R(4));
  quad::Integrand<R> radial = [&](R r, VecC<R>& out) {
    quad::Integrand<R> angular = [&](R th, VecC<R>& o) {
      Cx<R> z = std::polar(r, th);
      R w2 = 0;
      for (int j = 0; j < cfg.l(); ++j)
        w2 += R(2) * cfg.exponents[j] * std::log(std::abs(z - cfg.nodes[j]));
      g(z, o);
      o *= std::exp(w2 - r * r);
    };
    out = quad::adapt(angular, thbreaks, dim, inner);
    out *= r;
  };
  return quad::adapt(radial, rbreaks, dim, spec, res);
}

// The planar moment  int z^j zbar^k e^{-|z|^2} |W|^2 dA.
template <class R>
Cx<R> area_moment_oracle(const WeightConfig<R>& cfg, int j, int k,
                         const QuadratureSpec<R>& spec) {
  if (j < 0 || k < 0) throw InvalidIndex("area moment needs j, k >= 0");
  quad::AdaptResult res;
  auto g = [&](Cx<R> z, VecC<R>& o) { o[0] = std::pow(z, j) * std::pow(std::conj(z), k); };
  VecC<R> v = area_integral(cfg, g, R(j + k), 1, spec, &res);
  check_convergence<R>(res, "area_moment_oracle");
  return v[0];
}

}  // namespace pop
