#pragma once

// Adaptive composite Gauss quadrature over parametrized paths.
//
// Panels are scored with a nested Gauss(8)/Gauss(16) pair and bisected until
// every component of the (vector-valued) integral meets its tolerance.  Gauss
// nodes are strictly interior, so endpoint singularities of the integrand
// (vanishing weight factors at the nodes a_j) are never sampled; graded
// endpoint maps are available where the integrand is merely Hoelder there.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "pop/types.hpp"

namespace pop {

template <class R>
struct QuadratureSpec {
  R rel_tol = R(1e-12);
  R abs_floor = R(1e-30);
  int max_depth = 20;
  R tail_pad = R(40);  // extra e-foldings kept beyond the abs_floor crossing on rays

  QuadratureSpec<R> with_tol(R t) const {
    QuadratureSpec<R> s = *this;
    s.rel_tol = t;
    return s;
  }
};

namespace quad {

template <class R>
struct GaussRule {
  std::vector<R> x, w;  // nodes/weights on (-1, 1)
};

template <class R>
GaussRule<R> make_gauss(int n) {
  GaussRule<R> rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    R x = std::cos(pi_v<R> * (R(i) + R(0.75)) / (R(n) + R(0.5)));
    R dp = 0;
    for (int it = 0; it < 100; ++it) {
      R p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        R p2 = ((R(2 * k - 1)) * x * p1 - R(k - 1) * p0) / R(k);
        p0 = p1;
        p1 = p2;
      }
      dp = R(n) * (x * p1 - p0) / (x * x - R(1));
      R dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < std::numeric_limits<R>::epsilon() * R(4)) break;
    }
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    rule.w[i] = rule.w[n - 1 - i] = R(2) / ((R(1) - x * x) * dp * dp);
  }
  return rule;
}

template <class R>
const GaussRule<R>& rule8() {
  static const GaussRule<R> r = make_gauss<R>(8);
  return r;
}
template <class R>
const GaussRule<R>& rule16() {
  static const GaussRule<R> r = make_gauss<R>(16);
  return r;
}

// f(t, out): integrand in parameter space, out sized dim.
template <class R>
using Integrand = std::function<void(R, VecC<R>&)>;

template <class R>
struct Panel {
  R a, b;
  int depth;
  VecC<R> val;       // Gauss-16 estimate
  VecR<R> err, mag;  // |G16 - G8| and sum |w f| per component
};

template <class R>
void eval_panel(const Integrand<R>& f, int dim, Panel<R>& p) {
  const auto& g8 = rule8<R>();
  const auto& g16 = rule16<R>();
  const R h = (p.b - p.a) / R(2);
  const R c = (p.b + p.a) / R(2);
  VecC<R> fx(dim), s8 = VecC<R>::Zero(dim), s16 = VecC<R>::Zero(dim);
  VecR<R> mag = VecR<R>::Zero(dim);
  for (int i = 0; i < 8; ++i) {
    f(c + h * g8.x[i], fx);
    s8 += g8.w[i] * fx;
  }
  for (int i = 0; i < 16; ++i) {
    f(c + h * g16.x[i], fx);
    s16 += g16.w[i] * fx;
    mag += g16.w[i] * fx.cwiseAbs();
  }
  p.val = h * s16;
  p.err = (h * (s16 - s8)).cwiseAbs();
  p.mag = h * mag;
}

struct AdaptResult {
  double err = 0;        // worst component error relative to its tolerance scale
  bool converged = true;
};

// Integrate f over [breaks.front(), breaks.back()] with initial panels at the
// given break points.  Error acceptance is per component, relative to the
// running estimate of that component with a machine-noise floor tied to the
// sampled integrand magnitude (cancellation-heavy integrals stall there).
template <class R>
VecC<R> adapt(const Integrand<R>& f, const std::vector<R>& breaks, int dim,
              const QuadratureSpec<R>& spec, AdaptResult* out = nullptr) {
  const R eps = std::numeric_limits<R>::epsilon();
  const R span = breaks.back() - breaks.front();
  std::vector<Panel<R>> done, work;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    Panel<R> p{breaks[i], breaks[i + 1], 0, {}, {}, {}};
    eval_panel(f, dim, p);
    work.push_back(std::move(p));
  }
  VecC<R> total = VecC<R>::Zero(dim);
  VecR<R> mag = VecR<R>::Zero(dim);
  for (auto& p : work) {
    total += p.val;
    mag += p.mag;
  }
  auto tol_of = [&](int e) {
    return std::max({spec.rel_tol * std::abs(total[e]), R(64) * eps * mag[e], spec.abs_floor});
  };
  bool all_converged = true;
  while (!work.empty()) {
    Panel<R> p = std::move(work.back());
    work.pop_back();
    const R frac = (p.b - p.a) / span;
    bool ok = true;
    for (int e = 0; e < dim && ok; ++e)
      if (p.err[e] > frac * tol_of(e)) ok = false;
    if (ok || p.depth >= spec.max_depth) {
      if (!ok) all_converged = false;
      done.push_back(std::move(p));
      continue;
    }
    const R m = (p.a + p.b) / R(2);
    Panel<R> left{p.a, m, p.depth + 1, {}, {}, {}};
    Panel<R> right{m, p.b, p.depth + 1, {}, {}, {}};
    eval_panel(f, dim, left);
    eval_panel(f, dim, right);
    total += left.val + right.val - p.val;
    mag += left.mag + right.mag - p.mag;
    work.push_back(std::move(left));
    work.push_back(std::move(right));
  }
  VecC<R> result = VecC<R>::Zero(dim);
  VecR<R> err = VecR<R>::Zero(dim);
  for (auto& p : done) {
    result += p.val;
    err += p.err;
  }
  if (out) {
    out->converged = all_converged;
    double worst = 0;
    for (int e = 0; e < dim; ++e) {
      R t = std::max({spec.rel_tol * std::abs(result[e]), R(64) * eps * mag[e], spec.abs_floor});
      worst = std::max(worst, double(err[e] / t));
    }
    out->err = worst;
  }
  return result;
}

// Both-ends graded map [0,1]->[0,1]; g = 1 is the identity.
template <class R>
void graded_map(R u, R g, R& t, R& dt) {
  if (g <= R(1)) {
    t = u;
    dt = R(1);
    return;
  }
  const R ug = std::pow(u, g), vg = std::pow(R(1) - u, g);
  const R den = ug + vg;
  t = ug / den;
  dt = g * std::pow(u * (R(1) - u), g - R(1)) / (den * den);
}

}  // namespace quad

// ---------------------------------------------------------------- paths

// Straight segment z0 -> z1; optional both-ends grading exponent.
template <class R, class F>
VecC<R> integrate_segment(F&& fz, Cx<R> z0, Cx<R> z1, int dim, const QuadratureSpec<R>& spec,
                          R grade = R(1), quad::AdaptResult* res = nullptr) {
  const Cx<R> d = z1 - z0;
  quad::Integrand<R> f = [&](R u, VecC<R>& out) {
    R t, dt;
    quad::graded_map(u, grade, t, dt);
    fz(z0 + d * t, out);
    out *= d * dt;
  };
  return quad::adapt(f, std::vector<R>{R(0), R(1)}, dim, spec, res);
}

// Truncation length for integrands bounded by t^p e^{-lambda t} on a ray.
template <class R>
R ray_truncation(R lambda, R p, const QuadratureSpec<R>& spec) {
  R target = -std::log(spec.abs_floor) + spec.tail_pad;
  R T = target / lambda;
  for (int it = 0; it < 4; ++it) T = (target + p * std::log1p(T)) / lambda;
  return T;
}

// Ray base + dir*t, t in [0, T], integrand decaying like e^{-lambda t}.
// Initial panels are geometric so the adaptive pass starts near the mass.
template <class R, class F>
VecC<R> integrate_ray(F&& fz, Cx<R> base, Cx<R> dir, R lambda, R growth_power, int dim,
                      const QuadratureSpec<R>& spec, quad::AdaptResult* res = nullptr) {
  const R T = ray_truncation(lambda, growth_power, spec);
  std::vector<R> breaks{R(0)};
  for (R b = std::min(R(1) / lambda, T / R(8)); b < T; b *= R(2)) breaks.push_back(b);
  breaks.push_back(T);
  quad::Integrand<R> f = [&](R t, VecC<R>& out) {
    fz(base + dir * t, out);
    out *= dir;
  };
  return quad::adapt(f, breaks, dim, spec, res);
}

template <class R>
void check_convergence(const quad::AdaptResult& res, const char* what) {
  if (!res.converged && res.err > 10.0)
    throw NoConvergence(std::string(what) + ": quadrature stalled above tolerance", res.err);
}

}  // namespace pop
