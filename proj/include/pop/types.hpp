#pragma once

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pop {

template <class R> using Cx = std::complex<R>;
template <class R> using VecC = Eigen::Matrix<std::complex<R>, Eigen::Dynamic, 1>;
template <class R> using MatC = Eigen::Matrix<std::complex<R>, Eigen::Dynamic, Eigen::Dynamic>;
template <class R> using VecR = Eigen::Matrix<R, Eigen::Dynamic, 1>;

template <class R> constexpr R pi_v = R(3.14159265358979323846264338327950288L);

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroNode : Error { using Error::Error; };
struct NonPositiveExponent : Error { using Error::Error; };
struct ArgumentCollision : Error { using Error::Error; };
struct EmptyConfig : Error { using Error::Error; };
struct OnBranchCut : Error { using Error::Error; };
struct OriginNotEnclosed : Error { using Error::Error; };
struct UndefinedDirection : Error { using Error::Error; };
struct InvalidIndex : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct SingularD : SingularSystem { using SingularSystem::SingularSystem; };
struct RankDeficientSampling : Error { using Error::Error; };
struct InternalMismatch : Error { using Error::Error; };
struct DegenerateNormalization : Error { using Error::Error; };
struct TooCloseToContour : Error { using Error::Error; };
struct DigestMismatch : Error { using Error::Error; };
struct CorruptFile : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };

// Adaptive integration failed to reach tolerance; carries the best estimate.
struct NoConvergence : Error {
  NoConvergence(const std::string& what, double best_err) : Error(what), err(best_err) {}
  double err;
};

// ---------------------------------------------------------------- multi-index

// Vector of non-negative integers k = (k_1,...,k_l), |k| = sum k_j.
struct MultiIndex {
  std::vector<int> k;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : k(std::move(entries)) {
    for (int e : k)
      if (e < 0) throw InvalidIndex("multi-index entry < 0");
  }
  static MultiIndex zeros(int l) { return MultiIndex(std::vector<int>(l, 0)); }

  int size() const { return int(k.size()); }
  int total() const { return std::accumulate(k.begin(), k.end(), 0); }
  int operator[](int j) const { return k[j]; }

  MultiIndex plus(int j) const {
    auto v = k;
    v[j] += 1;
    return MultiIndex(std::move(v));
  }
  MultiIndex minus(int j) const {
    auto v = k;
    if (--v[j] < 0) throw InvalidIndex("multi-index entry would become negative");
    return MultiIndex(std::move(v));
  }
  bool operator==(const MultiIndex& o) const { return k == o.k; }
  bool operator<(const MultiIndex& o) const { return k < o.k; }
};

// All multi-indices of length l with |k| == total.
inline void enumerate_fixed_total(int l, int total, std::vector<MultiIndex>& out,
                                  std::vector<int>& scratch) {
  if (l == 1) {
    scratch.push_back(total);
    out.emplace_back(scratch);
    scratch.pop_back();
    return;
  }
  for (int e = 0; e <= total; ++e) {
    scratch.push_back(e);
    enumerate_fixed_total(l - 1, total - e, out, scratch);
    scratch.pop_back();
  }
}

inline std::vector<MultiIndex> indices_with_total(int l, int total) {
  std::vector<MultiIndex> out;
  std::vector<int> scratch;
  enumerate_fixed_total(l, total, out, scratch);
  return out;
}

inline std::vector<MultiIndex> indices_below_total(int l, int n) {
  std::vector<MultiIndex> out;
  for (int t = 0; t < n; ++t) {
    auto part = indices_with_total(l, t);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace pop
