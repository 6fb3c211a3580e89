#pragma once

// Multi-index enumeration and the two basis families: sinusoidal products
// for emulation on [0,1]^d and plain monomials for dynamics libraries.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hiergp/errors.hpp"

namespace hiergp {

using MultiIndex = std::vector<int>;

// Per-dimension inclusive index range [start, limits[m]]. start is 1 for the
// sinusoidal family (sin with k=0 vanishes identically) and 0 for monomials
// so that the constant / pure lower-power terms are part of the library.
struct TruncationVector {
  std::vector<int> limits;
  int start = 1;

  int dims() const { return static_cast<int>(limits.size()); }

  int count(int m) const { return limits[static_cast<std::size_t>(m)] - start + 1; }

  // total number of basis functions
  std::size_t size() const {
    std::size_t n = 1;
    for (int m = 0; m < dims(); ++m) n *= static_cast<std::size_t>(count(m));
    return n;
  }

  void validate() const {
    if (limits.empty()) throw invalid_parameter("TruncationVector: empty limits");
    if (start != 0 && start != 1) throw invalid_parameter("TruncationVector: start must be 0 or 1");
    for (int l : limits)
      if (l < start) throw invalid_parameter("TruncationVector: limit below start");
  }

  bool operator==(const TruncationVector&) const = default;
};

enum class BasisKind { sinusoidal, monomial };
enum class BasisNormalization { plain, orthonormal };

struct BasisFamily {
  BasisKind kind = BasisKind::sinusoidal;
  BasisNormalization normalization = BasisNormalization::plain;

  bool operator==(const BasisFamily&) const = default;
};

inline BasisFamily sinusoidal_basis(BasisNormalization norm = BasisNormalization::plain) {
  return {BasisKind::sinusoidal, norm};
}
inline BasisFamily monomial_basis() { return {BasisKind::monomial, BasisNormalization::plain}; }

// Lexicographic enumeration from (start,...,start) to limits, last dimension
// fastest. This ordering is the layout contract for design-matrix columns
// and coefficient vectors everywhere else.
inline std::vector<MultiIndex> enumerate_indices(const TruncationVector& trunc) {
  trunc.validate();
  const int d = trunc.dims();
  std::vector<MultiIndex> out;
  out.reserve(trunc.size());
  MultiIndex k(static_cast<std::size_t>(d), trunc.start);
  for (;;) {
    out.push_back(k);
    int m = d - 1;
    while (m >= 0) {
      if (k[static_cast<std::size_t>(m)] < trunc.limits[static_cast<std::size_t>(m)]) {
        ++k[static_cast<std::size_t>(m)];
        break;
      }
      k[static_cast<std::size_t>(m)] = trunc.start;
      --m;
    }
    if (m < 0) break;
  }
  return out;
}

inline double eval_basis(const BasisFamily& family, const MultiIndex& k,
                         std::span<const double> x) {
  if (k.size() != x.size()) throw dimension_mismatch("eval_basis: index/point dims differ");
  double v = 1.0;
  if (family.kind == BasisKind::sinusoidal) {
    // k_m = 0 contributes a unit factor, so start=0 truncations span the
    // tensor {1, sin} family (constant and main effects included)
    int positive = 0;
    for (std::size_t m = 0; m < k.size(); ++m) {
      if (k[m] > 0) {
        v *= std::sin(2.0 * std::numbers::pi * k[m] * x[m]);
        ++positive;
      }
    }
    if (family.normalization == BasisNormalization::orthonormal)
      v *= std::pow(std::numbers::sqrt2, positive);
  } else {
    for (std::size_t m = 0; m < k.size(); ++m) {
      double factor = 1.0;
      for (int p = 0; p < k[m]; ++p) factor *= x[m];  // 0^0 = 1
      v *= factor;
    }
  }
  return v;
}

inline double eval_basis(const BasisFamily& family, const MultiIndex& k,
                         const Eigen::VectorXd& x) {
  return eval_basis(family, k, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

// Row i, column j = phi_{k_j}(x_i) with columns in enumerate_indices order.
inline Eigen::MatrixXd build_design_matrix(const BasisFamily& family,
                                           const TruncationVector& trunc,
                                           const Eigen::MatrixXd& points) {
  if (points.cols() != trunc.dims())
    throw dimension_mismatch("build_design_matrix: point dimension does not match truncation");
  const auto indices = enumerate_indices(trunc);
  Eigen::MatrixXd design(points.rows(), static_cast<Eigen::Index>(indices.size()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd xi = points.row(i).transpose();
    for (std::size_t j = 0; j < indices.size(); ++j)
      design(i, static_cast<Eigen::Index>(j)) = eval_basis(family, indices[j], xi);
  }
  return design;
}

inline std::string index_label(const MultiIndex& k) {
  std::string s = "(";
  for (std::size_t m = 0; m < k.size(); ++m) {
    if (m) s += ",";
    s += std::to_string(k[m]);
  }
  s += ")";
  return s;
}

}  // namespace hiergp
