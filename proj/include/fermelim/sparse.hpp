#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <limits>
#include <vector>

#include "fermelim/layout.hpp"

namespace fermelim {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, index_t>;
using Triplet = Eigen::Triplet<cplx, index_t>;
using DMat = Eigen::MatrixXcd;

inline SpMat from_triplets(index_t rows, index_t cols, std::vector<Triplet>& ts) {
  SpMat m(rows, cols);
  m.setFromTriplets(ts.begin(), ts.end());
  m.prune([](index_t, index_t, const cplx& v) { return std::abs(v) > 0.0; });
  m.makeCompressed();
  return m;
}

inline SpMat sp_identity(index_t n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

inline SpMat dagger(const SpMat& a) { return SpMat(a.adjoint()); }

inline double max_abs(const SpMat& a) {
  double m = 0.0;
  for (index_t c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

inline double max_abs_diff(const SpMat& a, const SpMat& b) {
  return max_abs(SpMat(a - b));
}

inline double commutator_norm(const SpMat& a, const SpMat& b) {
  return max_abs(SpMat(SpMat(a * b) - SpMat(b * a)));
}

inline double hermiticity_defect(const SpMat& a) {
  return max_abs_diff(a, dagger(a));
}

inline DMat dense(const SpMat& a) { return DMat(a); }

inline std::vector<double> sorted_eigenvalues(const DMat& h) {
  Eigen::SelfAdjointEigenSolver<DMat> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline bool is_diagonal_matrix(const SpMat& a) {
  for (index_t c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it)
      if (it.row() != it.col()) return false;
  return true;
}

inline std::vector<double> sorted_eigenvalues(const SpMat& h) {
  if (is_diagonal_matrix(h)) {
    std::vector<double> ev(h.rows(), 0.0);
    for (index_t c = 0; c < h.outerSize(); ++c)
      for (SpMat::InnerIterator it(h, c); it; ++it) ev[it.row()] = it.value().real();
    std::sort(ev.begin(), ev.end());
    return ev;
  }
  return sorted_eigenvalues(dense(h));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}
