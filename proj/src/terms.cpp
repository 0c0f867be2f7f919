#include "fermelim/terms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fermelim {

OpSum adjoint(const OpSum& sum) {
  OpSum out;
  out.reserve(sum.size());
  for (const auto& t : sum) {
    ProductTerm a;
    a.coeff = std::conj(t.coeff);
    a.ops.reserve(t.ops.size());
    for (auto it = t.ops.rbegin(); it != t.ops.rend(); ++it)
      a.ops.push_back(FactorOp{it->factor, it->m.adjoint(), it->odd});
    out.push_back(std::move(a));
  }
  return out;
}

OpSum scale(const OpSum& sum, cplx z) {
  OpSum out = sum;
  for (auto& t : out) t.coeff *= z;
  return out;
}

OpSum plus_adjoint(const OpSum& sum) {
  OpSum out = sum;
  OpSum adj = adjoint(sum);
  out.insert(out.end(), adj.begin(), adj.end());
  return out;
}

namespace {

struct Branch {
  index_t idx;
  cplx amp;
};

int parity_string(const SpaceLayout& lay, index_t idx, int upto) {
  int s = 0;
  for (int j = 0; j < upto; ++j)
    if (lay.factor(j).fermionic) s ^= (lay.digit(idx, j) & 1);
  return s ? -1 : 1;
}

void apply_term(const SpaceLayout& lay, const ProductTerm& term, index_t idx,
                std::vector<Branch>& out) {
  std::vector<Branch> cur{{idx, term.coeff}};
  std::vector<Branch> next;
  for (auto it = term.ops.rbegin(); it != term.ops.rend(); ++it) {
    const FactorOp& op = *it;
    const int dim = lay.factor(op.factor).dim;
    next.clear();
    for (const Branch& b : cur) {
      cplx amp = b.amp;
      if (op.odd) amp *= static_cast<double>(parity_string(lay, b.idx, op.factor));
      const int col = lay.digit(b.idx, op.factor);
      for (int row = 0; row < dim; ++row) {
        const cplx v = op.m(row, col);
        if (v == cplx(0.0, 0.0)) continue;
        next.push_back(Branch{lay.with_digit(b.idx, op.factor, row), amp * v});
      }
    }
    cur.swap(next);
    if (cur.empty()) return;
  }
  out.insert(out.end(), cur.begin(), cur.end());
}

}  // namespace

std::vector<std::pair<index_t, cplx>> apply_to_basis(const SpaceLayout& lay, const OpSum& sum,
                                                     index_t idx) {
  std::vector<Branch> branches;
  for (const auto& term : sum) apply_term(lay, term, idx, branches);
  std::sort(branches.begin(), branches.end(),
            [](const Branch& a, const Branch& b) { return a.idx < b.idx; });
  std::vector<std::pair<index_t, cplx>> out;
  for (const Branch& b : branches) {
    if (!out.empty() && out.back().first == b.idx)
      out.back().second += b.amp;
    else
      out.emplace_back(b.idx, b.amp);
  }
  std::erase_if(out, [](const auto& p) { return p.second == cplx(0.0, 0.0); });
  return out;
}

std::pair<index_t, cplx> walk_signed(const SpaceLayout& lay, const OpSum& sum, index_t idx) {
  auto img = apply_to_basis(lay, sum, idx);
  if (img.size() != 1) throw std::logic_error("walk_signed: image is not a single basis state");
  if (std::abs(std::abs(img[0].second) - 1.0) > 1e-12)
    throw std::logic_error("walk_signed: amplitude is not a phase");
  return img[0];
}

SpMat materialize(const SpaceLayout& lay, const OpSum& sum) {
  const index_t n = lay.total_dim();
  std::vector<Triplet> ts;
  std::vector<Branch> branches;
  for (index_t c = 0; c < n; ++c) {
    branches.clear();
    for (const auto& term : sum) apply_term(lay, term, c, branches);
    for (const Branch& b : branches) ts.emplace_back(b.idx, c, b.amp);
  }
  return from_triplets(n, n, ts);
}

}
