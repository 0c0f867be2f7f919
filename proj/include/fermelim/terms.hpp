#pragma once

#include <utility>
#include <vector>

#include "fermelim/layout.hpp"
#include "fermelim/sparse.hpp"

namespace fermelim {

// One matrix acting on one tensor factor. If odd is set the operator is
// fermionic-odd and carries the parity string over all fermionic factors with
// smaller position, evaluated on the state it is applied to.
struct FactorOp {
  int factor = 0;
  DMat m;
  bool odd = false;
};

// coeff * ops[0] ops[1] ... ops.back()  (ops[0] leftmost, i.e. applied last)
struct ProductTerm {
  cplx coeff{1.0, 0.0};
  std::vector<FactorOp> ops;
};

using OpSum = std::vector<ProductTerm>;

OpSum adjoint(const OpSum& sum);
OpSum scale(const OpSum& sum, cplx z);
OpSum plus_adjoint(const OpSum& sum);  // sum + sum^dag

// image of the basis state |idx> under the operator; duplicates merged
std::vector<std::pair<index_t, cplx>> apply_to_basis(const SpaceLayout& lay, const OpSum& sum,
                                                     index_t idx);

// for operators that map every basis state to a single signed basis state
std::pair<index_t, cplx> walk_signed(const SpaceLayout& lay, const OpSum& sum, index_t idx);

SpMat materialize(const SpaceLayout& lay, const OpSum& sum);

}
