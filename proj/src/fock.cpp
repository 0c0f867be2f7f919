#include "fermelim/fock.hpp"

#include <cstdlib>
#include <stdexcept>

namespace fermelim {

namespace mats {
DMat sigma_minus() {
  DMat m = DMat::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}
DMat sigma_plus() { return sigma_minus().adjoint(); }
DMat occupation() {
  DMat m = DMat::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}
DMat parity2() {
  DMat m = DMat::Identity(2, 2);
  m(1, 1) = -1.0;
  return m;
}
DMat majorana_first() {
  DMat m = DMat::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}
DMat majorana_second() {
  DMat m = DMat::Zero(2, 2);
  m(0, 1) = cplx(0.0, 1.0);
  m(1, 0) = cplx(0.0, -1.0);
  return m;
}
DMat pauli_x() { return majorana_first(); }
DMat pauli_y() {
  DMat m = DMat::Zero(2, 2);
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}
DMat pauli_z() { return parity2(); }
}

SpaceLayout build_layout(const Lattice& lat, const LinkAlgebra& alg, bool with_aux, bool with_z2) {
  SpaceLayout lay;
  for (int v = 0; v < lat.n_vertices; ++v) lay.add_factor(matter_factor(psi_label(v)));
  if (with_aux) {
    for (int v = 0; v < lat.n_vertices; ++v) lay.add_factor(chi_factor(chi_label(v)));
    for (const Link& l : lat.links) lay.add_factor(auxf_factor(f_label(l)));
  }
  for (const Link& l : lat.links) lay.add_factor(link_factor(gauge_label(l), alg.local_dim));
  if (with_z2)
    for (const Link& l : lat.links) lay.add_factor(z2aux_factor(qubit_label(l)));
  return lay;
}

OpSum annihilator_opsum(const SpaceLayout& lay, const std::string& label) {
  const int pos = lay.at(label);
  if (!lay.factor(pos).fermionic)
    throw std::invalid_argument("annihilator_opsum: factor is not fermionic: " + label);
  return {ProductTerm{1.0, {FactorOp{pos, mats::sigma_minus(), true}}}};
}

OpSum majorana_c_opsum(const SpaceLayout& lay, int vertex) {
  const int pos = lay.at(chi_label(vertex));
  return {ProductTerm{1.0, {FactorOp{pos, mats::majorana_first(), true}}}};
}

SpMat fermion_annihilator(const SpaceLayout& lay, const std::string& label) {
  return materialize(lay, annihilator_opsum(lay, label));
}

SpMat majorana_c(const SpaceLayout& lay, int vertex) {
  return materialize(lay, majorana_c_opsum(lay, vertex));
}

SpMat embed(const SpaceLayout& lay, const std::string& label, const DMat& local_op) {
  const int pos = lay.at(label);
  if (local_op.rows() != lay.factor(pos).dim || local_op.cols() != lay.factor(pos).dim)
    throw std::invalid_argument("embed: dimension mismatch at " + label);
  return materialize(lay, {ProductTerm{1.0, {FactorOp{pos, local_op, false}}}});
}

SectorBasis joint_sector(const std::vector<Constraint>& constraints, index_t parent_dim,
                         double tol) {
  SectorBasis sec;
  sec.parent_dim = parent_dim;
  for (const auto& c : constraints) sec.defining_constraints.emplace_back(c.label, c.eigenvalue);

  bool all_diag = true;
  for (const auto& c : constraints)
    if (!is_diagonal_matrix(c.op)) all_diag = false;

  if (all_diag) {
    std::vector<Eigen::VectorXcd> diags;
    diags.reserve(constraints.size());
    for (const auto& c : constraints) diags.push_back(Eigen::VectorXcd(c.op.diagonal()));
    std::vector<Triplet> ts;
    for (index_t i = 0; i < parent_dim; ++i) {
      bool keep = true;
      for (std::size_t k = 0; k < constraints.size(); ++k)
        if (std::abs(diags[k](i) - constraints[k].eigenvalue) > tol) {
          keep = false;
          break;
        }
      if (keep) {
        sec.basis_states.push_back(i);
        ts.emplace_back(i, static_cast<index_t>(sec.basis_states.size()) - 1, 1.0);
      }
    }
    sec.columns = from_triplets(parent_dim, static_cast<index_t>(sec.basis_states.size()), ts);
    return sec;
  }

  if (parent_dim > 4096)
    throw std::invalid_argument("joint_sector: dense path limited to dim <= 4096");
  for (std::size_t a = 0; a < constraints.size(); ++a)
    for (std::size_t b = a + 1; b < constraints.size(); ++b)
      if (commutator_norm(constraints[a].op, constraints[b].op) > 1e-10)
        throw std::invalid_argument("joint_sector: constraints do not commute: " +
                                    constraints[a].label + " vs " + constraints[b].label);
  DMat c_total = DMat::Zero(parent_dim, parent_dim);
  for (const auto& c : constraints) {
    DMat shifted = dense(c.op) - c.eigenvalue * DMat::Identity(parent_dim, parent_dim);
    c_total += shifted.adjoint() * shifted;
  }
  Eigen::SelfAdjointEigenSolver<DMat> es(c_total);
  std::vector<index_t> kept;
  for (index_t i = 0; i < parent_dim; ++i)
    if (es.eigenvalues()(i) <= tol) kept.push_back(i);
  std::vector<Triplet> ts;
  for (std::size_t k = 0; k < kept.size(); ++k)
    for (index_t r = 0; r < parent_dim; ++r) {
      const cplx v = es.eigenvectors()(r, kept[k]);
      if (std::abs(v) > 1e-14) ts.emplace_back(r, static_cast<index_t>(k), v);
    }
  sec.columns = from_triplets(parent_dim, static_cast<index_t>(kept.size()), ts);
  return sec;
}

DMat project_onto(const SectorBasis& sector, const SpMat& op) {
  if (op.rows() != sector.parent_dim)
    throw std::invalid_argument("project_onto: dimension mismatch");
  return dense(SpMat(dagger(sector.columns) * SpMat(op * sector.columns)));
}

index_t dim_cap() {
  if (const char* env = std::getenv("FERMELIM_DIM_CAP")) {
    const long long v = std::atoll(env);
    if (v > 0) return static_cast<index_t>(v);
  }
  return index_t(1) << 20;
}

void require_within_cap(index_t dim, const std::string& what) {
  if (dim > dim_cap())
    throw std::invalid_argument("dimension cap exceeded for " + what + ": " + std::to_string(dim) +
                                " > " + std::to_string(dim_cap()));
}

}
