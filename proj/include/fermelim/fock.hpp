#pragma once

#include <string>
#include <vector>

#include "fermelim/lattice.hpp"
#include "fermelim/linkalg.hpp"
#include "fermelim/terms.hpp"

namespace fermelim {

namespace mats {
DMat sigma_minus();     // |0><1|
DMat sigma_plus();      // |1><0|
DMat occupation();      // diag(0,1)
DMat parity2();         // diag(1,-1) = exp(i pi n)
DMat majorana_first();  // f + f^dag         (alpha / beta)
DMat majorana_second(); // i (f - f^dag)     (gamma / delta)
DMat pauli_x();
DMat pauli_y();
DMat pauli_z();
}

inline std::string psi_label(int vertex) { return "psi" + std::to_string(vertex); }
inline std::string chi_label(int vertex) { return "chi" + std::to_string(vertex); }
inline std::string f_label(const Link& l) { return "f_" + l.label; }
inline std::string gauge_label(const Link& l) { return "g_" + l.label; }
inline std::string qubit_label(const Link& l) { return "q_" + l.label; }

// factor order (least significant first): matter per vertex, then chi per
// vertex, then f per link, then gauge qudits per link, then Z2 qubits per link
SpaceLayout build_layout(const Lattice& lat, const LinkAlgebra& alg, bool with_aux, bool with_z2);

OpSum annihilator_opsum(const SpaceLayout& lay, const std::string& label);
OpSum majorana_c_opsum(const SpaceLayout& lay, int vertex);

SpMat fermion_annihilator(const SpaceLayout& lay, const std::string& label);
SpMat majorana_c(const SpaceLayout& lay, int vertex);
SpMat embed(const SpaceLayout& lay, const std::string& label, const DMat& local_op);

struct Constraint {
  std::string label;
  SpMat op;
  cplx eigenvalue;
};

struct SectorBasis {
  index_t parent_dim = 0;
  SpMat columns;
  std::vector<std::pair<std::string, cplx>> defining_constraints;
  std::vector<index_t> basis_states;  // set when the columns are signed basis vectors
  index_t dim() const { return columns.cols(); }
};

SectorBasis joint_sector(const std::vector<Constraint>& constraints, index_t parent_dim,
                         double tol = 1e-10);
DMat project_onto(const SectorBasis& sector, const SpMat& op);

// materialized-space guard; env FERMELIM_DIM_CAP overrides the default 2^20
index_t dim_cap();
void require_within_cap(index_t dim, const std::string& what);

}
