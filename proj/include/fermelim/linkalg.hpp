#pragma once

#include <string>
#include <vector>

#include "fermelim/sparse.hpp"

namespace fermelim {

enum class GroupTag { Zd, U1Truncated, TrivialLink };

// Per-link operator family, stored in the eigenbasis of E (for Zd this is the
// eigenbasis of the shift operator X, where E = diag(0..d-1) and U = Z acts as
// the cyclic raising permutation). N_colors = 1 throughout: U is a single matrix.
struct LinkAlgebra {
  GroupTag tag = GroupTag::TrivialLink;
  std::string name = "trivial";
  int param = 0;  // d for Zd, ell for U1Truncated
  int local_dim = 1;
  int n_colors = 1;
  DMat U, E, P, H_elec;
  DMat X;  // diagonal clock companion, kept for the Zd relation checks

  int parity_sign(int m) const { return (m % 2 == 0) ? 1 : -1; }  // eigenvalue of P on |m>
};

LinkAlgebra make_zd_link(int d);
LinkAlgebra make_u1_truncated_link(int ell);
LinkAlgebra make_trivial_link();
LinkAlgebra make_z2_aux_link();  // qubit with the Zd(2) operator family and zero electric energy

struct RelationReport {
  std::vector<std::pair<std::string, double>> entries;
  double max_violation() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.second);
    return m;
  }
};

// max-norms of PU+UP, [P,E], [H_elec,P], P - exp(i pi E), plus per-family extras
RelationReport check_link_relations(const LinkAlgebra& alg);

enum class CertGroup { UN, SUN, Zd };

struct GroupCertificate {
  CertGroup group = CertGroup::SUN;
  int N = 2;
  bool exists = false;
  double s_used = 0.0;      // exponent scalar actually applied (SU only)
  double s_alt = 0.0;       // the alternative normalization recorded for comparison
  DMat witness;             // exp(i pi s T_0), exp(i pi) 1, or X^{d/2}
  double violation = 0.0;   // distance of the defining identity when exists
  cplx matter_rep{1.0, 0.0};  // scalar representation of the central element on one fermion
};

GroupCertificate p_certificate(CertGroup group, int N);

}
