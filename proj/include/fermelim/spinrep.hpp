#pragma once

#include <vector>

#include "fermelim/eliminate.hpp"

namespace fermelim {

// On-site spin representation of the N+1 vertex fermion modes (psi_1..psi_N
// and the Majorana c) by N+1 spins, slot m for psi_m, slot N+1 for c, with a
// disentangling rotation after which every hard-core image acts trivially on
// slot N+1. Slot 1 is the least significant tensor digit.
struct OnSiteSpinRep {
  int N = 1;
  std::vector<DMat> jw_psi;   // psi_m images on N+1 spins, index m-1
  DMat jw_c;                  // c image on N+1 spins
  DMat wtilde;                // the quarter-turn rotation on N+1 spins
  std::vector<DMat> eta_full; // rotated c*psi_m, still on N+1 spins
  std::vector<DMat> eta_spin; // the same, reduced to the N working spins
};

// builds the representation and verifies that every rotated hard-core image
// factorizes as (N-spin operator) x (identity on slot N+1); throws otherwise
OnSiteSpinRep build_spin_rep(int N);

// the printed string form Sigma_{m+1} sigma^-_m on N spins (m = 1..N)
DMat eta_string_form(int N, int m);

// single on-site rotation R (a product of sigma^z) with
// R eta_spin[m-1] R^dag = eta_string_form(N, m) for every m simultaneously
DMat parity_rotation(int N);

// max defect over the on-site CAR relations of eta_spin:
// {eta_m, eta_n} = 0 (so eta^2 = 0) and {eta_m, eta_n^dag} = delta_mn
double spin_rep_algebra_violation(const OnSiteSpinRep& rep);

// checks the rotated image of the fermionic vacuum factorizes with the N
// working spins all in 0, and that the 2^N states generated by eta_spin^dag
// subsets are orthonormal (they span the even-parity image)
bool verify_vacuum_map(const OnSiteSpinRep& rep);

// matter layout for the substituted model: one dim-2^N spin factor per vertex
// (labeled like the matter mode it replaces), then the gauge links
SpaceLayout spin_model_layout(const Lattice& lat, const LinkAlgebra& alg, int N);

// the transformed Hamiltonian with color-0 eta replaced by its spin image:
// same electric/plaquette content, mass from eta^dag eta, hopping
// -i eps eta^dag_x (sign string) U eta_y + h.c. with no fermionic strings
SpMat spin_substituted_H(const Lattice& lat, const LinkAlgebra& alg, const CouplingParams& params,
                         const std::vector<PlaquetteSign>& plaquette_signs,
                         const OnSiteSpinRep& rep);

}
