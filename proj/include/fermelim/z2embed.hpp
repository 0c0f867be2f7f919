#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>

#include "fermelim/eliminate.hpp"
#include "fermelim/hamiltonian.hpp"

namespace fermelim {

// Storage basis for the auxiliary link qubits. ZDiagonal is the computational
// basis (flux operators diagonal, loop configurations are basis states);
// XDiagonal diagonalizes the qubit parity, which is what the elimination
// machinery needs. Nothing compares matrices across the two conventions.
enum class QubitBasis { ZDiagonal, XDiagonal };

DMat qubit_Z(QubitBasis basis);
DMat qubit_X(QubitBasis basis);

struct Z2Extension {
  Lattice lat;
  LinkAlgebra base;
  QubitBasis basis = QubitBasis::ZDiagonal;
  CouplingParams params;
  SpaceLayout layout;  // base factors plus one qubit per link (qubits last, link order)
  SpMat Hprime;
  GaussFamily gauss1;                  // base generators, acting trivially on the qubits
  std::vector<GaussGenerator> gauss2;  // vertex star laws A_x exp(i pi n_x), unitary, target 1
  std::vector<GaussGenerator> gauss3;  // face flux laws prod Z, unitary, target 1
};

Z2Extension extend_with_z2(const Lattice& lat, const LinkAlgebra& base,
                           const CouplingParams& params,
                           QubitBasis basis = QubitBasis::ZDiagonal);

// max violation over: unitarity/involution of the auxiliary generators, their
// mutual commutators, and their commutators with Hprime and with gauss1
double extension_invariant_violation(const Z2Extension& ext);

struct LoopBasis {
  std::vector<std::uint32_t> configs;     // link bitmasks; configs[0] == 0
  std::vector<std::uint32_t> generators;  // vertex set whose star product creates configs[i]
};

// all flux-free qubit configurations as the star-group orbit of the empty one
LoopBasis loop_basis(const Lattice& lat);  // OBC only

// isometry from the base layout into the extended layout,
// W|b> = 2^{-Nv/2} sum_L (-1)^{n_L(b)} |b> (x) |L>
SpMat build_W(const Z2Extension& ext, const LoopBasis& loops);  // ZDiagonal only

struct PbcSectors {
  std::uint32_t a_hor = 0, a_vert = 0;      // dual winding strings (sector togglers)
  std::uint32_t label_h = 0, label_v = 0;   // primal rings whose parities label the sectors
  std::array<std::vector<std::uint32_t>, 4> configs;  // flux-free masks by n_h*2 + n_v
};

PbcSectors pbc_sectors(const Lattice& lat);  // PBC only

struct PbcSectorSpectra {
  std::array<std::vector<double>, 4> eigs;
  std::vector<double> base_even_eigs;     // base H on the even fermion-parity block
  double gauss_defect = 0.0;              // sector states under the auxiliary laws
  double trivial_match = 0.0;             // sector (0,0) spectrum vs base_even_eigs
  double nontrivial_separation = 0.0;     // min over other sectors of the spectral distance
};

// pure-matter base on a PBC lattice: embedded physical states carry even
// fermion parity only, and split into the four winding sectors
PbcSectorSpectra pbc_sector_spectra(const Lattice& lat, const CouplingParams& params);

// qubit masks whose star parities match the matter occupation parities: the
// X-basis expansion of the embedded state W|matter_mask>
std::vector<std::uint32_t> star_coset(const Lattice& lat, std::uint32_t matter_mask);

// sparse application of an operator to a sparse state
std::map<index_t, cplx> apply_opsum_sparse(const SpaceLayout& lay, const OpSum& sum,
                                           const std::map<index_t, cplx>& state);

DMat sector_matrix(const SpaceLayout& lay, const OpSum& sum,
                   const std::vector<std::map<index_t, cplx>>& states);

// pure-matter base, X-diagonal convention: the qubit becomes the link algebra
// and the elimination walk maps each embedded state into the reduced space
struct PipelineStates {
  std::shared_ptr<const Lattice> lat;  // owned here so ctx stays valid across copies
  std::shared_ptr<const LinkAlgebra> alg;
  EliminationContext ctx;  // z2aux context; layouts here are only walked, never materialized
  SpaceLayout base;        // matter + z2aux gauge factors
  std::vector<std::uint32_t> matter_masks;
  std::vector<std::map<index_t, cplx>> states;  // on ctx.reduced, indexed like matter_masks
  DMat gram;
  double gram_defect = 0.0;
};

PipelineStates pipeline_transform_states(const Lattice& lat);

// twisted variant: components weighted by (-1)^{|s & twist_mask|}; twist 0
// reproduces the embedded physical state
std::map<index_t, cplx> pipeline_embedded_state(const PipelineStates& ps,
                                                std::uint32_t matter_mask,
                                                std::uint32_t twist_mask = 0);

// transformed flux-law report for every face of the pipeline lattice
struct FluxCheck {
  int face = -1;
  FaceRole role = FaceRole::Bulk;
  SignSupport support;                        // X-decoration subset and phase
  std::vector<std::pair<int, char>> letters;  // per involved link: 'X', 'Y' or 'Z'
  cplx string_phase{0.0, 0.0};  // streamed transform == string_phase * letter string
  double string_match = 0.0;    // entrywise defect of that identity
  double plus_one_defect = 0.0;       // transformed law minus identity on embedded states
  double letters_eig_defect = 0.0;    // letter string eigenvalue vs 1/string_phase
  double violating_defect = 0.0;      // twisted states flip the constraint eigenvalue
};

std::vector<FluxCheck> transformed_gauss3_check(const PipelineStates& ps);

}
