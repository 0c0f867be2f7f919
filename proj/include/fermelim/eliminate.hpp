#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fermelim/hamiltonian.hpp"

namespace fermelim {

DMat proj_even(const LinkAlgebra& alg);  // (1 + P)/2
DMat proj_odd(const LinkAlgebra& alg);   // (1 - P)/2

// Per-vertex slot factors: V_i acts on (link qudit at slot i, chi_x, f at slot i)
// as Pi_even(E) * 1 + Pi_odd(E) * (i c zeta). slot: 1=right(h), 2=up(v),
// 3=left(h'), 4=down(v'); zeta is the first Majorana for slots 1,2 and the
// second for slots 3,4.
OpSum v_opsum(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg, int vertex,
              int slot);

OpSum eta_opsum(const SpaceLayout& lay, int vertex);      // c_x psi_x
OpSum eta_dag_opsum(const SpaceLayout& lay, int vertex);  // psi_x^dag c_x

// links whose E parities multiply the transformed hopping on this link
std::vector<int> xi_links(const Lattice& lat, const Link& link);

// i * xi * (1 - 2 f f^dag) * c_x U c_y, on any layout containing the needed factors
OpSum analytic_transformed_link_opsum(const SpaceLayout& lay, const Lattice& lat,
                                      const LinkAlgebra& alg, int link);

struct PlaquetteSign {
  int face = -1;
  std::vector<int> support;  // links whose E parities multiply the transformed plaquette
  cplx phase{1.0, 0.0};
};

// -i eps xi eta^dag_x U eta_y + h.c. on an f-free layout
OpSum analytic_transformed_hopping_opsum(const SpaceLayout& lay, const Lattice& lat,
                                         const LinkAlgebra& alg, int link, double epsilon,
                                         const HBuildOptions& opts = {});

// lambda_B * phase * xi_p * (U U U^dag U^dag) + h.c. over the face
OpSum analytic_transformed_plaquette_opsum(const SpaceLayout& lay, const Lattice& lat,
                                           const LinkAlgebra& alg, const PlaquetteSign& sign,
                                           double lambda_B);

// transformed Hamiltonian on an f-free layout: H_M + H_E unchanged,
// hopping -> -i eps xi eta^dag U eta + h.c., plaquette -> phase * xi_p * (UUU^dag U^dag) + h.c.
OpSum analytic_transformed_H_opsum(const SpaceLayout& lay, const Lattice& lat,
                                   const LinkAlgebra& alg, const CouplingParams& params,
                                   const std::vector<PlaquetteSign>& plaquette_signs,
                                   const HBuildOptions& opts = {});

struct EliminationContext {
  const Lattice* lat = nullptr;
  const LinkAlgebra* alg = nullptr;
  SpaceLayout full;     // matter, chi, f, gauge
  SpaceLayout reduced;  // matter, chi, gauge
  std::vector<std::vector<OpSum>> v_by_vertex;  // [vertex][slot-1], on `full`
  index_t f_stride = 1;  // stride of the first f factor in `full`
  index_t f_block = 1;   // combined dimension of the f factors
};

EliminationContext make_elimination_context(const Lattice& lat, const LinkAlgebra& alg);

struct AuxVacua {
  SpaceLayout chi_space, f_space;
  Eigen::VectorXcd omega_I, omega_II;
};
AuxVacua aux_vacua(const EliminationContext& ctx);

SpMat local_unitary(const EliminationContext& ctx, int vertex);  // V4 V3 V2 V1
SpMat full_unitary(const EliminationContext& ctx);

// image of a basis state under the product of all local unitaries
std::pair<index_t, cplx> walk_state(const EliminationContext& ctx, index_t idx);

struct WalkTables {
  std::vector<index_t> pi;
  std::vector<cplx> phase;
};
WalkTables full_walk_tables(const EliminationContext& ctx);

SpMat conjugate_by_walk(const WalkTables& t, const SpMat& a);  // U A U^dag

index_t embed_reduced(const EliminationContext& ctx, index_t reduced_idx);  // f digits = 0
bool f_digits_zero(const EliminationContext& ctx, index_t full_idx);
index_t reduce_index(const EliminationContext& ctx, index_t full_idx);  // drop f digits

// two-sided partial inner product against the f vacuum
SpMat transform_project(const EliminationContext& ctx, const SpMat& a, const WalkTables& t);
SpMat transform_project(const EliminationContext& ctx, const SpMat& a);

SpMat eta(const EliminationContext& ctx, int vertex, int color = 0);
SpMat analytic_transformed_link(const EliminationContext& ctx, int link);
SpMat analytic_transformed_H(const EliminationContext& ctx, const CouplingParams& params,
                             const std::vector<PlaquetteSign>& plaquette_signs);
SpMat analytic_transformed_H(const EliminationContext& ctx, const CouplingParams& params);

// embed a basis state of the aux-free base layout into ctx.full with aux vacuum
index_t embed_base_state(const SpaceLayout& base, const EliminationContext& ctx, index_t idx);

// walked physical basis state, f digits checked (0 on internal links, the E
// parity on dangling ones) and dropped
struct TransformedState {
  index_t reduced_idx = 0;
  cplx phase{1.0, 0.0};
};
TransformedState transformed_basis_state(const EliminationContext& ctx, const SpaceLayout& base,
                                         index_t base_idx);

// exp(i pi eta^dag eta) == exp(i pi chi^dag chi) at every vertex, on a reduced-space state
bool statistics_constraint_check(const EliminationContext& ctx, const Eigen::VectorXcd& state,
                                 double* max_violation = nullptr, double tol = 1e-10);
double statistics_constraint_violation(const EliminationContext& ctx,
                                       const std::vector<TransformedState>& states);

// --- support-restricted streaming ------------------------------------------

enum class ContractMode { Vacuum, PhysicalSlice };

struct MiniSpec {
  std::vector<int> matter_vertices;  // vertices whose psi enters the term
  std::vector<int> active_vertices;  // vertices whose V's are applied
  std::vector<int> links;            // all links incident to the active vertices
  std::vector<int> keep_f_links;     // f factors kept (uncontracted) in the result
  // dangling links away from the active vertices whose auxiliary mode sits
  // between modes the stream does touch: on the parity-correlated slice they
  // ride along as diagonal spectators (their gauge factor is present, their f
  // counts as occupied on odd parity). Only meaningful with PhysicalSlice.
  std::vector<int> spectator_links;
};

MiniSpec mini_spec(const Lattice& lat, const std::vector<int>& touched_links,
                   const std::vector<int>& matter_vertices,
                   const std::vector<int>& keep_f_links = {},
                   const std::vector<int>& spectator_links = {});

SpaceLayout build_mini_layout(const Lattice& lat, const LinkAlgebra& alg, const MiniSpec& spec);

struct StreamResult {
  SpaceLayout layout;  // mini layout after contraction (plus any kept f factors)
  SpMat op;
};

StreamResult stream_transform(const Lattice& lat, const LinkAlgebra& alg, const MiniSpec& spec,
                              const std::function<OpSum(const SpaceLayout&)>& term_builder,
                              ContractMode mode);

// --- sign-factor discovery ---------------------------------------------------

struct SignSupport {
  std::string observable;          // xi_h, xi_v, xi_p, xi_M(L)
  std::vector<int> support;        // link indices, ascending
  std::vector<std::string> labels; // their labels
  cplx phase{1.0, 0.0};
  bool minimal = false;
  bool unique = false;
};

SignSupport discover_link_support(const Lattice& lat, const LinkAlgebra& alg, int link);
SignSupport discover_plaquette_support(const Lattice& lat, const LinkAlgebra& alg, int face);
SignSupport discover_meson_support(const Lattice& lat, const LinkAlgebra& alg,
                                   const std::vector<int>& path_links);

// dangling links whose mode sits strictly between the face's own dangling
// pair in the global mode order but away from the face's vertices: the
// transformed flux threads past them, so they join the stream as spectators
std::vector<int> flux_spectator_links(const Lattice& lat, int face);

// flux law prod U over any face kind; dangling links contract on the
// parity-correlated slice and enter the core fused with their f Majorana.
// On bulk faces this coincides with discover_plaquette_support.
SignSupport discover_flux_support(const Lattice& lat, const LinkAlgebra& alg, int face);

}
