#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fermelim/fock.hpp"
#include "fermelim/lattice.hpp"
#include "fermelim/linkalg.hpp"

namespace fermelim {

struct CouplingParams {
  double M = 0.0;
  double lambda_E = 0.0;
  double lambda_B = 0.0;
  double epsilon = 0.0;
};

struct HBuildOptions {
  bool dress_hopping_with_qubit = false;
  DMat qubit_op;  // inserted at the link's qubit factor in every hopping term
};

// single directed terms, no hermitian conjugates
OpSum mass_term(const SpaceLayout& lay, const Lattice& lat, int vertex, double M);
OpSum electric_term(const SpaceLayout& lay, const LinkAlgebra& alg, const Link& link,
                    double lambda_E);
OpSum hopping_term(const SpaceLayout& lay, const LinkAlgebra& alg, const Link& link,
                   double epsilon, const HBuildOptions& opts = {});
OpSum plaquette_term(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
                     const Face& face, double lambda_B);

OpSum build_H_opsum(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
                    const CouplingParams& params, const HBuildOptions& opts = {});
SpMat build_H(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
              const CouplingParams& params, const HBuildOptions& opts = {});

struct GaussGenerator {
  int vertex = -1;
  std::string label;
  OpSum op;        // diagonal in the stored basis
  cplx target{0.0, 0.0};
  bool unitary_form = false;  // generator is a unitary with target eigenvalue 1
};

struct GaussFamily {
  std::vector<GaussGenerator> generators;
};

GaussFamily gauss_family(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
                         const std::vector<double>& charge_offsets = {});

// value of a diagonal operator on a basis state
cplx diagonal_value(const SpaceLayout& lay, const OpSum& sum, index_t idx);

SectorBasis physical_sector(const GaussFamily& gauss, const SpaceLayout& lay, double tol = 1e-10);

}
