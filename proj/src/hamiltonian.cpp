#include "fermelim/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fermelim {

OpSum mass_term(const SpaceLayout& lay, const Lattice& lat, int vertex, double M) {
  const double coeff = M * lat.staggered_sign(vertex);
  return {ProductTerm{coeff, {FactorOp{lay.at(psi_label(vertex)), mats::occupation(), false}}}};
}

OpSum electric_term(const SpaceLayout& lay, const LinkAlgebra& alg, const Link& link,
                    double lambda_E) {
  return {ProductTerm{lambda_E, {FactorOp{lay.at(gauge_label(link)), alg.H_elec, false}}}};
}

OpSum hopping_term(const SpaceLayout& lay, const LinkAlgebra& alg, const Link& link,
                   double epsilon, const HBuildOptions& opts) {
  if (link.dangling) throw std::invalid_argument("hopping_term: link has no second endpoint");
  ProductTerm t;
  t.coeff = epsilon;
  t.ops.push_back(FactorOp{lay.at(psi_label(link.from)), mats::sigma_plus(), true});
  if (opts.dress_hopping_with_qubit)
    t.ops.push_back(FactorOp{lay.at(qubit_label(link)), opts.qubit_op, false});
  t.ops.push_back(FactorOp{lay.at(gauge_label(link)), alg.U, false});
  t.ops.push_back(FactorOp{lay.at(psi_label(link.to)), mats::sigma_minus(), true});
  return {t};
}

OpSum plaquette_term(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
                     const Face& face, double lambda_B) {
  if (face.role != FaceRole::Bulk)
    throw std::invalid_argument("plaquette_term: face is not a bulk plaquette");
  ProductTerm t;
  t.coeff = lambda_B;
  const DMat udag = alg.U.adjoint();
  // sides: a = bottom, b = right get U; c = top, d = left get U^dag
  const std::array<const DMat*, 4> op_for_side{&alg.U, &alg.U, &udag, &udag};
  for (int s = 0; s < 4; ++s)
    t.ops.push_back(
        FactorOp{lay.at(gauge_label(lat.links[face.side[s]])), *op_for_side[s], false});
  return {t};
}

OpSum build_H_opsum(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
                    const CouplingParams& params, const HBuildOptions& opts) {
  OpSum h;
  auto append = [&h](const OpSum& part) { h.insert(h.end(), part.begin(), part.end()); };
  if (params.M != 0.0)
    for (int v = 0; v < lat.n_vertices; ++v) append(mass_term(lay, lat, v, params.M));
  if (params.lambda_E != 0.0)
    for (const Link& l : lat.links) append(electric_term(lay, alg, l, params.lambda_E));
  if (params.lambda_B != 0.0)
    for (int fi : lat.bulk_faces())
      append(plus_adjoint(plaquette_term(lay, lat, alg, lat.faces[fi], params.lambda_B)));
  if (params.epsilon != 0.0)
    for (const Link& l : lat.links)
      if (!l.dangling) append(plus_adjoint(hopping_term(lay, alg, l, params.epsilon, opts)));
  return h;
}

SpMat build_H(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
              const CouplingParams& params, const HBuildOptions& opts) {
  require_within_cap(lay.total_dim(), "build_H");
  return materialize(lay, build_H_opsum(lay, lat, alg, params, opts));
}

GaussFamily gauss_family(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg,
                         const std::vector<double>& charge_offsets) {
  if (!charge_offsets.empty() && static_cast<int>(charge_offsets.size()) != lat.n_vertices)
    throw std::invalid_argument("gauss_family: charge_offsets size mismatch");
  GaussFamily fam;
  constexpr double pi = std::numbers::pi;
  for (int v = 0; v < lat.n_vertices; ++v) {
    const double offset = charge_offsets.empty() ? 0.0 : charge_offsets[v];
    const Slots s = slots(lat, v);
    GaussGenerator g;
    g.vertex = v;
    g.label = "gauss_v" + std::to_string(v);
    if (alg.tag == GroupTag::Zd) {
      // omega^{E_h + E_v - E_h' - E_v' - n_x - offset}, target eigenvalue 1
      g.unitary_form = true;
      g.target = 1.0;
      const int d = alg.param;
      const cplx omega = std::polar(1.0, 2.0 * pi / d);
      auto phase_diag = [&](int sign) {
        DMat m = DMat::Zero(d, d);
        for (int k = 0; k < d; ++k) m(k, k) = std::pow(omega, sign * k);
        return m;
      };
      DMat matter = DMat::Identity(2, 2);
      matter(1, 1) = std::pow(omega, -1);
      ProductTerm t;
      t.coeff = std::pow(omega, -offset);
      t.ops.push_back(FactorOp{lay.at(gauge_label(lat.links[s.h])), phase_diag(+1), false});
      t.ops.push_back(FactorOp{lay.at(gauge_label(lat.links[s.v])), phase_diag(+1), false});
      t.ops.push_back(FactorOp{lay.at(gauge_label(lat.links[s.hp])), phase_diag(-1), false});
      t.ops.push_back(FactorOp{lay.at(gauge_label(lat.links[s.vp])), phase_diag(-1), false});
      t.ops.push_back(FactorOp{lay.at(psi_label(v)), matter, false});
      g.op = {t};
    } else {
      // E_h + E_v - E_h' - E_v' - n_x - offset, target eigenvalue 0
      g.unitary_form = false;
      g.target = 0.0;
      if (alg.tag != GroupTag::TrivialLink) {
        auto eterm = [&](int link, double sign) {
          g.op.push_back(
              ProductTerm{sign, {FactorOp{lay.at(gauge_label(lat.links[link])), alg.E, false}}});
        };
        eterm(s.h, 1.0);
        eterm(s.v, 1.0);
        eterm(s.hp, -1.0);
        eterm(s.vp, -1.0);
      }
      g.op.push_back(ProductTerm{-1.0, {FactorOp{lay.at(psi_label(v)), mats::occupation(), false}}});
      if (offset != 0.0) g.op.push_back(ProductTerm{-offset, {}});
    }
    fam.generators.push_back(std::move(g));
  }
  return fam;
}

cplx diagonal_value(const SpaceLayout& lay, const OpSum& sum, index_t idx) {
  auto img = apply_to_basis(lay, sum, idx);
  if (img.empty()) return 0.0;
  if (img.size() != 1 || img[0].first != idx)
    throw std::logic_error("diagonal_value: operator is not diagonal");
  return img[0].second;
}

SectorBasis physical_sector(const GaussFamily& gauss, const SpaceLayout& lay, double tol) {
  SectorBasis sec;
  sec.parent_dim = lay.total_dim();
  for (const auto& g : gauss.generators) sec.defining_constraints.emplace_back(g.label, g.target);
  std::vector<Triplet> ts;
  for (index_t i = 0; i < lay.total_dim(); ++i) {
    bool keep = true;
    for (const auto& g : gauss.generators)
      if (std::abs(diagonal_value(lay, g.op, i) - g.target) > tol) {
        keep = false;
        break;
      }
    if (keep) {
      sec.basis_states.push_back(i);
      ts.emplace_back(i, static_cast<index_t>(sec.basis_states.size()) - 1, 1.0);
    }
  }
  sec.columns =
      from_triplets(sec.parent_dim, static_cast<index_t>(sec.basis_states.size()), ts);
  return sec;
}

}
