#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fermelim/eliminate.hpp"

using namespace fermelim;

namespace {

SpMat embed_at(const SpaceLayout& lay, const std::string& label, const DMat& m) {
  return embed(lay, label, m);
}

double anticommutator_norm(const SpMat& a, const SpMat& b) {
  return max_abs(SpMat(a * b + b * a));
}

}  // namespace

TEST_CASE("vertex factors are Hermitian involutions") {
  // i c alpha squares to the identity on a two-mode toy space
  SpaceLayout toy;
  toy.add_factor(chi_factor("chi0"));
  toy.add_factor(auxf_factor("f0"));
  OpSum ica{{cplx(0.0, 1.0),
             {FactorOp{0, mats::majorana_first(), true}, FactorOp{1, mats::majorana_first(), true}}}};
  SpMat a = materialize(toy, ica);
  CHECK(max_abs_diff(SpMat(a * a), sp_identity(toy.total_dim())) <= 1e-14);
  CHECK(hermiticity_defect(a) <= 1e-14);

  const Lattice lat = build_lattice(1, 1, Boundary::OBC_DANGLING);
  const LinkAlgebra alg = make_zd_link(2);
  const EliminationContext ctx = make_elimination_context(lat, alg);
  const SpMat id = sp_identity(ctx.full.total_dim());
  for (int slot = 1; slot <= 4; ++slot) {
    SpMat v = materialize(ctx.full, ctx.v_by_vertex[0][slot - 1]);
    CHECK(hermiticity_defect(v) <= 1e-14);
    CHECK(max_abs_diff(SpMat(v * v), id) <= 1e-14);
  }
  SpMat u = local_unitary(ctx, 0);
  CHECK(max_abs_diff(SpMat(dagger(u) * u), id) <= 1e-12);

  // all incident link parities even: the vertex unitary fixes the state
  for (index_t idx = 0; idx < 64; ++idx) {  // gauge digits are the most significant block
    auto [j, p] = walk_state(ctx, idx);
    CHECK(j == idx);
    CHECK(std::abs(p - cplx(1.0, 0.0)) <= 1e-14);
  }

  const AuxVacua vac = aux_vacua(ctx);
  CHECK(vac.omega_I.size() == 2);
  CHECK(vac.omega_II.size() == 16);
  for (int v = 0; v < lat.n_vertices; ++v) {
    SpMat ann = fermion_annihilator(vac.chi_space, chi_label(v));
    CHECK((ann * vac.omega_I).norm() <= 1e-14);
  }
  for (const Link& l : lat.links) {
    SpMat ann = fermion_annihilator(vac.f_space, f_label(l));
    CHECK((ann * vac.omega_II).norm() <= 1e-14);
  }
}

TEST_CASE("full transformation on the 1x2 Z2 model") {
  const Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  const LinkAlgebra alg = make_zd_link(2);
  const EliminationContext ctx = make_elimination_context(lat, alg);
  const index_t dim = ctx.full.total_dim();
  REQUIRE(dim == (1 << 18));
  const WalkTables tables = full_walk_tables(ctx);

  // signed permutation: unit phases, bijective
  {
    std::vector<char> seen(dim, 0);
    double phase_defect = 0.0;
    for (index_t i = 0; i < dim; ++i) {
      seen[tables.pi[i]] = 1;
      phase_defect = std::max(phase_defect, std::abs(std::abs(tables.phase[i]) - 1.0));
    }
    CHECK(phase_defect <= 1e-14);
    CHECK(std::count(seen.begin(), seen.end(), 1) == dim);
  }

  const SpMat id = sp_identity(dim);
  SpMat u0 = local_unitary(ctx, 0);
  SpMat u1 = local_unitary(ctx, 1);
  CHECK(commutator_norm(u0, u1) <= 1e-12);
  SpMat u = full_unitary(ctx);
  CHECK(max_abs_diff(SpMat(dagger(u) * u), id) <= 1e-12);

  // E and matter occupation are invariant
  for (const Link& l : lat.links) {
    SpMat e = embed_at(ctx.full, gauge_label(l), alg.E);
    CHECK(max_abs_diff(conjugate_by_walk(tables, e), e) <= 1e-12);
  }
  for (int v = 0; v < lat.n_vertices; ++v) {
    SpMat n = embed_at(ctx.full, psi_label(v), mats::occupation());
    CHECK(max_abs_diff(conjugate_by_walk(tables, n), n) <= 1e-12);
  }

  // f f^dag is exactly invariant on the internal link; on dangling links the
  // image is the parity-resolved form and the literal difference is 1
  DMat ffdag = DMat::Zero(2, 2);
  ffdag(0, 0) = 1.0;
  DMat fdagf = DMat::Zero(2, 2);
  fdagf(1, 1) = 1.0;
  for (const Link& l : lat.links) {
    SpMat proj = embed_at(ctx.full, f_label(l), ffdag);
    SpMat img = conjugate_by_walk(tables, proj);
    if (!l.dangling) {
      CHECK(max_abs_diff(img, proj) <= 1e-12);
      continue;
    }
    OpSum resolved;
    resolved.push_back({cplx(1.0, 0.0),
                        {FactorOp{ctx.full.at(gauge_label(l)), proj_even(alg), false},
                         FactorOp{ctx.full.at(f_label(l)), ffdag, false}}});
    resolved.push_back({cplx(1.0, 0.0),
                        {FactorOp{ctx.full.at(gauge_label(l)), proj_odd(alg), false},
                         FactorOp{ctx.full.at(f_label(l)), fdagf, false}}});
    CHECK(max_abs_diff(img, materialize(ctx.full, resolved)) <= 1e-12);
    CHECK(max_abs_diff(img, proj) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // the transformed internal link matches the closed form
  for (const Link& l : lat.links) {
    if (l.dangling) continue;
    SpMat lhs = conjugate_by_walk(tables, embed_at(ctx.full, gauge_label(l), alg.U));
    CHECK(max_abs_diff(lhs, analytic_transformed_link(ctx, l.index)) <= 1e-12);
  }

  // central identity: the projected transform of H is the analytic local form
  const CouplingParams params{0.7, 1.1, 0.0, 0.9};
  const SpMat h_full = build_H(ctx.full, lat, alg, params);
  const SpMat h_tilde = transform_project(ctx, h_full, tables);
  const SpMat h_analytic = analytic_transformed_H(ctx, params);
  CHECK(max_abs_diff(h_tilde, h_analytic) <= 1e-10);

  // with eps = lambda_B = 0 the Hamiltonian is untouched
  {
    const CouplingParams diag_only{0.7, 1.1, 0.0, 0.0};
    SpMat hd = transform_project(ctx, build_H(ctx.full, lat, alg, diag_only), tables);
    SpMat hr = materialize(ctx.reduced,
                           analytic_transformed_H_opsum(ctx.reduced, lat, alg, diag_only, {}));
    CHECK(max_abs_diff(hd, hr) <= 1e-12);
  }

  // transformed Gauss generators: unchanged as diagonal operators, commute with H~
  const GaussFamily gauss_full = gauss_family(ctx.full, lat, alg);
  const GaussFamily gauss_red = gauss_family(ctx.reduced, lat, alg);
  for (int v = 0; v < lat.n_vertices; ++v) {
    SpMat theta = materialize(ctx.full, gauss_full.generators[v].op);
    SpMat theta_red = materialize(ctx.reduced, gauss_red.generators[v].op);
    CHECK(max_abs_diff(transform_project(ctx, theta, tables), theta_red) <= 1e-12);
    CHECK(commutator_norm(theta_red, h_analytic) <= 1e-12);
  }

  // spectral equivalence on the physical sector
  const SpaceLayout base = build_layout(lat, alg, false, false);
  const GaussFamily gauss_base = gauss_family(base, lat, alg);
  const SectorBasis phys = physical_sector(gauss_base, base);
  REQUIRE(phys.dim() == 128);
  const SpMat h_base = build_H(base, lat, alg, params);
  const std::vector<double> ref = sorted_eigenvalues(project_onto(phys, h_base));

  std::vector<TransformedState> tstates;
  std::set<index_t> distinct;
  for (index_t b : phys.basis_states) {
    TransformedState ts = transformed_basis_state(ctx, base, b);
    distinct.insert(ts.reduced_idx);
    tstates.push_back(ts);
  }
  CHECK(distinct.size() == tstates.size());

  DMat block = DMat::Zero(tstates.size(), tstates.size());
  {
    std::map<index_t, int> pos;
    for (std::size_t i = 0; i < tstates.size(); ++i) pos[tstates[i].reduced_idx] = int(i);
    for (int k = 0; k < h_analytic.outerSize(); ++k) {
      for (SpMat::InnerIterator it(h_analytic, k); it; ++it) {
        auto r = pos.find(it.row());
        auto c = pos.find(it.col());
        if (r == pos.end() || c == pos.end()) continue;
        block(r->second, c->second) = std::conj(tstates[r->second].phase) * it.value() *
                                      tstates[c->second].phase;
      }
    }
  }
  const std::vector<double> got = sorted_eigenvalues(block);
  CHECK(max_abs_diff(ref, got) <= 1e-9);

  // local statistics constraint on the transformed images
  CHECK(statistics_constraint_violation(ctx, tstates) <= 1e-12);
  {
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(ctx.reduced.total_dim());
    e0(0) = 1.0;
    CHECK(statistics_constraint_check(ctx, e0));
    Eigen::VectorXcd flat = Eigen::VectorXcd::Constant(ctx.reduced.total_dim(), 1.0);
    flat.normalize();
    double viol = 0.0;
    CHECK(!statistics_constraint_check(ctx, flat, &viol));
    CHECK(viol > 1e-3);
  }

  // streaming over the full support reproduces the projected transform
  {
    std::vector<int> all_links, all_verts;
    for (const Link& l : lat.links) all_links.push_back(l.index);
    for (int v = 0; v < lat.n_vertices; ++v) all_verts.push_back(v);
    const MiniSpec spec = mini_spec(lat, all_links, all_verts);
    StreamResult sr = stream_transform(
        lat, alg, spec, [&](const SpaceLayout& lay) { return build_H_opsum(lay, lat, alg, params); },
        ContractMode::Vacuum);
    REQUIRE(sr.layout.total_dim() == ctx.reduced.total_dim());
    CHECK(max_abs_diff(sr.op, h_tilde) <= 1e-12);
  }

  // per-term neighborhood streams against the analytic forms
  {
    const int internal = 1;  // the single internal link
    MiniSpec spec = mini_spec(lat, {internal}, {0, 1});
    StreamResult sr = stream_transform(
        lat, alg, spec,
        [&](const SpaceLayout& lay) {
          return plus_adjoint(hopping_term(lay, alg, lat.links[internal], params.epsilon));
        },
        ContractMode::Vacuum);
    SpMat want = materialize(
        sr.layout, analytic_transformed_H_opsum(sr.layout, lat, alg,
                                                CouplingParams{0.0, 0.0, 0.0, params.epsilon}, {}));
    CHECK(max_abs_diff(sr.op, want) <= 1e-12);

    MiniSpec mspec = mini_spec(lat, {}, {0});
    StreamResult mr = stream_transform(
        lat, alg, mspec, [&](const SpaceLayout& lay) { return mass_term(lay, lat, 0, params.M); },
        ContractMode::Vacuum);
    SpMat mwant = materialize(mr.layout, mass_term(mr.layout, lat, 0, params.M));
    CHECK(max_abs_diff(mr.op, mwant) <= 1e-12);

    const Link& dang = lat.links[0];
    REQUIRE(dang.dangling);
    MiniSpec espec = mini_spec(lat, {dang.index}, {});
    StreamResult er = stream_transform(
        lat, alg, espec,
        [&](const SpaceLayout& lay) { return electric_term(lay, alg, dang, params.lambda_E); },
        ContractMode::Vacuum);
    SpMat ewant = materialize(er.layout, electric_term(er.layout, alg, dang, params.lambda_E));
    CHECK(max_abs_diff(er.op, ewant) <= 1e-12);
  }

  // eta wrapper sanity on the full layout
  {
    SpMat e0 = eta(ctx, 0);
    SpMat n0 = embed_at(ctx.full, psi_label(0), mats::occupation());
    CHECK(max_abs_diff(SpMat(dagger(e0) * e0), n0) <= 1e-14);
    CHECK_THROWS_AS((void)eta(ctx, 0, 1), std::out_of_range);
  }
}

TEST_CASE("eta operators are hard-core bosons") {
  const Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  SpaceLayout lay;
  for (int v = 0; v < lat.n_vertices; ++v) lay.add_factor(matter_factor(psi_label(v)));
  for (int v = 0; v < lat.n_vertices; ++v) lay.add_factor(chi_factor(chi_label(v)));
  REQUIRE(lay.total_dim() == 256);

  std::vector<SpMat> eta_ops;
  for (int v = 0; v < lat.n_vertices; ++v) eta_ops.push_back(materialize(lay, eta_opsum(lay, v)));

  const SpMat id = sp_identity(lay.total_dim());
  for (int x = 0; x < lat.n_vertices; ++x) {
    CHECK(max_abs(SpMat(eta_ops[x] * eta_ops[x])) <= 1e-14);  // nilpotent
    SpMat num = SpMat(dagger(eta_ops[x]) * eta_ops[x]);
    CHECK(max_abs_diff(num, embed_at(lay, psi_label(x), mats::occupation())) <= 1e-14);
    CHECK(max_abs_diff(SpMat(eta_ops[x] * dagger(eta_ops[x]) + num), id) <= 1e-14);
    for (int y = 0; y < lat.n_vertices; ++y) {
      if (x == y) continue;
      CHECK(commutator_norm(eta_ops[x], eta_ops[y]) <= 1e-14);
      CHECK(commutator_norm(eta_ops[x], dagger(eta_ops[y])) <= 1e-14);
    }
  }
}

TEST_CASE("transformed links on intersecting links commute only with the sign factor") {
  const Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  const LinkAlgebra alg = make_zd_link(2);
  const int a = 1;  // horizontal, (0,0) -> (0,1)
  const int b = 9;  // vertical,   (0,1) -> (1,1)
  REQUIRE(!lat.links[a].dangling);
  REQUIRE(!lat.links[b].dangling);
  REQUIRE(lat.links[a].to == lat.links[b].from);

  SpaceLayout lay;
  for (int v : {0, 1, 3}) lay.add_factor(chi_factor(chi_label(v)));
  for (int l : {a, b}) lay.add_factor(auxf_factor(f_label(lat.links[l])));
  std::set<int> gauge{a, b};
  for (int l : xi_links(lat, lat.links[a])) gauge.insert(l);
  for (int l : xi_links(lat, lat.links[b])) gauge.insert(l);
  for (int l : gauge) lay.add_factor(link_factor(gauge_label(lat.links[l]), alg.local_dim));

  SpMat ta = materialize(lay, analytic_transformed_link_opsum(lay, lat, alg, a));
  SpMat tb = materialize(lay, analytic_transformed_link_opsum(lay, lat, alg, b));
  CHECK(commutator_norm(ta, tb) <= 1e-12);

  auto naive = [&](int link) {
    const Link& l = lat.links[link];
    ProductTerm t;
    t.coeff = cplx(0.0, 1.0);
    t.ops.push_back({lay.at(f_label(l)), -mats::parity2(), false});
    t.ops.push_back({lay.at(chi_label(l.from)), mats::majorana_first(), true});
    t.ops.push_back({lay.at(gauge_label(l)), alg.U, false});
    t.ops.push_back({lay.at(chi_label(l.to)), mats::majorana_first(), true});
    return materialize(lay, OpSum{t});
  };
  SpMat na = naive(a), nb = naive(b);
  CHECK(anticommutator_norm(na, nb) <= 1e-12);
  CHECK(commutator_norm(na, nb) > 0.5);
}

TEST_CASE("sign support discovery recovers the slot rule") {
  const Lattice lat = build_lattice(3, 3, Boundary::OBC_DANGLING);
  const LinkAlgebra z2 = make_zd_link(2);

  // horizontal link (1,0)->(1,1): up, left, down at x and down at y
  {
    const int link = 5;  // h(1,1)
    REQUIRE(lat.links[link].horizontal);
    REQUIRE(!lat.links[link].dangling);
    SignSupport s = discover_link_support(lat, z2, link);
    CHECK(s.observable == "xi_h");
    CHECK(s.support == std::vector<int>{4, 15, 16, 18});
    CHECK(std::abs(s.phase - cplx(0.0, -1.0)) <= 1e-12);
    CHECK(s.unique);
    CHECK(s.minimal);
    CHECK(s.support == xi_links(lat, lat.links[link]));

    SignSupport su = discover_link_support(lat, make_u1_truncated_link(1), link);
    CHECK(su.support == s.support);
    CHECK(std::abs(su.phase - s.phase) <= 1e-12);
  }

  // vertical link (0,1)->(1,1): left and down at x
  {
    const int link = 16;  // v(1,1)
    REQUIRE(!lat.links[link].horizontal);
    REQUIRE(!lat.links[link].dangling);
    SignSupport s = discover_link_support(lat, z2, link);
    CHECK(s.observable == "xi_v");
    CHECK(s.support == std::vector<int>{1, 13});
    CHECK(std::abs(s.phase - cplx(0.0, -1.0)) <= 1e-12);
    CHECK(s.support == xi_links(lat, lat.links[link]));
  }

  // bulk plaquette: support has size 4 and contains the bottom and right links
  {
    int face = -1;
    for (const Face& f : lat.faces)
      if (f.fr == 2 && f.fc == 2) face = f.index;
    REQUIRE(face >= 0);
    const Face& f = lat.faces[face];
    REQUIRE(f.role == FaceRole::Bulk);
    SignSupport s = discover_plaquette_support(lat, z2, face);
    CHECK(s.observable == "xi_p");
    CHECK(s.support.size() == 4);
    CHECK(std::count(s.support.begin(), s.support.end(), f.side[0]) == 1);
    CHECK(std::count(s.support.begin(), s.support.end(), f.side[1]) == 1);
    CHECK(s.support == std::vector<int>{6, 9, 20, 22});
    CHECK(std::abs(s.phase - cplx(1.0, 0.0)) <= 1e-12);
  }

  // the 2x2 bulk plaquette pins the two exterior links next to the top-left corner
  {
    const Lattice small = build_lattice(2, 2, Boundary::OBC_DANGLING);
    const Face& f = small.faces[small.bulk_faces().front()];
    SignSupport s = discover_plaquette_support(small, z2, f.index);
    CHECK(s.support == std::vector<int>{1, 3, 9, 10});
    CHECK(std::abs(s.phase - cplx(1.0, 0.0)) <= 1e-12);
  }

  // straight two-link meson on 3x4
  {
    const Lattice wide = build_lattice(3, 4, Boundary::OBC_DANGLING);
    const std::vector<int> path{7, 8};  // (1,1) -> (1,2) -> (1,3)
    for (int l : path) {
      REQUIRE(wide.links[l].horizontal);
      REQUIRE(!wide.links[l].dangling);
    }
    SignSupport s = discover_meson_support(wide, z2, path);
    CHECK(s.observable == "xi_M(2)");
    CHECK(s.support == std::vector<int>{6, 7, 20, 22, 24, 25});
    // per link -i from the vacuum contraction, and -1 per interior junction
    // where the next sign factor slides past the previous link operator
    CHECK(std::abs(s.phase - cplx(1.0, 0.0)) <= 1e-12);
  }
}

TEST_CASE("streaming handles qudit links and kept f factors") {
  const Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  const LinkAlgebra alg = make_u1_truncated_link(1);
  const CouplingParams params{0.7, 1.1, 0.0, 0.9};
  const int internal = 1;

  // hopping stream against the analytic form
  {
    MiniSpec spec = mini_spec(lat, {internal}, {0, 1});
    StreamResult sr = stream_transform(
        lat, alg, spec,
        [&](const SpaceLayout& lay) {
          return plus_adjoint(hopping_term(lay, alg, lat.links[internal], params.epsilon));
        },
        ContractMode::Vacuum);
    SpMat want = materialize(
        sr.layout, analytic_transformed_H_opsum(sr.layout, lat, alg,
                                                CouplingParams{0.0, 0.0, 0.0, params.epsilon}, {}));
    CHECK(max_abs_diff(sr.op, want) <= 1e-12);
  }

  // f f^dag with the f factor kept: exact invariance on the internal link,
  // parity-resolved image on a dangling one
  DMat ffdag = DMat::Zero(2, 2);
  ffdag(0, 0) = 1.0;
  DMat fdagf = DMat::Zero(2, 2);
  fdagf(1, 1) = 1.0;
  for (int link : {internal, 0}) {
    const Link& l = lat.links[link];
    MiniSpec spec = mini_spec(lat, {link}, {}, {link});
    StreamResult sr = stream_transform(
        lat, alg, spec,
        [&](const SpaceLayout& lay) -> OpSum {
          return {{cplx(1.0, 0.0), {FactorOp{lay.at(f_label(lat.links[link])), ffdag, false}}}};
        },
        ContractMode::Vacuum);
    if (!l.dangling) {
      SpMat want = materialize(
          sr.layout,
          {{cplx(1.0, 0.0), {FactorOp{sr.layout.at(f_label(l)), ffdag, false}}}});
      CHECK(max_abs_diff(sr.op, want) <= 1e-12);
    } else {
      OpSum resolved;
      resolved.push_back({cplx(1.0, 0.0),
                          {FactorOp{sr.layout.at(gauge_label(l)), proj_even(alg), false},
                           FactorOp{sr.layout.at(f_label(l)), ffdag, false}}});
      resolved.push_back({cplx(1.0, 0.0),
                          {FactorOp{sr.layout.at(gauge_label(l)), proj_odd(alg), false},
                           FactorOp{sr.layout.at(f_label(l)), fdagf, false}}});
      CHECK(max_abs_diff(sr.op, materialize(sr.layout, resolved)) <= 1e-12);
    }
  }

  // mass and electric terms ride through unchanged
  for (const Link& l : lat.links) {
    MiniSpec spec = mini_spec(lat, {l.index}, {});
    StreamResult sr = stream_transform(
        lat, alg, spec,
        [&](const SpaceLayout& lay) { return electric_term(lay, alg, l, params.lambda_E); },
        ContractMode::Vacuum);
    SpMat want = materialize(sr.layout, electric_term(sr.layout, alg, l, params.lambda_E));
    CHECK(max_abs_diff(sr.op, want) <= 1e-12);
  }
}
