#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "fermelim/z2embed.hpp"

using namespace fermelim;

namespace {

CouplingParams ladder_params() { return CouplingParams{0.7, 1.1, 0.0, 0.9}; }

int pc(std::uint32_t x) { return __builtin_popcount(x); }

std::uint32_t brute_face_mask(const Lattice& lat, const Face& f) {
  std::uint32_t m = 0;
  for (int l : f.links) m |= 1u << l;
  return m;
}

std::vector<std::uint32_t> brute_flux_free(const Lattice& lat) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < (1u << lat.links.size()); ++s) {
    bool flat = true;
    for (const Face& f : lat.faces)
      if (pc(s & brute_face_mask(lat, f)) % 2) {
        flat = false;
        break;
      }
    if (flat) out.push_back(s);
  }
  return out;
}

Eigen::VectorXcd densify(const SpaceLayout& lay, const std::map<index_t, cplx>& st) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(lay.total_dim());
  for (const auto& [idx, amp] : st) v(idx) = amp;
  return v;
}

}  // namespace

TEST_CASE("qubit conventions pair up with the auxiliary link algebra") {
  for (QubitBasis b : {QubitBasis::ZDiagonal, QubitBasis::XDiagonal}) {
    const DMat Z = qubit_Z(b), X = qubit_X(b);
    CHECK((Z * Z - DMat::Identity(2, 2)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((X * X - DMat::Identity(2, 2)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((Z * X + X * Z).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  CHECK(qubit_Z(QubitBasis::ZDiagonal)(1, 1).real() == doctest::Approx(-1.0));
  CHECK(qubit_Z(QubitBasis::XDiagonal)(0, 0).real() == doctest::Approx(0.0));

  // the auxiliary link algebra stores exactly the X-diagonal convention
  const LinkAlgebra aux = make_z2_aux_link();
  CHECK((aux.U - qubit_Z(QubitBasis::XDiagonal)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((aux.P - qubit_X(QubitBasis::XDiagonal)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("extension invariants hold for trivial and gauged bases") {
  const Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  const CouplingParams p = ladder_params();

  const Z2Extension et = extend_with_z2(lat, make_trivial_link(), p);
  CHECK(et.gauss1.generators.empty());
  CHECK(et.gauss2.size() == 2);
  CHECK(et.gauss3.size() == 6);
  CHECK(extension_invariant_violation(et) <= 1e-12);

  const Z2Extension ex = extend_with_z2(lat, make_trivial_link(), p, QubitBasis::XDiagonal);
  CHECK(extension_invariant_violation(ex) <= 1e-12);

  const Z2Extension ez = extend_with_z2(lat, make_zd_link(2), p);
  CHECK(ez.gauss1.generators.size() == 2);
  CHECK(extension_invariant_violation(ez) <= 1e-12);

  CouplingParams pq = p;
  pq.lambda_B = 0.45;
  const Lattice sq = build_lattice(2, 2, Boundary::OBC_DANGLING);
  CHECK(extension_invariant_violation(extend_with_z2(sq, make_trivial_link(), pq)) <= 1e-12);

  const Lattice torus = build_lattice(2, 2, Boundary::PBC);
  CHECK(extension_invariant_violation(extend_with_z2(torus, make_trivial_link(), pq)) <= 1e-12);

  // a gauged base on a 3x3 patch would need 2^57 states
  const Lattice big = build_lattice(3, 3, Boundary::OBC_DANGLING);
  CHECK_THROWS_AS(extend_with_z2(big, make_zd_link(2), p), std::invalid_argument);
}

TEST_CASE("loop basis enumerates the flux-free configurations") {
  for (auto [rows, cols] : {std::pair{1, 2}, std::pair{2, 2}}) {
    const Lattice lat = build_lattice(rows, cols, Boundary::OBC_DANGLING);
    const LoopBasis lb = loop_basis(lat);
    REQUIRE(lb.configs.size() == (1u << lat.n_vertices));
    CHECK(lb.configs[0] == 0);
    CHECK(lb.generators[0] == 0);

    const std::set<std::uint32_t> got(lb.configs.begin(), lb.configs.end());
    CHECK(got.size() == lb.configs.size());
    const auto flat = brute_flux_free(lat);
    REQUIRE(flat.size() == got.size());
    for (std::uint32_t s : flat) CHECK(got.count(s) == 1);
  }

  CHECK_THROWS_AS(loop_basis(build_lattice(2, 2, Boundary::PBC)), std::invalid_argument);
}

TEST_CASE("the dressed model restricts to the base model on the loop image") {
  const CouplingParams p = ladder_params();

  auto run = [&](const Lattice& lat, const LinkAlgebra& base, const CouplingParams& pp) {
    const Z2Extension ext = extend_with_z2(lat, base, pp);
    const LoopBasis lb = loop_basis(lat);
    const SpMat W = build_W(ext, lb);
    const SpaceLayout blay = build_layout(lat, base, false, false);

    CHECK(max_abs_diff(SpMat(dagger(W) * W), sp_identity(blay.total_dim())) <= 1e-12);

    const SpMat hb = build_H(blay, lat, base, pp);
    CHECK(max_abs_diff(SpMat(dagger(W) * SpMat(ext.Hprime * W)), hb) <= 1e-10);

    for (const auto* fam : {&ext.gauss2, &ext.gauss3})
      for (const GaussGenerator& g : *fam)
        CHECK(max_abs_diff(SpMat(materialize(ext.layout, g.op) * W), W) <= 1e-12);

    const GaussFamily gb = gauss_family(blay, lat, base);
    for (std::size_t i = 0; i < ext.gauss1.generators.size(); ++i) {
      const SpMat lhs = SpMat(materialize(ext.layout, ext.gauss1.generators[i].op) * W);
      const SpMat rhs = SpMat(W * materialize(blay, gb.generators[i].op));
      CHECK(max_abs_diff(lhs, rhs) <= 1e-12);
    }
  };

  const Lattice ladder = build_lattice(1, 2, Boundary::OBC_DANGLING);
  run(ladder, make_trivial_link(), p);
  run(ladder, make_zd_link(2), p);

  CouplingParams pq = p;
  pq.lambda_B = 0.45;
  run(build_lattice(2, 2, Boundary::OBC_DANGLING), make_trivial_link(), pq);

  const Z2Extension ex = extend_with_z2(ladder, make_trivial_link(), p, QubitBasis::XDiagonal);
  CHECK_THROWS_AS(build_W(ex, loop_basis(ladder)), std::invalid_argument);
}

TEST_CASE("the x-basis image is the uniform star-coset expansion") {
  const Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  const Z2Extension ext = extend_with_z2(lat, make_trivial_link(), ladder_params());
  const LoopBasis lb = loop_basis(lat);
  const DMat W = dense(build_W(ext, lb));
  const int nl = static_cast<int>(lat.links.size());
  const index_t bdim = 1 << lat.n_vertices;

  for (std::uint32_t m = 0; m < (1u << lat.n_vertices); ++m) {
    const auto coset = star_coset(lat, m);
    CHECK(coset.size() == (1u << (nl - lat.n_vertices)));
    const std::set<std::uint32_t> cs(coset.begin(), coset.end());
    const double expect = std::pow(2.0, 0.5 * (lat.n_vertices - nl));
    for (std::uint32_t s = 0; s < (1u << nl); ++s) {
      cplx amp = 0.0;
      for (std::uint32_t L : lb.configs)
        amp += (pc(s & L) % 2 ? -1.0 : 1.0) * W(m + static_cast<index_t>(L) * bdim, m);
      amp *= std::pow(2.0, -0.5 * nl);
      CHECK(std::abs(amp - (cs.count(s) ? expect : 0.0)) <= 1e-12);
    }
  }
}

TEST_CASE("pipeline states on the open ladder reproduce the free model") {
  const Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  const CouplingParams p = ladder_params();
  const PipelineStates ps = pipeline_transform_states(lat);

  REQUIRE(ps.states.size() == 4);
  CHECK(ps.gram_defect <= 1e-12);

  // with a trivial base the x-diagonal dressed model is literally the
  // auxiliary-link model the elimination machinery starts from
  const Z2Extension ex = extend_with_z2(lat, make_trivial_link(), p, QubitBasis::XDiagonal);
  const SpMat haux = build_H(ps.base, lat, *ps.alg, p);
  CHECK(max_abs_diff(ex.Hprime, haux) <= 1e-15);

  for (const auto& st : ps.states)
    CHECK(statistics_constraint_check(ps.ctx, densify(ps.ctx.reduced, st)));

  const OpSum ht = analytic_transformed_H_opsum(ps.ctx.reduced, lat, *ps.alg, p, {});
  const DMat block = sector_matrix(ps.ctx.reduced, ht, ps.states);
  const SpaceLayout mlay = build_layout(lat, make_trivial_link(), false, false);
  const SpMat hfree = build_H(mlay, lat, make_trivial_link(), p);
  CHECK(max_abs_diff(sorted_eigenvalues(block), sorted_eigenvalues(hfree)) <= 1e-9);
}

TEST_CASE("pipeline states on the square patch reproduce the free model") {
  const Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  const CouplingParams p = ladder_params();
  const PipelineStates ps = pipeline_transform_states(lat);

  REQUIRE(ps.states.size() == 16);
  CHECK(ps.gram_defect <= 1e-12);
  for (const auto& st : ps.states) CHECK(st.size() == 256);

  const OpSum ht = analytic_transformed_H_opsum(ps.ctx.reduced, lat, *ps.alg, p, {});
  const DMat block = sector_matrix(ps.ctx.reduced, ht, ps.states);
  const SpaceLayout mlay = build_layout(lat, make_trivial_link(), false, false);
  const SpMat hfree = build_H(mlay, lat, make_trivial_link(), p);
  CHECK(max_abs_diff(sorted_eigenvalues(block), sorted_eigenvalues(hfree)) <= 1e-9);
}

TEST_CASE("transformed flux laws hold on every face kind") {
  for (auto [rows, cols] : {std::pair{1, 2}, std::pair{2, 2}}) {
    const Lattice lat = build_lattice(rows, cols, Boundary::OBC_DANGLING);
    const PipelineStates ps = pipeline_transform_states(lat);
    const auto checks = transformed_gauss3_check(ps);
    REQUIRE(checks.size() == lat.faces.size());

    for (const FluxCheck& fc : checks) {
      CAPTURE(fc.face);
      CHECK(std::abs(std::abs(fc.string_phase) - 1.0) <= 1e-12);
      CHECK(fc.string_match <= 1e-12);
      CHECK(fc.plus_one_defect <= 1e-12);
      CHECK(fc.letters_eig_defect <= 1e-12);
      CHECK(fc.violating_defect <= 1e-12);
      CHECK(fc.support.unique);

      // every face link carries a letter, residual decorations are X
      const Face& f = lat.faces[fc.face];
      REQUIRE(fc.letters.size() >= f.links.size());
      for (std::size_t i = 0; i < f.links.size(); ++i) {
        CHECK(fc.letters[i].first == f.links[i]);
        CHECK(fc.letters[i].second != 'X');
      }
      for (std::size_t i = f.links.size(); i < fc.letters.size(); ++i)
        CHECK(fc.letters[i].second == 'X');
    }

    for (const FluxCheck& fc : checks) {
      if (fc.role != FaceRole::Bulk) continue;
      CHECK(std::abs(fc.string_phase - cplx(-1.0, 0.0)) <= 1e-12);
      const SignSupport plaq = discover_plaquette_support(lat, *ps.alg, fc.face);
      CHECK(fc.support.support == plaq.support);
      CHECK(std::abs(fc.support.phase - plaq.phase) <= 1e-12);
      int ny = 0;
      for (const auto& [l, ch] : fc.letters) ny += (ch == 'Y');
      CHECK(ny == 2);
    }
  }
}

TEST_CASE("winding sectors on the torus") {
  const Lattice lat = build_lattice(2, 2, Boundary::PBC);
  const PbcSectors sec = pbc_sectors(lat);

  for (const auto& c : sec.configs) CHECK(c.size() == 8);
  CHECK(sec.configs[0][0] == 0);
  CHECK(pc(sec.a_hor) == lat.cols);
  CHECK(pc(sec.a_vert) == lat.rows);

  std::array<std::set<std::uint32_t>, 4> sets;
  for (int k = 0; k < 4; ++k) sets[k].insert(sec.configs[k].begin(), sec.configs[k].end());
  for (std::uint32_t w : sec.configs[0]) {
    CHECK(sets[2].count(w ^ sec.a_hor) == 1);
    CHECK(sets[1].count(w ^ sec.a_vert) == 1);
    CHECK(sets[3].count(w ^ sec.a_hor ^ sec.a_vert) == 1);
  }

  CHECK_THROWS_AS(pbc_sectors(build_lattice(1, 2, Boundary::OBC_DANGLING)),
                  std::invalid_argument);

  const PbcSectorSpectra sp = pbc_sector_spectra(lat, ladder_params());
  CHECK(sp.gauss_defect <= 1e-12);
  REQUIRE(sp.base_even_eigs.size() == 8);
  for (const auto& e : sp.eigs) REQUIRE(e.size() == 8);
  CHECK(sp.trivial_match <= 1e-9);
  CAPTURE(sp.nontrivial_separation);
  CHECK(sp.nontrivial_separation > 0.05);
}
