#include "fermelim/z2embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace fermelim {

namespace {

std::uint32_t star_mask(const Lattice& lat, int vertex) {
  std::uint32_t m = 0;
  for (const Link& l : lat.links)
    if (l.from == vertex || l.to == vertex) m |= 1u << l.index;
  return m;
}

std::uint32_t face_mask(const Lattice& lat, const Face& f) {
  std::uint32_t m = 0;
  for (int l : f.links) m |= 1u << l;
  return m;
}

int parity(std::uint32_t x) { return __builtin_popcount(x) & 1; }

void require_small_links(const Lattice& lat, const char* who) {
  if (lat.links.size() >= 31)
    throw std::invalid_argument(std::string(who) + ": too many links for bitmask enumeration");
}

cplx map_overlap(const std::map<index_t, cplx>& a, const std::map<index_t, cplx>& b) {
  cplx v{0.0, 0.0};
  const auto& outer = (a.size() <= b.size()) ? a : b;
  const auto& inner = (a.size() <= b.size()) ? b : a;
  for (const auto& [idx, amp] : outer) {
    auto it = inner.find(idx);
    if (it == inner.end()) continue;
    v += (&outer == &a) ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return v;
}

// max_i |a_i - z b_i|
double map_diff_norm(const std::map<index_t, cplx>& a, const std::map<index_t, cplx>& b, cplx z) {
  double m = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      m = std::max(m, std::abs(ia->second));
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      m = std::max(m, std::abs(z * ib->second));
      ++ib;
    } else {
      m = std::max(m, std::abs(ia->second - z * ib->second));
      ++ia;
      ++ib;
    }
  }
  return m;
}

}  // namespace

DMat qubit_Z(QubitBasis basis) {
  return basis == QubitBasis::ZDiagonal ? mats::pauli_z() : mats::pauli_x();
}

DMat qubit_X(QubitBasis basis) {
  return basis == QubitBasis::ZDiagonal ? mats::pauli_x() : mats::pauli_z();
}

Z2Extension extend_with_z2(const Lattice& lat, const LinkAlgebra& base,
                           const CouplingParams& params, QubitBasis basis) {
  Z2Extension ext;
  ext.lat = lat;
  ext.base = base;
  ext.basis = basis;
  ext.params = params;
  ext.layout = build_layout(lat, base, false, true);
  require_within_cap(ext.layout.total_dim(), "z2-extended layout");

  HBuildOptions opts;
  opts.dress_hopping_with_qubit = true;
  opts.qubit_op = qubit_Z(basis);
  ext.Hprime = build_H(ext.layout, lat, base, params, opts);
  // a trivial base carries no gauge law of its own
  if (base.tag != GroupTag::TrivialLink) ext.gauss1 = gauss_family(ext.layout, lat, base);

  const DMat X = qubit_X(basis);
  const DMat Z = qubit_Z(basis);
  for (int v = 0; v < lat.n_vertices; ++v) {
    GaussGenerator g;
    g.vertex = v;
    g.label = "star" + std::to_string(v);
    g.unitary_form = true;
    g.target = cplx(1.0, 0.0);
    ProductTerm t;
    t.ops.push_back({ext.layout.at(psi_label(v)), mats::parity2(), false});
    for (const Link& l : lat.links)
      if (l.from == v || l.to == v) t.ops.push_back({ext.layout.at(qubit_label(l)), X, false});
    g.op = {t};
    ext.gauss2.push_back(std::move(g));
  }
  for (const Face& f : lat.faces) {
    GaussGenerator g;
    g.vertex = f.index;
    g.label = "flux" + std::to_string(f.index);
    g.unitary_form = true;
    g.target = cplx(1.0, 0.0);
    ProductTerm t;
    for (int l : f.links) t.ops.push_back({ext.layout.at(qubit_label(lat.links[l])), Z, false});
    g.op = {t};
    ext.gauss3.push_back(std::move(g));
  }
  return ext;
}

double extension_invariant_violation(const Z2Extension& ext) {
  const SpMat id = sp_identity(ext.layout.total_dim());
  std::vector<SpMat> gens;
  double v = 0.0;
  for (const auto* fam : {&ext.gauss2, &ext.gauss3}) {
    for (const GaussGenerator& g : *fam) {
      SpMat m = materialize(ext.layout, g.op);
      v = std::max(v, hermiticity_defect(m));
      v = std::max(v, max_abs_diff(SpMat(m * m), id));
      gens.push_back(std::move(m));
    }
  }
  for (const GaussGenerator& g : ext.gauss1.generators)
    gens.push_back(materialize(ext.layout, g.op));
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j)
      v = std::max(v, commutator_norm(gens[i], gens[j]));
  for (const SpMat& g : gens) v = std::max(v, commutator_norm(ext.Hprime, g));
  return v;
}

LoopBasis loop_basis(const Lattice& lat) {
  if (lat.boundary != Boundary::OBC_DANGLING)
    throw std::invalid_argument("loop_basis: open lattices only");
  require_small_links(lat, "loop_basis");
  if (lat.n_vertices >= 31) throw std::invalid_argument("loop_basis: too many vertices");

  std::vector<std::uint32_t> stars;
  for (int v = 0; v < lat.n_vertices; ++v) stars.push_back(star_mask(lat, v));

  LoopBasis lb;
  std::set<std::uint32_t> seen;
  for (std::uint32_t t = 0; t < (1u << lat.n_vertices); ++t) {
    std::uint32_t cfg = 0;
    for (int v = 0; v < lat.n_vertices; ++v)
      if (t & (1u << v)) cfg ^= stars[v];
    if (!seen.insert(cfg).second)
      throw std::runtime_error("loop_basis: star products are not independent");
    lb.configs.push_back(cfg);
    lb.generators.push_back(t);
  }
  for (std::uint32_t cfg : lb.configs)
    for (const Face& f : lat.faces)
      if (parity(cfg & face_mask(lat, f)))
        throw std::runtime_error("loop_basis: a star product breaks a flux law");
  return lb;
}

SpMat build_W(const Z2Extension& ext, const LoopBasis& loops) {
  if (ext.basis != QubitBasis::ZDiagonal)
    throw std::invalid_argument("build_W: the loop construction needs the Z-diagonal storage");
  const SpaceLayout base = build_layout(ext.lat, ext.base, false, false);
  const index_t bdim = base.total_dim();
  std::vector<int> mpos;
  for (int v = 0; v < ext.lat.n_vertices; ++v) mpos.push_back(base.at(psi_label(v)));

  const double norm = std::pow(2.0, -0.5 * ext.lat.n_vertices);
  std::vector<Triplet> ts;
  ts.reserve(static_cast<std::size_t>(bdim) * loops.configs.size());
  for (index_t b = 0; b < bdim; ++b) {
    for (std::size_t i = 0; i < loops.configs.size(); ++i) {
      int n = 0;
      for (int v = 0; v < ext.lat.n_vertices; ++v)
        if (loops.generators[i] & (1u << v)) n += base.digit(b, mpos[v]);
      const double ph = (n % 2 == 0) ? norm : -norm;
      ts.emplace_back(b + static_cast<index_t>(loops.configs[i]) * bdim, b, cplx(ph, 0.0));
    }
  }
  return from_triplets(ext.layout.total_dim(), bdim, ts);
}

PbcSectors pbc_sectors(const Lattice& lat) {
  if (lat.boundary != Boundary::PBC)
    throw std::invalid_argument("pbc_sectors: periodic lattices only");
  require_small_links(lat, "pbc_sectors");

  PbcSectors ps;
  for (const Link& l : lat.links) {
    const int fr = lat.vertex_row(l.from), fc = lat.vertex_col(l.from);
    if (!l.horizontal && fr == 0) ps.a_hor |= 1u << l.index;
    if (!l.horizontal && fc == 0) ps.label_h |= 1u << l.index;
    if (l.horizontal && fc == 0) ps.a_vert |= 1u << l.index;
    if (l.horizontal && fr == 0) ps.label_v |= 1u << l.index;
  }
  for (const Face& f : lat.faces) {
    const std::uint32_t fm = face_mask(lat, f);
    if (parity(ps.a_hor & fm) || parity(ps.a_vert & fm))
      throw std::runtime_error("pbc_sectors: a winding string breaks a flux law");
  }
  if (parity(ps.a_hor & ps.label_h) != 1 || parity(ps.a_hor & ps.label_v) != 0 ||
      parity(ps.a_vert & ps.label_v) != 1 || parity(ps.a_vert & ps.label_h) != 0)
    throw std::runtime_error("pbc_sectors: winding labels are not toggled one at a time");

  for (std::uint32_t s = 0; s < (1u << lat.links.size()); ++s) {
    bool flat = true;
    for (const Face& f : lat.faces)
      if (parity(s & face_mask(lat, f))) {
        flat = false;
        break;
      }
    if (!flat) continue;
    const int nh = parity(s & ps.label_h), nv = parity(s & ps.label_v);
    ps.configs[nh * 2 + nv].push_back(s);
  }
  for (const auto& c : ps.configs)
    if (c.size() != ps.configs[0].size() || c.empty())
      throw std::runtime_error("pbc_sectors: sectors are not balanced");
  return ps;
}

std::vector<std::uint32_t> star_coset(const Lattice& lat, std::uint32_t matter_mask) {
  require_small_links(lat, "star_coset");
  std::vector<std::uint32_t> stars;
  for (int v = 0; v < lat.n_vertices; ++v) stars.push_back(star_mask(lat, v));
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < (1u << lat.links.size()); ++s) {
    bool ok = true;
    for (int v = 0; v < lat.n_vertices && ok; ++v)
      ok = parity(s & stars[v]) == static_cast<int>((matter_mask >> v) & 1u);
    if (ok) out.push_back(s);
  }
  if (out.empty()) throw std::runtime_error("star_coset: no qubit configuration matches");
  return out;
}

std::map<index_t, cplx> apply_opsum_sparse(const SpaceLayout& lay, const OpSum& sum,
                                           const std::map<index_t, cplx>& state) {
  std::map<index_t, cplx> out;
  for (const auto& [idx, amp] : state)
    for (const auto& [jdx, coeff] : apply_to_basis(lay, sum, idx)) out[jdx] += coeff * amp;
  return out;
}

DMat sector_matrix(const SpaceLayout& lay, const OpSum& sum,
                   const std::vector<std::map<index_t, cplx>>& states) {
  const int n = static_cast<int>(states.size());
  DMat b = DMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const auto img = apply_opsum_sparse(lay, sum, states[j]);
    for (int i = 0; i < n; ++i) b(i, j) = map_overlap(states[i], img);
  }
  return b;
}

PbcSectorSpectra pbc_sector_spectra(const Lattice& lat, const CouplingParams& params) {
  const LinkAlgebra triv = make_trivial_link();
  const Z2Extension ext = extend_with_z2(lat, triv, params, QubitBasis::ZDiagonal);
  const PbcSectors sec = pbc_sectors(lat);
  const int nv = lat.n_vertices;
  if (nv >= 31) throw std::invalid_argument("pbc_sector_spectra: too many vertices");

  // star-group orbit of the empty configuration, with one generating vertex
  // subset recorded per element (the global product of all stars is trivial,
  // so each element is reached twice; the two records differ by the full
  // vertex set, which is why only even fermion-parity states embed cleanly)
  std::vector<std::uint32_t> stars;
  for (int v = 0; v < nv; ++v) stars.push_back(star_mask(lat, v));
  std::map<std::uint32_t, std::uint32_t> orbit;
  for (std::uint32_t t = 0; t < (1u << nv); ++t) {
    std::uint32_t cfg = 0;
    for (int v = 0; v < nv; ++v)
      if (t & (1u << v)) cfg ^= stars[v];
    orbit.emplace(cfg, t);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (sec.configs[k].size() != orbit.size())
      throw std::runtime_error("winding sector size does not match the star orbit");
    std::set<std::uint32_t> expect;
    for (const auto& [cfg, t] : orbit) expect.insert(sec.configs[k][0] ^ cfg);
    for (std::uint32_t s : sec.configs[k])
      if (!expect.count(s)) throw std::runtime_error("winding sector is not a star-orbit coset");
  }

  const SpaceLayout mlay = build_layout(lat, triv, false, false);
  const index_t bdim = mlay.total_dim();
  std::vector<std::uint32_t> even_masks;
  for (std::uint32_t m = 0; m < (1u << nv); ++m)
    if (parity(m) == 0) even_masks.push_back(m);

  const double nrm = 1.0 / std::sqrt(static_cast<double>(orbit.size()));
  auto sector_state = [&](std::uint32_t psi, std::uint32_t w) {
    std::map<index_t, cplx> s;
    for (const auto& [cfg, t] : orbit) {
      int n = 0;
      for (int v = 0; v < nv; ++v)
        if (t & (1u << v)) n += (psi >> v) & 1u;
      const double ph = (n % 2 == 0) ? nrm : -nrm;
      s[static_cast<index_t>(psi) + static_cast<index_t>(w ^ cfg) * bdim] += cplx(ph, 0.0);
    }
    return s;
  };

  PbcSectorSpectra r;
  HBuildOptions opts;
  opts.dress_hopping_with_qubit = true;
  opts.qubit_op = qubit_Z(ext.basis);
  const OpSum hprime = build_H_opsum(ext.layout, lat, triv, params, opts);
  for (int k = 0; k < 4; ++k) {
    std::vector<std::map<index_t, cplx>> states;
    for (std::uint32_t psi : even_masks) states.push_back(sector_state(psi, sec.configs[k][0]));
    for (const auto& st : states) {
      for (const auto* fam : {&ext.gauss2, &ext.gauss3})
        for (const GaussGenerator& g : *fam)
          r.gauss_defect = std::max(
              r.gauss_defect, map_diff_norm(apply_opsum_sparse(ext.layout, g.op, st), st, 1.0));
    }
    r.eigs[k] = sorted_eigenvalues(DMat(sector_matrix(ext.layout, hprime, states)));
  }

  const SpMat hb = build_H(mlay, lat, triv, params);
  const DMat hbd = dense(hb);
  const int ne = static_cast<int>(even_masks.size());
  DMat blk(ne, ne);
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < ne; ++j)
      blk(i, j) = hbd(even_masks[i], even_masks[j]);
  r.base_even_eigs = sorted_eigenvalues(blk);

  r.trivial_match = max_abs_diff(r.eigs[0], r.base_even_eigs);
  r.nontrivial_separation = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 4; ++k)
    r.nontrivial_separation =
        std::min(r.nontrivial_separation, max_abs_diff(r.eigs[k], r.base_even_eigs));
  return r;
}

std::map<index_t, cplx> pipeline_embedded_state(const PipelineStates& ps,
                                                std::uint32_t matter_mask,
                                                std::uint32_t twist_mask) {
  const Lattice& lat = *ps.lat;
  const auto coset = star_coset(lat, matter_mask);
  const double nrm = 1.0 / std::sqrt(static_cast<double>(coset.size()));
  const index_t mdim = static_cast<index_t>(1) << lat.n_vertices;
  std::map<index_t, cplx> out;
  for (std::uint32_t s : coset) {
    const index_t b = static_cast<index_t>(matter_mask) + static_cast<index_t>(s) * mdim;
    const TransformedState t = transformed_basis_state(ps.ctx, ps.base, b);
    const double tw = parity(s & twist_mask) ? -nrm : nrm;
    out[t.reduced_idx] += tw * t.phase;
  }
  return out;
}

PipelineStates pipeline_transform_states(const Lattice& lat) {
  PipelineStates ps;
  ps.lat = std::make_shared<Lattice>(lat);
  ps.alg = std::make_shared<LinkAlgebra>(make_z2_aux_link());
  ps.ctx = make_elimination_context(*ps.lat, *ps.alg);
  ps.base = build_layout(*ps.lat, *ps.alg, false, false);
  if (lat.n_vertices >= 31)
    throw std::invalid_argument("pipeline_transform_states: too many vertices");

  for (std::uint32_t m = 0; m < (1u << lat.n_vertices); ++m) ps.matter_masks.push_back(m);
  for (std::uint32_t m : ps.matter_masks) ps.states.push_back(pipeline_embedded_state(ps, m));

  const int n = static_cast<int>(ps.states.size());
  ps.gram = DMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      ps.gram(i, j) = map_overlap(ps.states[i], ps.states[j]);
  ps.gram_defect = (ps.gram - DMat::Identity(n, n)).cwiseAbs().maxCoeff();
  return ps;
}

std::vector<FluxCheck> transformed_gauss3_check(const PipelineStates& ps) {
  const Lattice& lat = *ps.lat;
  const LinkAlgebra& alg = *ps.alg;
  const DMat Y = DMat(cplx(0.0, 1.0) * alg.P * alg.U);

  std::vector<FluxCheck> out;
  for (const Face& f : lat.faces) {
    FluxCheck fc;
    fc.face = f.index;
    fc.role = f.role;
    fc.support = discover_flux_support(lat, alg, f.index);

    const std::set<int> sset(fc.support.support.begin(), fc.support.support.end());
    for (int l : f.links)
      fc.letters.emplace_back(l, (lat.links[l].dangling == (sset.count(l) > 0)) ? 'Z' : 'Y');
    for (int l : fc.support.support)
      if (!std::count(f.links.begin(), f.links.end(), l)) fc.letters.emplace_back(l, 'X');

    auto letter_mat = [&](char ch) -> DMat {
      if (ch == 'Z') return alg.U;
      if (ch == 'X') return alg.P;
      return Y;
    };

    // re-stream the flux law and compare it against the letter string
    const MiniSpec spec = mini_spec(lat, f.links, {}, {}, flux_spectator_links(lat, f.index));
    auto term = [&](const SpaceLayout& lay) -> OpSum {
      ProductTerm t;
      for (int l : f.links) t.ops.push_back({lay.at(gauge_label(lat.links[l])), alg.U, false});
      return {t};
    };
    const StreamResult sr = stream_transform(lat, alg, spec, term, ContractMode::PhysicalSlice);
    ProductTerm ls;
    for (const auto& [l, ch] : fc.letters)
      ls.ops.push_back({sr.layout.at(gauge_label(lat.links[l])), letter_mat(ch), false});
    const SpMat lmat = materialize(sr.layout, OpSum{ls});

    double best = 0.0;
    index_t br = 0, bc = 0;
    for (int k = 0; k < lmat.outerSize(); ++k)
      for (SpMat::InnerIterator it(lmat, k); it; ++it)
        if (std::abs(it.value()) > best) {
          best = std::abs(it.value());
          br = it.row();
          bc = it.col();
        }
    if (best < 0.5) throw std::runtime_error("flux letter string vanished");
    fc.string_phase = sr.op.coeff(br, bc) / lmat.coeff(br, bc);
    fc.string_match = max_abs_diff(sr.op, SpMat(fc.string_phase * lmat));

    // the same two forms on the reduced layout, applied to the embedded states
    ProductTerm rt;
    rt.coeff = fc.support.phase;
    for (int l : fc.support.support)
      rt.ops.push_back({ps.ctx.reduced.at(gauge_label(lat.links[l])), alg.P, false});
    for (int l : f.links)
      rt.ops.push_back({ps.ctx.reduced.at(gauge_label(lat.links[l])),
                        lat.links[l].dangling ? DMat(cplx(0.0, 1.0) * alg.P * alg.U) : alg.U,
                        false});
    const OpSum red{rt};
    ProductTerm lr;
    for (const auto& [l, ch] : fc.letters)
      lr.ops.push_back({ps.ctx.reduced.at(gauge_label(lat.links[l])), letter_mat(ch), false});
    const OpSum lred{lr};

    const cplx inv_phase = cplx(1.0, 0.0) / fc.string_phase;
    for (const auto& st : ps.states) {
      fc.plus_one_defect = std::max(
          fc.plus_one_defect, map_diff_norm(apply_opsum_sparse(ps.ctx.reduced, red, st), st, 1.0));
      fc.letters_eig_defect =
          std::max(fc.letters_eig_defect,
                   map_diff_norm(apply_opsum_sparse(ps.ctx.reduced, lred, st), st, inv_phase));
    }

    // a character twist on one face link flips the flux eigenvalue
    const auto tv = pipeline_embedded_state(ps, 0u, 1u << f.links[0]);
    fc.violating_defect = map_diff_norm(apply_opsum_sparse(ps.ctx.reduced, red, tv), tv, -1.0);

    out.push_back(std::move(fc));
  }
  return out;
}

}
