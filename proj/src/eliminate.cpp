#include "fermelim/eliminate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace fermelim {

DMat proj_even(const LinkAlgebra& alg) {
  return (DMat::Identity(alg.local_dim, alg.local_dim) + alg.P) / 2.0;
}

DMat proj_odd(const LinkAlgebra& alg) {
  return (DMat::Identity(alg.local_dim, alg.local_dim) - alg.P) / 2.0;
}

namespace {

int slot_link(const Lattice& lat, int vertex, int slot) {
  const Slots s = slots(lat, vertex);
  switch (slot) {
    case 1: return s.h;
    case 2: return s.v;
    case 3: return s.hp;
    case 4: return s.vp;
    default: throw std::out_of_range("slot must be 1..4");
  }
}

DMat zeta_matrix(int slot) {
  return slot <= 2 ? mats::majorana_first() : mats::majorana_second();
}

bool p_odd_digit(const LinkAlgebra& alg, int digit) { return alg.P(digit, digit).real() < 0.0; }

}  // namespace

OpSum v_opsum(const SpaceLayout& lay, const Lattice& lat, const LinkAlgebra& alg, int vertex,
              int slot) {
  const Link& l = lat.links[slot_link(lat, vertex, slot)];
  const int gpos = lay.at(gauge_label(l));
  const int cpos = lay.at(chi_label(vertex));
  const int fpos = lay.at(f_label(l));
  OpSum v;
  v.push_back({cplx(1.0, 0.0), {FactorOp{gpos, proj_even(alg), false}}});
  v.push_back({cplx(0.0, 1.0),
               {FactorOp{cpos, mats::majorana_first(), true},
                FactorOp{fpos, zeta_matrix(slot), true}, FactorOp{gpos, proj_odd(alg), false}}});
  return v;
}

OpSum eta_opsum(const SpaceLayout& lay, int vertex) {
  const int cpos = lay.at(chi_label(vertex));
  const int ppos = lay.at(psi_label(vertex));
  OpSum s;
  s.push_back({cplx(1.0, 0.0),
               {FactorOp{cpos, mats::majorana_first(), true},
                FactorOp{ppos, mats::sigma_minus(), true}}});
  return s;
}

OpSum eta_dag_opsum(const SpaceLayout& lay, int vertex) { return adjoint(eta_opsum(lay, vertex)); }

std::vector<int> xi_links(const Lattice& lat, const Link& link) {
  if (link.dangling) throw std::invalid_argument("xi_links: dangling link has no hopping");
  const Slots sx = slots(lat, link.from);
  std::vector<int> raw;
  if (link.horizontal) {
    const Slots sy = slots(lat, link.to);
    raw = {sx.v, sx.hp, sx.vp, sy.vp};
  } else {
    raw = {sx.hp, sx.vp};
  }
  std::sort(raw.begin(), raw.end());
  std::vector<int> out;  // keep odd multiplicities only (P^2 = 1)
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j] == raw[i]) ++j;
    if ((j - i) % 2 == 1) out.push_back(raw[i]);
    i = j;
  }
  return out;
}

OpSum analytic_transformed_link_opsum(const SpaceLayout& lay, const Lattice& lat,
                                      const LinkAlgebra& alg, int link) {
  const Link& l = lat.links[link];
  if (l.dangling) throw std::invalid_argument("analytic_transformed_link: dangling link");
  ProductTerm t;
  t.coeff = cplx(0.0, 1.0);
  for (int s : xi_links(lat, l))
    t.ops.push_back({lay.at(gauge_label(lat.links[s])), alg.P, false});
  t.ops.push_back({lay.at(f_label(l)), -mats::parity2(), false});  // 1 - 2 f f^dag
  t.ops.push_back({lay.at(chi_label(l.from)), mats::majorana_first(), true});
  t.ops.push_back({lay.at(gauge_label(l)), alg.U, false});
  t.ops.push_back({lay.at(chi_label(l.to)), mats::majorana_first(), true});
  return {t};
}

OpSum analytic_transformed_hopping_opsum(const SpaceLayout& lay, const Lattice& lat,
                                         const LinkAlgebra& alg, int link, double epsilon,
                                         const HBuildOptions& opts) {
  const Link& l = lat.links[link];
  if (l.dangling) throw std::invalid_argument("analytic_transformed_hopping: dangling link");
  ProductTerm t;
  t.coeff = cplx(0.0, -1.0) * epsilon;
  for (int s : xi_links(lat, l))
    t.ops.push_back({lay.at(gauge_label(lat.links[s])), alg.P, false});
  t.ops.push_back({lay.at(psi_label(l.from)), mats::sigma_plus(), true});
  t.ops.push_back({lay.at(chi_label(l.from)), mats::majorana_first(), true});
  if (opts.dress_hopping_with_qubit)
    t.ops.push_back({lay.at(qubit_label(l)), opts.qubit_op, false});
  t.ops.push_back({lay.at(gauge_label(l)), alg.U, false});
  t.ops.push_back({lay.at(chi_label(l.to)), mats::majorana_first(), true});
  t.ops.push_back({lay.at(psi_label(l.to)), mats::sigma_minus(), true});
  return plus_adjoint({t});
}

OpSum analytic_transformed_plaquette_opsum(const SpaceLayout& lay, const Lattice& lat,
                                           const LinkAlgebra& alg, const PlaquetteSign& sign,
                                           double lambda_B) {
  const Face& f = lat.faces[sign.face];
  if (f.role != FaceRole::Bulk) throw std::invalid_argument("plaquette sign on non-bulk face");
  ProductTerm t;
  t.coeff = lambda_B * sign.phase;
  for (int s : sign.support) t.ops.push_back({lay.at(gauge_label(lat.links[s])), alg.P, false});
  t.ops.push_back({lay.at(gauge_label(lat.links[f.side[0]])), alg.U, false});
  t.ops.push_back({lay.at(gauge_label(lat.links[f.side[1]])), alg.U, false});
  t.ops.push_back({lay.at(gauge_label(lat.links[f.side[2]])), alg.U.adjoint(), false});
  t.ops.push_back({lay.at(gauge_label(lat.links[f.side[3]])), alg.U.adjoint(), false});
  return plus_adjoint({t});
}

OpSum analytic_transformed_H_opsum(const SpaceLayout& lay, const Lattice& lat,
                                   const LinkAlgebra& alg, const CouplingParams& params,
                                   const std::vector<PlaquetteSign>& plaquette_signs,
                                   const HBuildOptions& opts) {
  OpSum H;
  auto append = [&H](const OpSum& s) { H.insert(H.end(), s.begin(), s.end()); };
  if (params.M != 0.0)
    for (int v = 0; v < lat.n_vertices; ++v) append(mass_term(lay, lat, v, params.M));
  if (params.lambda_E != 0.0 && alg.H_elec.size() > 0 && alg.H_elec.norm() > 0.0)
    for (const Link& l : lat.links) append(electric_term(lay, alg, l, params.lambda_E));
  if (params.lambda_B != 0.0)
    for (const PlaquetteSign& ps : plaquette_signs)
      append(analytic_transformed_plaquette_opsum(lay, lat, alg, ps, params.lambda_B));
  if (params.epsilon != 0.0)
    for (const Link& l : lat.links) {
      if (l.dangling) continue;
      append(analytic_transformed_hopping_opsum(lay, lat, alg, l.index, params.epsilon, opts));
    }
  return H;
}

EliminationContext make_elimination_context(const Lattice& lat, const LinkAlgebra& alg) {
  EliminationContext ctx;
  ctx.lat = &lat;
  ctx.alg = &alg;
  ctx.full = build_layout(lat, alg, true, false);
  ctx.reduced = ctx.full;
  for (int k = ctx.reduced.num_factors() - 1; k >= 0; --k)
    if (ctx.reduced.factor(k).role == FactorRole::AuxF) ctx.reduced.erase_factor(k);
  int first = -1, last = -1;
  for (int k = 0; k < ctx.full.num_factors(); ++k) {
    if (ctx.full.factor(k).role != FactorRole::AuxF) continue;
    if (first < 0) first = k;
    if (last >= 0 && k != last + 1) throw std::logic_error("f factors not contiguous");
    last = k;
  }
  ctx.f_stride = ctx.full.stride(first);
  ctx.f_block = 1;
  for (int k = first; k <= last; ++k) ctx.f_block *= ctx.full.factor(k).dim;
  ctx.v_by_vertex.resize(lat.n_vertices);
  for (int v = 0; v < lat.n_vertices; ++v)
    for (int slot = 1; slot <= 4; ++slot)
      ctx.v_by_vertex[v].push_back(v_opsum(ctx.full, lat, alg, v, slot));
  return ctx;
}

AuxVacua aux_vacua(const EliminationContext& ctx) {
  AuxVacua out;
  for (int k = 0; k < ctx.full.num_factors(); ++k) {
    const Factor& f = ctx.full.factor(k);
    if (f.role == FactorRole::AuxChi) out.chi_space.add_factor(f);
    if (f.role == FactorRole::AuxF) out.f_space.add_factor(f);
  }
  out.omega_I = Eigen::VectorXcd::Zero(out.chi_space.total_dim());
  out.omega_I(0) = 1.0;
  out.omega_II = Eigen::VectorXcd::Zero(out.f_space.total_dim());
  out.omega_II(0) = 1.0;
  return out;
}

SpMat local_unitary(const EliminationContext& ctx, int vertex) {
  require_within_cap(ctx.full.total_dim(), "local unitary");
  SpMat u = materialize(ctx.full, ctx.v_by_vertex[vertex][0]);
  for (int slot = 2; slot <= 4; ++slot)
    u = (materialize(ctx.full, ctx.v_by_vertex[vertex][slot - 1]) * u).eval();
  return u;
}

SpMat full_unitary(const EliminationContext& ctx) {
  require_within_cap(ctx.full.total_dim(), "full unitary");
  SpMat u = local_unitary(ctx, 0);
  for (int v = 1; v < ctx.lat->n_vertices; ++v) u = (local_unitary(ctx, v) * u).eval();
  return u;
}

std::pair<index_t, cplx> walk_state(const EliminationContext& ctx, index_t idx) {
  cplx phase(1.0, 0.0);
  for (int v = 0; v < ctx.lat->n_vertices; ++v) {
    for (int slot = 1; slot <= 4; ++slot) {
      auto [j, p] = walk_signed(ctx.full, ctx.v_by_vertex[v][slot - 1], idx);
      idx = j;
      phase *= p;
    }
  }
  return {idx, phase};
}

WalkTables full_walk_tables(const EliminationContext& ctx) {
  require_within_cap(ctx.full.total_dim(), "walk tables");
  const index_t dim = ctx.full.total_dim();
  WalkTables t;
  t.pi.resize(dim);
  t.phase.resize(dim);
  for (index_t i = 0; i < dim; ++i) {
    auto [j, p] = walk_state(ctx, i);
    t.pi[i] = j;
    t.phase[i] = p;
  }
  return t;
}

SpMat conjugate_by_walk(const WalkTables& t, const SpMat& a) {
  std::vector<Triplet> trips;
  trips.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      trips.emplace_back(t.pi[it.row()], t.pi[it.col()],
                         t.phase[it.row()] * it.value() * std::conj(t.phase[it.col()]));
  return from_triplets(a.rows(), a.cols(), trips);
}

index_t embed_reduced(const EliminationContext& ctx, index_t reduced_idx) {
  const index_t lo = reduced_idx % ctx.f_stride;
  const index_t hi = reduced_idx / ctx.f_stride;
  return lo + hi * ctx.f_stride * ctx.f_block;
}

bool f_digits_zero(const EliminationContext& ctx, index_t full_idx) {
  return (full_idx / ctx.f_stride) % ctx.f_block == 0;
}

index_t reduce_index(const EliminationContext& ctx, index_t full_idx) {
  const index_t lo = full_idx % ctx.f_stride;
  const index_t hi = full_idx / (ctx.f_stride * ctx.f_block);
  return lo + hi * ctx.f_stride;
}

SpMat transform_project(const EliminationContext& ctx, const SpMat& a, const WalkTables& t) {
  std::vector<Triplet> trips;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      const index_t ur = t.pi[it.row()], uc = t.pi[it.col()];
      if (!f_digits_zero(ctx, ur) || !f_digits_zero(ctx, uc)) continue;
      trips.emplace_back(reduce_index(ctx, ur), reduce_index(ctx, uc),
                         t.phase[it.row()] * it.value() * std::conj(t.phase[it.col()]));
    }
  }
  const index_t dim = ctx.reduced.total_dim();
  return from_triplets(dim, dim, trips);
}

SpMat transform_project(const EliminationContext& ctx, const SpMat& a) {
  return transform_project(ctx, a, full_walk_tables(ctx));
}

SpMat eta(const EliminationContext& ctx, int vertex, int color) {
  if (color != 0) throw std::out_of_range("single-color matter: color must be 0");
  require_within_cap(ctx.full.total_dim(), "eta");
  return materialize(ctx.full, eta_opsum(ctx.full, vertex));
}

SpMat analytic_transformed_link(const EliminationContext& ctx, int link) {
  require_within_cap(ctx.full.total_dim(), "analytic transformed link");
  return materialize(ctx.full, analytic_transformed_link_opsum(ctx.full, *ctx.lat, *ctx.alg, link));
}

SpMat analytic_transformed_H(const EliminationContext& ctx, const CouplingParams& params,
                             const std::vector<PlaquetteSign>& plaquette_signs) {
  require_within_cap(ctx.reduced.total_dim(), "analytic transformed H");
  return materialize(ctx.reduced, analytic_transformed_H_opsum(ctx.reduced, *ctx.lat, *ctx.alg,
                                                               params, plaquette_signs));
}

SpMat analytic_transformed_H(const EliminationContext& ctx, const CouplingParams& params) {
  std::vector<PlaquetteSign> signs;
  if (params.lambda_B != 0.0) {
    for (const Face& f : ctx.lat->faces) {
      if (f.role != FaceRole::Bulk) continue;
      SignSupport s = discover_plaquette_support(*ctx.lat, *ctx.alg, f.index);
      signs.push_back({f.index, s.support, s.phase});
    }
  }
  return analytic_transformed_H(ctx, params, signs);
}

index_t embed_base_state(const SpaceLayout& base, const EliminationContext& ctx, index_t idx) {
  index_t out = 0;
  for (int k = 0; k < base.num_factors(); ++k) {
    const int pos = ctx.full.at(base.factor(k).label);
    out += static_cast<index_t>(base.digit(idx, k)) * ctx.full.stride(pos);
  }
  return out;
}

TransformedState transformed_basis_state(const EliminationContext& ctx, const SpaceLayout& base,
                                         index_t base_idx) {
  auto [u, ph] = walk_state(ctx, embed_base_state(base, ctx, base_idx));
  for (const Link& l : ctx.lat->links) {
    const int fpos = ctx.full.at(f_label(l));
    int expected = 0;
    if (l.dangling) {
      const int g = ctx.full.digit(u, ctx.full.at(gauge_label(l)));
      expected = p_odd_digit(*ctx.alg, g) ? 1 : 0;
    }
    if (ctx.full.digit(u, fpos) != expected)
      throw std::logic_error("transformed physical state leaves the expected f slice");
  }
  return {reduce_index(ctx, u), ph};
}

bool statistics_constraint_check(const EliminationContext& ctx, const Eigen::VectorXcd& state,
                                 double* max_violation, double tol) {
  double viol = 0.0;
  for (int v = 0; v < ctx.lat->n_vertices; ++v) {
    const int ppos = ctx.reduced.at(psi_label(v));
    const int cpos = ctx.reduced.at(chi_label(v));
    for (index_t i = 0; i < state.size(); ++i) {
      if (state(i) == cplx(0.0, 0.0)) continue;
      const int par = (ctx.reduced.digit(i, ppos) + ctx.reduced.digit(i, cpos)) % 2;
      if (par != 0) viol = std::max(viol, 2.0 * std::abs(state(i)));
    }
  }
  if (max_violation) *max_violation = viol;
  return viol <= tol;
}

double statistics_constraint_violation(const EliminationContext& ctx,
                                       const std::vector<TransformedState>& states) {
  double viol = 0.0;
  for (const TransformedState& s : states) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(ctx.reduced.total_dim());
    v(s.reduced_idx) = s.phase;
    double m = 0.0;
    statistics_constraint_check(ctx, v, &m);
    viol = std::max(viol, m);
  }
  return viol;
}

// --- support-restricted streaming ------------------------------------------

MiniSpec mini_spec(const Lattice& lat, const std::vector<int>& touched_links,
                   const std::vector<int>& matter_vertices,
                   const std::vector<int>& keep_f_links,
                   const std::vector<int>& spectator_links) {
  MiniSpec spec;
  std::set<int> act(matter_vertices.begin(), matter_vertices.end());
  for (int l : touched_links) {
    if (lat.links[l].from >= 0) act.insert(lat.links[l].from);
    if (lat.links[l].to >= 0) act.insert(lat.links[l].to);
  }
  spec.active_vertices.assign(act.begin(), act.end());
  std::set<int> mv(matter_vertices.begin(), matter_vertices.end());
  spec.matter_vertices.assign(mv.begin(), mv.end());
  std::set<int> ls(touched_links.begin(), touched_links.end());
  for (int v : spec.active_vertices) {
    const Slots s = slots(lat, v);
    ls.insert({s.h, s.v, s.hp, s.vp});
  }
  std::set<int> sp;
  for (int l : spectator_links) {
    if (ls.count(l)) continue;  // already streamed and folded the normal way
    if (!lat.links[l].dangling)
      throw std::invalid_argument("spectator links must be dangling");
    sp.insert(l);
    ls.insert(l);
  }
  spec.links.assign(ls.begin(), ls.end());
  spec.spectator_links.assign(sp.begin(), sp.end());
  std::set<int> kf(keep_f_links.begin(), keep_f_links.end());
  spec.keep_f_links.assign(kf.begin(), kf.end());
  return spec;
}

SpaceLayout build_mini_layout(const Lattice& lat, const LinkAlgebra& alg, const MiniSpec& spec) {
  SpaceLayout lay;
  for (int v : spec.matter_vertices) lay.add_factor(matter_factor(psi_label(v)));
  for (int v : spec.active_vertices) lay.add_factor(chi_factor(chi_label(v)));
  for (int l : spec.links) lay.add_factor(link_factor(gauge_label(lat.links[l]), alg.local_dim));
  return lay;
}

namespace {

struct Entry {
  index_t r, c;
  cplx v;
};

struct Stream {
  const Lattice* lat;
  const LinkAlgebra* alg;
  SpaceLayout lay;
  std::vector<Entry> entries;
  std::vector<int> added;   // link indices of f factors, in order of first use
  std::vector<int> folded;  // slice-contracted links: their f occupation equals
                            // the E parity still visible at the gauge factor, so
                            // strings crossing the removed position survive as P

  int f_position(int link) const { return lay.at(f_label(lat->links[link])); }

  int seq(int link) const {
    return static_cast<int>(std::find(added.begin(), added.end(), link) - added.begin());
  }

  // append the f factor for `link` at the end, an exact identity extension.
  // The stream keeps its own fermionic ordering (order of first use); the
  // mismatch with the canonical link-ascending order is repaid by a diagonal
  // sign when the stream closes.
  void add_f(int link) {
    const index_t dim = lay.total_dim();
    lay.add_factor(auxf_factor(f_label(lat->links[link])));
    require_within_cap(lay.total_dim(), "streamed neighborhood");
    const std::size_t n = entries.size();
    entries.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i)
      entries.push_back({entries[i].r + dim, entries[i].c + dim, entries[i].v});
    added.push_back(link);
  }

  void conjugate(int vertex, int slot) {
    OpSum v = v_opsum(lay, *lat, *alg, vertex, slot);
    const int k = slot_link(*lat, vertex, slot);
    for (ProductTerm& t : v) {
      bool has_zeta = false;
      for (const FactorOp& fo : t.ops)
        if (fo.odd && lay.factor(fo.factor).role == FactorRole::AuxF) has_zeta = true;
      if (!has_zeta) continue;
      for (int m : folded)
        if (seq(m) < seq(k)) t.ops.push_back({lay.at(gauge_label(lat->links[m])), alg->P, false});
    }
    const index_t dim = lay.total_dim();
    std::vector<index_t> pi(dim);
    std::vector<cplx> ph(dim);
    for (index_t i = 0; i < dim; ++i) {
      auto [j, p] = walk_signed(lay, v, i);
      pi[i] = j;
      ph[i] = p;
    }
    for (Entry& e : entries) {
      const cplx val = ph[e.r] * e.v * std::conj(ph[e.c]);
      e.r = pi[e.r];
      e.c = pi[e.c];
      e.v = val;
    }
  }

  void contract(int link, ContractMode mode) {
    const int fpos = f_position(link);
    const Link& l = lat->links[link];
    const bool sliced = mode == ContractMode::PhysicalSlice && l.dangling;
    const int gpos = sliced ? lay.at(gauge_label(l)) : -1;
    auto expected = [&](index_t idx) {
      if (!sliced) return 0;
      return p_odd_digit(*alg, lay.digit(idx, gpos)) ? 1 : 0;
    };
    std::vector<Entry> kept;
    kept.reserve(entries.size() / 2);
    for (const Entry& e : entries) {
      if (lay.digit(e.r, fpos) != expected(e.r)) continue;
      if (lay.digit(e.c, fpos) != expected(e.c)) continue;
      kept.push_back({lay.erase_digit(e.r, fpos), lay.erase_digit(e.c, fpos), e.v});
    }
    entries.swap(kept);
    lay.erase_factor(fpos);
    if (sliced) folded.push_back(link);
  }

  // relabelling sign between the stream's mode order and the canonical one:
  // one factor of -1 per inverted pair of occupied modes. Vacuum-contracted
  // modes are empty; sliced ones are occupied on odd link parity; kept ones
  // carry their digit.
  void reorder_signs(const std::set<int>& keep) {
    struct Mode {
      int link;
      bool is_kept;
    };
    std::vector<Mode> modes;
    for (int l : added) {
      const bool is_kept = keep.count(l) > 0;
      if (is_kept || std::count(folded.begin(), folded.end(), l)) modes.push_back({l, is_kept});
    }
    std::vector<std::pair<Mode, Mode>> inverted;
    for (std::size_t i = 0; i < modes.size(); ++i)
      for (std::size_t j = i + 1; j < modes.size(); ++j)
        if (modes[i].link > modes[j].link) inverted.push_back({modes[i], modes[j]});
    if (inverted.empty()) return;
    auto occupied = [&](const Mode& m, index_t idx) {
      if (m.is_kept) return lay.digit(idx, f_position(m.link)) == 1;
      return p_odd_digit(*alg, lay.digit(idx, lay.at(gauge_label(lat->links[m.link]))));
    };
    auto side_sign = [&](index_t idx) {
      int s = 1;
      for (const auto& [a, b] : inverted)
        if (occupied(a, idx) && occupied(b, idx)) s = -s;
      return s;
    };
    for (Entry& e : entries) e.v *= double(side_sign(e.r) * side_sign(e.c));
  }
};

}  // namespace

StreamResult stream_transform(const Lattice& lat, const LinkAlgebra& alg, const MiniSpec& spec,
                              const std::function<OpSum(const SpaceLayout&)>& term_builder,
                              ContractMode mode) {
  if (mode == ContractMode::Vacuum && !spec.spectator_links.empty())
    throw std::invalid_argument("spectator links require the physical-slice contraction");
  Stream st{&lat, &alg, build_mini_layout(lat, alg, spec), {}, {}, {}};
  const std::set<int> keep(spec.keep_f_links.begin(), spec.keep_f_links.end());
  const std::set<int> active(spec.active_vertices.begin(), spec.active_vertices.end());
  for (int l : spec.spectator_links) {
    st.added.push_back(l);
    st.folded.push_back(l);
  }
  for (int l : spec.keep_f_links) {
    st.lay.add_factor(auxf_factor(f_label(lat.links[l])));
    st.added.push_back(l);
  }
  require_within_cap(st.lay.total_dim(), "streamed neighborhood");
  {
    const SpMat a = materialize(st.lay, term_builder(st.lay));
    for (int k = 0; k < a.outerSize(); ++k)
      for (SpMat::InnerIterator it(a, k); it; ++it)
        st.entries.push_back({it.row(), it.col(), it.value()});
  }
  std::map<int, int> remaining;
  for (int l : spec.links) {
    int cnt = 0;
    if (active.count(lat.links[l].from)) ++cnt;
    if (active.count(lat.links[l].to)) ++cnt;
    remaining[l] = cnt;
  }
  for (int v : spec.active_vertices) {
    for (int slot = 1; slot <= 4; ++slot) {
      const int l = slot_link(lat, v, slot);
      if (std::find(st.added.begin(), st.added.end(), l) == st.added.end()) st.add_f(l);
      st.conjugate(v, slot);
      if (--remaining[l] == 0 && !keep.count(l)) st.contract(l, mode);
    }
  }
  st.reorder_signs(keep);
  std::vector<Triplet> trips;
  trips.reserve(st.entries.size());
  for (const Entry& e : st.entries) trips.emplace_back(e.r, e.c, e.v);
  const index_t dim = st.lay.total_dim();
  return {st.lay, from_triplets(dim, dim, trips)};
}

// --- sign-factor discovery ---------------------------------------------------

namespace {

SignSupport discover_impl(const Lattice& lat, const LinkAlgebra& alg, const std::string& tag,
                          const std::vector<int>& touched, const std::vector<int>& matter,
                          const std::function<OpSum(const SpaceLayout&)>& term_builder,
                          const std::function<OpSum(const SpaceLayout&)>& core_builder,
                          ContractMode mode = ContractMode::Vacuum,
                          const std::vector<int>& spectators = {}) {
  const MiniSpec spec = mini_spec(lat, touched, matter, {}, spectators);
  const StreamResult sr = stream_transform(lat, alg, spec, term_builder, mode);
  const SpMat core = materialize(sr.layout, core_builder(sr.layout));

  const int ncand = static_cast<int>(spec.links.size());
  std::vector<int> gpos(ncand);
  for (int i = 0; i < ncand; ++i) gpos[i] = sr.layout.at(gauge_label(lat.links[spec.links[i]]));
  auto row_mask = [&](index_t r) {
    unsigned mask = 0;
    for (int i = 0; i < ncand; ++i)
      if (p_odd_digit(alg, sr.layout.digit(r, gpos[i]))) mask |= 1u << i;
    return mask;
  };

  const double floor = 1e-8;
  std::unordered_map<index_t, cplx> streamed;
  const index_t dim = sr.layout.total_dim();
  for (int k = 0; k < sr.op.outerSize(); ++k)
    for (SpMat::InnerIterator it(sr.op, k); it; ++it)
      if (std::abs(it.value()) > floor) streamed[it.row() * dim + it.col()] = it.value();

  std::unordered_map<unsigned, cplx> ratio;
  std::size_t matched = 0;
  for (int k = 0; k < core.outerSize(); ++k) {
    for (SpMat::InnerIterator it(core, k); it; ++it) {
      if (std::abs(it.value()) <= floor) continue;
      auto f = streamed.find(it.row() * dim + it.col());
      if (f == streamed.end())
        throw std::runtime_error(tag + ": transformed operator vanishes on the core support");
      ++matched;
      const cplx rho = f->second / it.value();
      const unsigned mask = row_mask(it.row());
      auto [pos, fresh] = ratio.try_emplace(mask, rho);
      if (!fresh && std::abs(pos->second - rho) > 1e-8)
        throw std::runtime_error(tag + ": ratio is not a function of link parities");
    }
  }
  if (matched != streamed.size())
    throw std::runtime_error(tag + ": transformed operator has support outside the core form");

  const cplx phases[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<std::pair<unsigned, cplx>> valid;
  for (unsigned s = 0; s < (1u << ncand); ++s) {
    for (const cplx& p : phases) {
      bool ok = true;
      for (const auto& [mask, rho] : ratio) {
        int bits = 0;
        for (unsigned m = mask & s; m != 0; m >>= 1) bits += static_cast<int>(m & 1);
        const cplx pred = (bits % 2 == 0) ? p : -p;
        if (std::abs(pred - rho) > 1e-8) {
          ok = false;
          break;
        }
      }
      if (ok) valid.emplace_back(s, p);
    }
  }
  if (valid.empty())
    throw std::runtime_error(tag + ": no parity subset reproduces the transformed operator");
  if (valid.size() > 1)
    throw std::runtime_error(tag + ": parity subset is not unique on this neighborhood");

  SignSupport out;
  out.observable = tag;
  out.phase = valid[0].second;
  out.unique = true;
  out.minimal = true;
  for (int i = 0; i < ncand; ++i) {
    if (valid[0].first & (1u << i)) {
      out.support.push_back(spec.links[i]);
      out.labels.push_back(lat.links[spec.links[i]].label);
    }
  }
  return out;
}

}  // namespace

SignSupport discover_link_support(const Lattice& lat, const LinkAlgebra& alg, int link) {
  const Link& l = lat.links[link];
  if (l.dangling) throw std::invalid_argument("discover_link_support: dangling link");
  auto term = [&lat, &alg, link](const SpaceLayout& lay) -> OpSum {
    return {{cplx(1.0, 0.0), {FactorOp{lay.at(gauge_label(lat.links[link])), alg.U, false}}}};
  };
  auto core = [&lat, &alg, &l, link](const SpaceLayout& lay) -> OpSum {
    ProductTerm t;
    t.ops.push_back({lay.at(chi_label(l.from)), mats::majorana_first(), true});
    t.ops.push_back({lay.at(gauge_label(lat.links[link])), alg.U, false});
    t.ops.push_back({lay.at(chi_label(l.to)), mats::majorana_first(), true});
    return {t};
  };
  return discover_impl(lat, alg, l.horizontal ? "xi_h" : "xi_v", {link}, {}, term, core);
}

SignSupport discover_plaquette_support(const Lattice& lat, const LinkAlgebra& alg, int face) {
  const Face& f = lat.faces[face];
  if (f.role != FaceRole::Bulk)
    throw std::invalid_argument("discover_plaquette_support: bulk faces only");
  auto term = [&lat, &alg, &f](const SpaceLayout& lay) -> OpSum {
    return plaquette_term(lay, lat, alg, f, 1.0);
  };
  return discover_impl(lat, alg, "xi_p", f.links, {}, term, term);
}

SignSupport discover_meson_support(const Lattice& lat, const LinkAlgebra& alg,
                                   const std::vector<int>& path_links) {
  if (path_links.size() < 1) throw std::invalid_argument("meson path is empty");
  std::vector<int> verts;  // straight horizontal chain x - r1 - ... - rL - y
  for (std::size_t i = 0; i < path_links.size(); ++i) {
    const Link& l = lat.links[path_links[i]];
    if (!l.horizontal || l.dangling)
      throw std::invalid_argument("meson paths are straight internal horizontal lines");
    if (i == 0)
      verts.push_back(l.from);
    else if (l.from != verts.back())
      throw std::invalid_argument("meson path links are not contiguous");
    verts.push_back(l.to);
  }
  const int x = verts.front(), y = verts.back();
  auto term = [&lat, &alg, &path_links, x, y](const SpaceLayout& lay) -> OpSum {
    ProductTerm t;
    t.ops.push_back({lay.at(psi_label(x)), mats::sigma_plus(), true});
    for (int l : path_links) t.ops.push_back({lay.at(gauge_label(lat.links[l])), alg.U, false});
    t.ops.push_back({lay.at(psi_label(y)), mats::sigma_minus(), true});
    return {t};
  };
  auto core = [&lat, &alg, &path_links, x, y](const SpaceLayout& lay) -> OpSum {
    ProductTerm t;
    t.ops.push_back({lay.at(psi_label(x)), mats::sigma_plus(), true});
    t.ops.push_back({lay.at(chi_label(x)), mats::majorana_first(), true});
    for (int l : path_links) t.ops.push_back({lay.at(gauge_label(lat.links[l])), alg.U, false});
    t.ops.push_back({lay.at(chi_label(y)), mats::majorana_first(), true});
    t.ops.push_back({lay.at(psi_label(y)), mats::sigma_minus(), true});
    return {t};
  };
  const std::string tag = "xi_M(" + std::to_string(path_links.size()) + ")";
  return discover_impl(lat, alg, tag, path_links, {x, y}, term, core);
}

std::vector<int> flux_spectator_links(const Lattice& lat, int face) {
  const Face& f = lat.faces[face];
  int lo = -1, hi = -1;
  for (int l : f.links) {
    if (!lat.links[l].dangling) continue;
    if (lo < 0 || l < lo) lo = l;
    if (l > hi) hi = l;
  }
  if (lo < 0) return {};
  std::set<int> ring;
  for (int l : f.links) {
    const Link& lk = lat.links[l];
    for (int v : {lk.from, lk.to}) {
      if (v < 0) continue;
      const Slots s = slots(lat, v);
      ring.insert({s.h, s.v, s.hp, s.vp});
    }
  }
  std::vector<int> out;
  for (int m = lo + 1; m < hi; ++m)
    if (lat.links[m].dangling && !ring.count(m)) out.push_back(m);
  return out;
}

SignSupport discover_flux_support(const Lattice& lat, const LinkAlgebra& alg, int face) {
  const Face& f = lat.faces[face];
  auto term = [&lat, &alg, &f](const SpaceLayout& lay) -> OpSum {
    ProductTerm t;
    for (int l : f.links) t.ops.push_back({lay.at(gauge_label(lat.links[l])), alg.U, false});
    return {t};
  };
  // a dangling link's slice contraction fuses its f Majorana into the link
  // operator: the surviving single-site factor is i P U
  auto core = [&lat, &alg, &f](const SpaceLayout& lay) -> OpSum {
    ProductTerm t;
    for (int l : f.links) {
      const DMat m =
          lat.links[l].dangling ? DMat(cplx(0.0, 1.0) * alg.P * alg.U) : alg.U;
      t.ops.push_back({lay.at(gauge_label(lat.links[l])), m, false});
    }
    return {t};
  };
  return discover_impl(lat, alg, "xi_p", f.links, {}, term, core, ContractMode::PhysicalSlice,
                       flux_spectator_links(lat, face));
}

}
