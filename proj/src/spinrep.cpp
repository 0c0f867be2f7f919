#include "fermelim/spinrep.hpp"

#include <cmath>
#include <stdexcept>

#include "fermelim/fock.hpp"
#include "fermelim/hamiltonian.hpp"

namespace fermelim {

namespace {

DMat kron(const DMat& a, const DMat& b) {
  DMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// operator acting as `op` on `slot` (1-based) of an n_slots spin chain,
// slot 1 least significant
DMat slot_op(int n_slots, int slot, const DMat& op) {
  DMat out = DMat::Identity(1, 1);
  for (int s = n_slots; s >= 1; --s)
    out = kron(out, s == slot ? op : DMat(DMat::Identity(2, 2)));
  return out;
}

// Sigma_m = sigma^z_N ... sigma^z_m on an n_slots chain (empty product if m > N)
DMat sigma_string(int n_slots, int N, int m) {
  DMat out = DMat::Identity(1 << n_slots, 1 << n_slots);
  for (int k = m; k <= N; ++k) out = out * slot_op(n_slots, k, mats::pauli_z());
  return out;
}

double offblock_norm(const DMat& a) {
  const Eigen::Index h = a.rows() / 2;
  return std::max(a.block(0, h, h, h).cwiseAbs().maxCoeff(),
                  a.block(h, 0, h, h).cwiseAbs().maxCoeff());
}

}  // namespace

OnSiteSpinRep build_spin_rep(int N) {
  if (N < 1) throw std::invalid_argument("build_spin_rep: N must be positive");
  const int ns = N + 1;
  require_within_cap(index_t(1) << ns, "on-site spin representation");
  OnSiteSpinRep rep;
  rep.N = N;
  for (int m = 1; m <= N; ++m)
    rep.jw_psi.push_back(cplx(0, 1) * slot_op(ns, m, mats::sigma_minus()) *
                         sigma_string(ns, N, m) * sigma_string(ns, N, 1));
  rep.jw_c = slot_op(ns, ns, mats::pauli_x()) * sigma_string(ns, N, 1);
  // exp(i pi sigma^x_{N+1} sigma^z_m / 4) factor by factor: each generator
  // squares to one, so the exponential closes after the first turn
  rep.wtilde = DMat::Identity(1 << ns, 1 << ns);
  for (int m = 1; m <= N; ++m) {
    const DMat g = slot_op(ns, ns, mats::pauli_x()) * slot_op(ns, m, mats::pauli_z());
    rep.wtilde = rep.wtilde * ((DMat::Identity(1 << ns, 1 << ns) + cplx(0, 1) * g) / std::sqrt(2.0));
  }
  const Eigen::Index half = 1 << N;
  for (int m = 0; m < N; ++m) {
    const DMat full = rep.wtilde * (rep.jw_c * rep.jw_psi[m]) * rep.wtilde.adjoint();
    const DMat top = full.block(0, 0, half, half);
    if (offblock_norm(full) > 1e-12 ||
        (full.block(half, half, half, half) - top).cwiseAbs().maxCoeff() > 1e-12)
      throw std::runtime_error("rotated hard-core image does not factorize off the last slot");
    rep.eta_full.push_back(full);
    rep.eta_spin.push_back(top);
  }
  return rep;
}

DMat eta_string_form(int N, int m) {
  if (m < 1 || m > N) throw std::out_of_range("eta_string_form: m out of range");
  return sigma_string(N, N, m + 1) * slot_op(N, m, mats::sigma_minus());
}

DMat parity_rotation(int N) { return sigma_string(N, N, 1); }

double spin_rep_algebra_violation(const OnSiteSpinRep& rep) {
  double worst = 0.0;
  const Eigen::Index d = 1 << rep.N;
  for (int m = 0; m < rep.N; ++m) {
    for (int n = 0; n < rep.N; ++n) {
      const DMat& em = rep.eta_spin[m];
      const DMat& en = rep.eta_spin[n];
      worst = std::max(worst, DMat(em * en + en * em).cwiseAbs().maxCoeff());
      DMat mixed = em * en.adjoint() + en.adjoint() * em;
      if (m == n) mixed -= DMat::Identity(d, d);
      worst = std::max(worst, mixed.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

bool verify_vacuum_map(const OnSiteSpinRep& rep) {
  const Eigen::Index half = 1 << rep.N;
  // image of the all-modes-empty state: only the working-spin all-zeros
  // component may appear, in either state of the discarded slot
  const Eigen::VectorXcd img = rep.wtilde.col(0);
  double stray = 0.0;
  for (Eigen::Index i = 0; i < img.size(); ++i)
    if (i != 0 && i != half) stray = std::max(stray, std::abs(img(i)));
  if (stray > 1e-12) return false;
  if (std::abs(img.norm() - 1.0) > 1e-12) return false;
  // eta^dag subsets generate an orthonormal family spanning the image sector
  DMat states(half, half);
  for (Eigen::Index s = 0; s < half; ++s) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(half);
    v(0) = 1.0;
    for (int m = 0; m < rep.N; ++m)
      if ((s >> m) & 1) v = rep.eta_spin[m].adjoint() * v;
    states.col(s) = v;
  }
  const DMat gram = states.adjoint() * states;
  return (gram - DMat::Identity(half, half)).cwiseAbs().maxCoeff() <= 1e-12;
}

SpaceLayout spin_model_layout(const Lattice& lat, const LinkAlgebra& alg, int N) {
  SpaceLayout lay;
  for (int v = 0; v < lat.n_vertices; ++v)
    lay.add_factor(Factor{psi_label(v), FactorKind::Qubit, FactorRole::Matter, 1 << N, false});
  for (const Link& l : lat.links) lay.add_factor(link_factor(gauge_label(l), alg.local_dim));
  return lay;
}

SpMat spin_substituted_H(const Lattice& lat, const LinkAlgebra& alg, const CouplingParams& params,
                         const std::vector<PlaquetteSign>& plaquette_signs,
                         const OnSiteSpinRep& rep) {
  const SpaceLayout lay = spin_model_layout(lat, alg, rep.N);
  require_within_cap(lay.total_dim(), "spin-substituted model");
  const DMat eta = rep.eta_spin[0];
  const DMat occ = eta.adjoint() * eta;
  OpSum H;
  if (params.M != 0.0) {
    for (int v = 0; v < lat.n_vertices; ++v) {
      ProductTerm t;
      t.coeff = double(lat.staggered_sign(v)) * params.M;
      t.ops.push_back({lay.at(psi_label(v)), occ, false});
      H.push_back(t);
    }
  }
  if (params.lambda_E != 0.0 && alg.H_elec.size() > 0 && alg.H_elec.norm() > 0.0)
    for (const Link& l : lat.links) {
      OpSum e = electric_term(lay, alg, l, params.lambda_E);
      H.insert(H.end(), e.begin(), e.end());
    }
  if (params.lambda_B != 0.0) {
    for (const PlaquetteSign& ps : plaquette_signs) {
      const Face& f = lat.faces[ps.face];
      if (f.role != FaceRole::Bulk) throw std::invalid_argument("plaquette sign on non-bulk face");
      ProductTerm t;
      t.coeff = params.lambda_B * ps.phase;
      for (int s : ps.support) t.ops.push_back({lay.at(gauge_label(lat.links[s])), alg.P, false});
      t.ops.push_back({lay.at(gauge_label(lat.links[f.side[0]])), alg.U, false});
      t.ops.push_back({lay.at(gauge_label(lat.links[f.side[1]])), alg.U, false});
      t.ops.push_back({lay.at(gauge_label(lat.links[f.side[2]])), alg.U.adjoint(), false});
      t.ops.push_back({lay.at(gauge_label(lat.links[f.side[3]])), alg.U.adjoint(), false});
      OpSum p = plus_adjoint({t});
      H.insert(H.end(), p.begin(), p.end());
    }
  }
  if (params.epsilon != 0.0) {
    for (const Link& l : lat.links) {
      if (l.dangling) continue;
      ProductTerm t;
      t.coeff = cplx(0.0, -1.0) * params.epsilon;
      for (int s : xi_links(lat, l))
        t.ops.push_back({lay.at(gauge_label(lat.links[s])), alg.P, false});
      t.ops.push_back({lay.at(psi_label(l.from)), DMat(eta.adjoint()), false});
      t.ops.push_back({lay.at(gauge_label(l)), alg.U, false});
      t.ops.push_back({lay.at(psi_label(l.to)), eta, false});
      OpSum p = plus_adjoint({t});
      H.insert(H.end(), p.begin(), p.end());
    }
  }
  return materialize(lay, H);
}

}
