#include "fermelim/linkalg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fermelim {

namespace {

constexpr double pi = std::numbers::pi;

DMat exp_i_pi_diag(const DMat& e) {
  const auto n = e.rows();
  DMat out = DMat::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) out(m, m) = std::polar(1.0, pi * e(m, m).real());
  return out;
}

}  // namespace

LinkAlgebra make_zd_link(int d) {
  if (d < 2 || d % 2 != 0) throw std::invalid_argument("make_zd_link: d must be even and >= 2");
  LinkAlgebra a;
  a.tag = GroupTag::Zd;
  a.name = "Z" + std::to_string(d);
  a.param = d;
  a.local_dim = d;
  a.E = DMat::Zero(d, d);
  a.U = DMat::Zero(d, d);
  a.X = DMat::Zero(d, d);
  a.P = DMat::Zero(d, d);
  a.H_elec = DMat::Zero(d, d);
  const cplx omega = std::polar(1.0, 2.0 * pi / d);
  for (int m = 0; m < d; ++m) {
    a.E(m, m) = double(m);
    a.U((m + 1) % d, m) = 1.0;            // U = Z, cyclic raising in the X eigenbasis
    a.X(m, m) = std::pow(omega, m);       // XZX^dag = omega Z
    a.P(m, m) = double(a.parity_sign(m)); // X^{d/2}
    a.H_elec(m, m) = 2.0 - 2.0 * std::cos(2.0 * pi * m / d);
  }
  return a;
}

LinkAlgebra make_u1_truncated_link(int ell) {
  if (ell < 1) throw std::invalid_argument("make_u1_truncated_link: ell must be >= 1");
  LinkAlgebra a;
  a.tag = GroupTag::U1Truncated;
  a.name = "U1trunc" + std::to_string(ell);
  a.param = ell;
  const int dim = 2 * ell + 1;
  a.local_dim = dim;
  a.E = DMat::Zero(dim, dim);
  a.U = DMat::Zero(dim, dim);
  a.P = DMat::Zero(dim, dim);
  a.H_elec = DMat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const int m = k - ell;
    a.E(k, k) = double(m);
    a.P(k, k) = double(a.parity_sign(m));
    a.H_elec(k, k) = double(m) * double(m);
    if (k + 1 < dim) a.U(k + 1, k) = 1.0;  // <m+1|U|m> = 1, annihilates the top state
  }
  return a;
}

LinkAlgebra make_trivial_link() {
  LinkAlgebra a;
  a.tag = GroupTag::TrivialLink;
  a.name = "trivial";
  a.local_dim = 1;
  a.E = DMat::Zero(1, 1);
  a.U = DMat::Identity(1, 1);
  a.P = DMat::Identity(1, 1);
  a.H_elec = DMat::Zero(1, 1);
  return a;
}

LinkAlgebra make_z2_aux_link() {
  LinkAlgebra a = make_zd_link(2);
  a.name = "z2aux";
  a.H_elec.setZero();
  return a;
}

RelationReport check_link_relations(const LinkAlgebra& alg) {
  RelationReport r;
  auto norm = [](const DMat& m) { return m.cwiseAbs().maxCoeff(); };
  r.entries.emplace_back("pu_plus_up", norm(alg.P * alg.U + alg.U * alg.P));
  r.entries.emplace_back("p_e_commutator", norm(alg.P * alg.E - alg.E * alg.P));
  r.entries.emplace_back("helec_p_commutator", norm(alg.H_elec * alg.P - alg.P * alg.H_elec));
  r.entries.emplace_back("p_vs_exp_parity", norm(alg.P - exp_i_pi_diag(alg.E)));
  const DMat id = DMat::Identity(alg.local_dim, alg.local_dim);
  if (alg.tag == GroupTag::Zd) {
    const int d = alg.param;
    const cplx omega = std::polar(1.0, 2.0 * pi / d);
    DMat upow = id, xpow = id;
    for (int k = 0; k < d; ++k) { upow = alg.U * upow; xpow = alg.X * xpow; }
    r.entries.emplace_back("u_power_d_minus_id", norm(upow - id));
    r.entries.emplace_back("x_power_d_minus_id", norm(xpow - id));
    r.entries.emplace_back("clock_shift_relation",
                           norm(alg.X * alg.U * alg.X.adjoint() - omega * alg.U));
    r.entries.emplace_back("u_unitarity", norm(alg.U.adjoint() * alg.U - id));
    r.entries.emplace_back("helec_vs_clock", norm(alg.H_elec + alg.X + alg.X.adjoint() - 2.0 * id));
  }
  if (alg.tag == GroupTag::U1Truncated) {
    r.entries.emplace_back("raising_relation", norm(alg.E * alg.U - alg.U * alg.E - alg.U));
    r.entries.emplace_back("helec_vs_e_squared", norm(alg.H_elec - alg.E * alg.E));
  }
  return r;
}

GroupCertificate p_certificate(CertGroup group, int N) {
  if (N < 1) throw std::invalid_argument("p_certificate: N must be positive");
  GroupCertificate c;
  c.group = group;
  c.N = N;
  c.matter_rep = std::polar(1.0, pi);  // the central element acts on one fermion as exp(i pi)
  const DMat id = DMat::Identity(N, N);
  switch (group) {
    case CertGroup::UN: {
      c.exists = true;
      c.witness = std::polar(1.0, pi) * id;
      c.violation = (c.witness + id).cwiseAbs().maxCoeff();
      break;
    }
    case CertGroup::SUN: {
      if (N < 2) throw std::invalid_argument("p_certificate: SU(N) needs N >= 2");
      DMat t0 = DMat::Zero(N, N);
      const double norm = std::sqrt(2.0 * N * (N - 1.0));
      for (int j = 0; j < N - 1; ++j) t0(j, j) = 1.0 / norm;
      t0(N - 1, N - 1) = -(N - 1.0) / norm;
      c.s_used = std::sqrt(2.0 * N * (N - 1.0));
      c.s_alt = std::sqrt(2.0 * N * (2.0 * N - 1.0));
      c.witness = exp_i_pi_diag(c.s_used * t0);
      c.violation = (c.witness + id).cwiseAbs().maxCoeff();
      c.exists = (N % 2 == 0);
      break;
    }
    case CertGroup::Zd: {
      if (N % 2 != 0) {
        c.exists = false;
        c.violation = 2.0;  // no half period: the conjugation identity is unattainable
        break;
      }
      LinkAlgebra a = make_zd_link(N);
      DMat w = DMat::Identity(N, N);
      for (int k = 0; k < N / 2; ++k) w = a.X * w;
      c.witness = w;
      c.violation = (w * a.U * w.adjoint() + a.U).cwiseAbs().maxCoeff();
      c.exists = true;
      break;
    }
  }
  if (c.exists && c.violation > 1e-12) c.exists = false;
  return c;
}

}
