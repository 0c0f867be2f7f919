#include <doctest.h>

#include "fermelim/linkalg.hpp"

using namespace fermelim;

TEST_CASE("Zd relations hold to 1e-12 for d = 2, 4, 6") {
  for (int d : {2, 4, 6}) {
    LinkAlgebra a = make_zd_link(d);
    CHECK(a.local_dim == d);
    RelationReport r = check_link_relations(a);
    CHECK(r.max_violation() <= 1e-12);
  }
}

TEST_CASE("Z2 specifics: P equals X and the clock relation flips sign") {
  LinkAlgebra a = make_zd_link(2);
  CHECK((a.P - a.X).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.X * a.U * a.X.adjoint() + a.U).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Z4: P = X^2 and PZP = -Z entrywise") {
  LinkAlgebra a = make_zd_link(4);
  CHECK((a.P - a.X * a.X).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.P * a.U * a.P + a.U).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("make_zd_link rejects odd d") {
  CHECK_THROWS(make_zd_link(3));
  CHECK_THROWS(make_zd_link(1));
}

TEST_CASE("truncated U(1) relations") {
  for (int ell : {1, 2, 3}) {
    LinkAlgebra a = make_u1_truncated_link(ell);
    CHECK(a.local_dim == 2 * ell + 1);
    RelationReport r = check_link_relations(a);
    CHECK(r.max_violation() <= 1e-12);
    // the raising relation [E,U] = U holds exactly, including the top row
    CHECK((a.E * a.U - a.U * a.E - a.U).cwiseAbs().maxCoeff() == 0.0);
  }
  LinkAlgebra a = make_u1_truncated_link(1);
  int nnz = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(a.U(i, j)) > 0) ++nnz;
  CHECK(nnz == 2);
}

TEST_CASE("corrupted algebra is detected") {
  LinkAlgebra a = make_zd_link(2);
  a.P = DMat::Identity(2, 2);
  RelationReport r = check_link_relations(a);
  double pu = 0;
  for (auto& [k, v] : r.entries)
    if (k == "pu_plus_up") pu = v;
  CHECK(pu == 2.0);
}

TEST_CASE("SU(N) certificates: parity rule for N = 2..8") {
  for (int n = 2; n <= 8; ++n) {
    GroupCertificate c = p_certificate(CertGroup::SUN, n);
    CHECK(c.exists == (n % 2 == 0));
    if (c.exists) CHECK(c.violation <= 1e-12);
    CHECK(c.s_used == doctest::Approx(std::sqrt(2.0 * n * (n - 1.0))));
    CHECK(c.s_alt == doctest::Approx(std::sqrt(2.0 * n * (2.0 * n - 1.0))));
  }
}

TEST_CASE("SU(4) exponent scalar") {
  GroupCertificate c = p_certificate(CertGroup::SUN, 4);
  CHECK(c.exists);
  CHECK(c.s_used == doctest::Approx(std::sqrt(24.0)));
}

TEST_CASE("U(N) certificate always exists") {
  for (int n : {1, 2, 3, 5}) {
    GroupCertificate c = p_certificate(CertGroup::UN, n);
    CHECK(c.exists);
    CHECK(c.violation <= 1e-12);
  }
}

TEST_CASE("Zd certificate: conjugation witness for even d, absent for odd") {
  for (int d : {2, 4, 6}) {
    GroupCertificate c = p_certificate(CertGroup::Zd, d);
    CHECK(c.exists);
    CHECK(c.violation <= 1e-12);
    CHECK(std::abs(c.matter_rep - cplx(-1.0, 0.0)) <= 1e-12);
  }
  for (int d : {3, 5}) CHECK_FALSE(p_certificate(CertGroup::Zd, d).exists);
}

TEST_CASE("trivial and z2-aux links") {
  LinkAlgebra t = make_trivial_link();
  CHECK(t.local_dim == 1);
  CHECK(t.U(0, 0) == cplx(1.0, 0.0));
  LinkAlgebra q = make_z2_aux_link();
  CHECK(q.local_dim == 2);
  CHECK(q.H_elec.cwiseAbs().maxCoeff() == 0.0);
  CHECK((q.P * q.U + q.U * q.P).cwiseAbs().maxCoeff() == 0.0);
}
