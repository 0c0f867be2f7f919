#include <doctest.h>

#include <map>

#include "fermelim/lattice.hpp"

using namespace fermelim;

TEST_CASE("1x2 OBC counts") {
  Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  CHECK(lat.n_vertices == 2);
  CHECK(lat.links.size() == 7);
  int h = 0, hd = 0, v = 0, vd = 0;
  for (const Link& l : lat.links) {
    (l.horizontal ? h : v)++;
    if (l.dangling) (l.horizontal ? hd : vd)++;
  }
  CHECK(h == 3);
  CHECK(hd == 2);
  CHECK(v == 4);
  CHECK(vd == 4);
  CHECK(lat.faces.size() == 6);
  CHECK(lat.bulk_faces().empty());
  CHECK(lat.internal_links().size() == 1);
}

TEST_CASE("2x2 OBC counts and the bulk plaquette") {
  Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  CHECK(lat.n_vertices == 4);
  CHECK(lat.links.size() == 12);
  CHECK(lat.internal_links().size() == 4);
  CHECK(lat.bulk_faces().size() == 1);
  const Face& p = lat.faces[lat.bulk_faces()[0]];
  // a = bottom joins (0,0)-(0,1); b = right joins (0,1)-(1,1);
  // c = top joins (1,0)-(1,1); d = left joins (0,0)-(1,0)
  const Link& a = lat.links[p.side[0]];
  const Link& b = lat.links[p.side[1]];
  const Link& c = lat.links[p.side[2]];
  const Link& d = lat.links[p.side[3]];
  CHECK(a.horizontal);
  CHECK(a.from == lat.vertex_index(0, 0));
  CHECK(a.to == lat.vertex_index(0, 1));
  CHECK_FALSE(b.horizontal);
  CHECK(b.from == lat.vertex_index(0, 1));
  CHECK(b.to == lat.vertex_index(1, 1));
  CHECK(c.horizontal);
  CHECK(c.from == lat.vertex_index(1, 0));
  CHECK(c.to == lat.vertex_index(1, 1));
  CHECK_FALSE(d.horizontal);
  CHECK(d.from == lat.vertex_index(0, 0));
  CHECK(d.to == lat.vertex_index(1, 0));
}

TEST_CASE("2x2 PBC counts") {
  Lattice lat = build_lattice(2, 2, Boundary::PBC);
  CHECK(lat.n_vertices == 4);
  CHECK(lat.links.size() == 8);
  CHECK(lat.faces.size() == 4);
  CHECK(lat.internal_links().size() == 8);
  for (const Face& f : lat.faces) CHECK(f.role == FaceRole::Bulk);
}

TEST_CASE("every vertex has degree 4; incidence counts links correctly") {
  for (auto [r, c, b] : {std::tuple{1, 2, Boundary::OBC_DANGLING},
                         std::tuple{2, 2, Boundary::OBC_DANGLING},
                         std::tuple{3, 4, Boundary::OBC_DANGLING},
                         std::tuple{2, 3, Boundary::PBC}}) {
    Lattice lat = build_lattice(r, c, b);
    std::map<int, int> touch;
    for (int v = 0; v < lat.n_vertices; ++v) {
      Slots s = slots(lat, v);
      CHECK(s.h >= 0);
      CHECK(s.v >= 0);
      CHECK(s.hp >= 0);
      CHECK(s.vp >= 0);
      CHECK(s.h != s.hp);
      CHECK(s.v != s.vp);
      for (int l : {s.h, s.v, s.hp, s.vp}) touch[l]++;
    }
    for (const Link& l : lat.links) CHECK(touch[l.index] == (l.dangling ? 1 : 2));
  }
}

TEST_CASE("slot geometry matches link endpoints") {
  for (auto [r, c, b] : {std::tuple{2, 3, Boundary::OBC_DANGLING}, std::tuple{3, 2, Boundary::PBC}}) {
    Lattice lat = build_lattice(r, c, b);
    for (int v = 0; v < lat.n_vertices; ++v) {
      Slots s = slots(lat, v);
      CHECK(lat.links[s.h].from == v);    // right link starts here
      CHECK(lat.links[s.v].from == v);    // up link starts here
      CHECK(lat.links[s.hp].to == v);     // left link ends here
      CHECK(lat.links[s.vp].to == v);     // down link ends here
    }
  }
}

TEST_CASE("PBC slots are shared between neighbors") {
  Lattice lat = build_lattice(2, 2, Boundary::PBC);
  for (int v = 0; v < lat.n_vertices; ++v) {
    int r = lat.vertex_row(v), c = lat.vertex_col(v);
    int right = lat.vertex_index(r, (c + 1) % lat.cols);
    CHECK(slots(lat, v).h == slots(lat, right).hp);
    int up = lat.vertex_index((r + 1) % lat.rows, c);
    CHECK(slots(lat, v).v == slots(lat, up).vp);
  }
}

TEST_CASE("1x2 OBC left vertex slot references") {
  Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  Slots s = slots(lat, 0);
  CHECK_FALSE(lat.links[s.h].dangling);  // the internal horizontal link
  CHECK(lat.links[s.hp].dangling);       // the left dangling link
}

TEST_CASE("2x2 OBC top-right vertex has dangling h and v slots") {
  Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  Slots s = slots(lat, lat.vertex_index(1, 1));
  CHECK(lat.links[s.h].dangling);
  CHECK(lat.links[s.v].dangling);
}

TEST_CASE("every link sits in exactly two faces under OBC") {
  Lattice lat = build_lattice(2, 3, Boundary::OBC_DANGLING);
  std::map<int, int> in_faces;
  for (const Face& f : lat.faces)
    for (int l : f.links) in_faces[l]++;
  for (const Link& l : lat.links) CHECK(in_faces[l.index] == 2);
}

TEST_CASE("face roles by link count") {
  Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  int bulk = 0, boundary = 0, corner = 0;
  for (const Face& f : lat.faces) {
    if (f.role == FaceRole::Bulk) ++bulk;
    if (f.role == FaceRole::Boundary) ++boundary;
    if (f.role == FaceRole::Corner) ++corner;
    CHECK(f.links.size() == (f.role == FaceRole::Bulk ? 4u : f.role == FaceRole::Boundary ? 3u : 2u));
  }
  CHECK(bulk == 1);
  CHECK(boundary == 4);
  CHECK(corner == 4);
  CHECK(bulk + boundary + corner == 9);
}

TEST_CASE("input validation") {
  CHECK_THROWS(build_lattice(0, 2, Boundary::OBC_DANGLING));
  CHECK_THROWS(build_lattice(1, 2, Boundary::PBC));
  Lattice lat = build_lattice(1, 2, Boundary::OBC_DANGLING);
  CHECK_THROWS(slots(lat, 2));
  CHECK_THROWS(slots(lat, -1));
}

TEST_CASE("staggered sign is the checkerboard") {
  Lattice lat = build_lattice(2, 2, Boundary::OBC_DANGLING);
  CHECK(lat.staggered_sign(lat.vertex_index(0, 0)) == 1);
  CHECK(lat.staggered_sign(lat.vertex_index(0, 1)) == -1);
  CHECK(lat.staggered_sign(lat.vertex_index(1, 0)) == -1);
  CHECK(lat.staggered_sign(lat.vertex_index(1, 1)) == 1);
}
