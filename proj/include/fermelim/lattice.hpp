#pragma once

#include <array>
#include <string>
#include <vector>

#include "fermelim/layout.hpp"

namespace fermelim {

enum class Boundary { OBC_DANGLING, PBC };
enum class FaceRole { Bulk, Boundary, Corner };

struct Link {
  int index = -1;
  bool horizontal = true;
  int from = -1;  // left (horizontal) / bottom (vertical) endpoint vertex, -1 if open
  int to = -1;    // right / top endpoint vertex, -1 if open
  bool dangling = false;
  std::string label;
};

// ordered sides bottom, right, top, left; -1 where the side has no link
struct Face {
  int index = -1;
  int fr = 0, fc = 0;
  FaceRole role = FaceRole::Bulk;
  std::array<int, 4> side{-1, -1, -1, -1};
  std::vector<int> links;  // present sides in (bottom, right, top, left) order
};

// incident link indices in slot order: h = right, v = up, h' = left, v' = down
struct Slots {
  int h = -1, v = -1, hp = -1, vp = -1;
};

struct Lattice {
  int rows = 0, cols = 0;
  Boundary boundary = Boundary::OBC_DANGLING;
  int n_vertices = 0;
  std::vector<Link> links;
  std::vector<Face> faces;

  int vertex_index(int r, int c) const { return r * cols + c; }
  int vertex_row(int v) const { return v / cols; }
  int vertex_col(int v) const { return v % cols; }
  int staggered_sign(int v) const { return ((vertex_row(v) + vertex_col(v)) % 2 == 0) ? 1 : -1; }

  std::vector<int> internal_links() const;
  std::vector<int> bulk_faces() const;
};

Lattice build_lattice(int rows, int cols, Boundary boundary);
Slots slots(const Lattice& lat, int vertex);

}
