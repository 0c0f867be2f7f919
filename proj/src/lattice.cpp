#include "fermelim/lattice.hpp"

#include <stdexcept>

namespace fermelim {

namespace {

int obc_h_index(const Lattice& lat, int r, int k) { return r * (lat.cols + 1) + k; }
int obc_v_index(const Lattice& lat, int k, int c) {
  return lat.rows * (lat.cols + 1) + k * lat.cols + c;
}
int pbc_h_index(const Lattice& lat, int r, int c) { return r * lat.cols + c; }
int pbc_v_index(const Lattice& lat, int r, int c) {
  return lat.rows * lat.cols + r * lat.cols + c;
}

FaceRole role_from_count(std::size_t n) {
  if (n == 4) return FaceRole::Bulk;
  if (n == 3) return FaceRole::Boundary;
  return FaceRole::Corner;
}

}  // namespace

std::vector<int> Lattice::internal_links() const {
  std::vector<int> out;
  for (const Link& l : links)
    if (!l.dangling) out.push_back(l.index);
  return out;
}

std::vector<int> Lattice::bulk_faces() const {
  std::vector<int> out;
  for (const Face& f : faces)
    if (f.role == FaceRole::Bulk) out.push_back(f.index);
  return out;
}

Lattice build_lattice(int rows, int cols, Boundary boundary) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("build_lattice: dimensions must be >= 1");
  if (boundary == Boundary::PBC && (rows < 2 || cols < 2))
    throw std::invalid_argument("build_lattice: PBC needs rows >= 2 and cols >= 2");

  Lattice lat;
  lat.rows = rows;
  lat.cols = cols;
  lat.boundary = boundary;
  lat.n_vertices = rows * cols;

  if (boundary == Boundary::OBC_DANGLING) {
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k <= cols; ++k) {
        Link l;
        l.index = obc_h_index(lat, r, k);
        l.horizontal = true;
        l.from = (k >= 1) ? lat.vertex_index(r, k - 1) : -1;
        l.to = (k <= cols - 1) ? lat.vertex_index(r, k) : -1;
        l.dangling = (l.from < 0 || l.to < 0);
        l.label = "h" + std::to_string(r) + "_" + std::to_string(k);
        lat.links.push_back(l);
      }
    for (int k = 0; k <= rows; ++k)
      for (int c = 0; c < cols; ++c) {
        Link l;
        l.index = obc_v_index(lat, k, c);
        l.horizontal = false;
        l.from = (k >= 1) ? lat.vertex_index(k - 1, c) : -1;
        l.to = (k <= rows - 1) ? lat.vertex_index(k, c) : -1;
        l.dangling = (l.from < 0 || l.to < 0);
        l.label = "v" + std::to_string(k) + "_" + std::to_string(c);
        lat.links.push_back(l);
      }
    for (int fr = 0; fr <= rows; ++fr)
      for (int fc = 0; fc <= cols; ++fc) {
        Face f;
        f.index = static_cast<int>(lat.faces.size());
        f.fr = fr;
        f.fc = fc;
        f.side[0] = (fr >= 1) ? obc_h_index(lat, fr - 1, fc) : -1;      // bottom
        f.side[1] = (fc <= cols - 1) ? obc_v_index(lat, fr, fc) : -1;   // right
        f.side[2] = (fr <= rows - 1) ? obc_h_index(lat, fr, fc) : -1;   // top
        f.side[3] = (fc >= 1) ? obc_v_index(lat, fr, fc - 1) : -1;      // left
        for (int s : f.side)
          if (s >= 0) f.links.push_back(s);
        f.role = role_from_count(f.links.size());
        lat.faces.push_back(f);
      }
  } else {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        Link l;
        l.index = pbc_h_index(lat, r, c);
        l.horizontal = true;
        l.from = lat.vertex_index(r, c);
        l.to = lat.vertex_index(r, (c + 1) % cols);
        l.label = "h" + std::to_string(r) + "_" + std::to_string(c);
        lat.links.push_back(l);
      }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        Link l;
        l.index = pbc_v_index(lat, r, c);
        l.horizontal = false;
        l.from = lat.vertex_index(r, c);
        l.to = lat.vertex_index((r + 1) % rows, c);
        l.label = "v" + std::to_string(r) + "_" + std::to_string(c);
        lat.links.push_back(l);
      }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        Face f;
        f.index = static_cast<int>(lat.faces.size());
        f.fr = r;
        f.fc = c;
        f.side[0] = pbc_h_index(lat, r, c);                    // bottom
        f.side[1] = pbc_v_index(lat, r, (c + 1) % cols);       // right
        f.side[2] = pbc_h_index(lat, (r + 1) % rows, c);       // top
        f.side[3] = pbc_v_index(lat, r, c);                    // left
        f.links.assign(f.side.begin(), f.side.end());
        f.role = FaceRole::Bulk;
        lat.faces.push_back(f);
      }
  }
  return lat;
}

Slots slots(const Lattice& lat, int vertex) {
  if (vertex < 0 || vertex >= lat.n_vertices) throw std::out_of_range("slots: vertex out of range");
  const int r = lat.vertex_row(vertex);
  const int c = lat.vertex_col(vertex);
  Slots s;
  if (lat.boundary == Boundary::OBC_DANGLING) {
    s.h = obc_h_index(lat, r, c + 1);
    s.v = obc_v_index(lat, r + 1, c);
    s.hp = obc_h_index(lat, r, c);
    s.vp = obc_v_index(lat, r, c);
  } else {
    s.h = pbc_h_index(lat, r, c);
    s.v = pbc_v_index(lat, r, c);
    s.hp = pbc_h_index(lat, r, (c - 1 + lat.cols) % lat.cols);
    s.vp = pbc_v_index(lat, (r - 1 + lat.rows) % lat.rows, c);
  }
  return s;
}

}
