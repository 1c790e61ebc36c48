#include "stokes_mg/mesh.hpp"

#include <algorithm>
#include <string>

namespace stokes {

class MeshBuilder {
 public:
  static Mesh build(CellShape shape, int n);

 private:
  static void finish_incidence(MeshTopology& t);
  static void finish_geometry(Mesh& m);
};

namespace {

struct Lattice {
  int n;
  int vertex(int i, int j) const { return j * (n + 1) + i; }
  int horizontal(int i, int j) const { return j * n + i; }
  int vertical(int i, int j) const { return n * (n + 1) + j * (n + 1) + i; }
  int diagonal(int i, int j) const { return 2 * n * (n + 1) + j * n + i; }
};

template <std::size_t N>
void append_sorted(std::vector<int>& dst, std::array<int, N> v) {
  std::sort(v.begin(), v.end());
  dst.insert(dst.end(), v.begin(), v.end());
}

}  // namespace

Mesh MeshBuilder::build(CellShape shape, int n) {
  if (n < 1) throw Error("structured mesh needs n >= 1, got " + std::to_string(n));
  Mesh mesh;
  mesh.cells_per_side = n;
  MeshTopology& t = mesh.topology;
  t.shape_ = shape;
  const Lattice L{n};
  const bool tri = shape == CellShape::triangle;

  const int nv = (n + 1) * (n + 1);
  const int ne = 2 * n * (n + 1) + (tri ? n * n : 0);
  const int nc = tri ? 2 * n * n : n * n;
  t.counts_ = {nv, ne, nc};

  t.edge_vertices_.resize(ne);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < n; ++i) t.edge_vertices_[L.horizontal(i, j)] = {L.vertex(i, j), L.vertex(i + 1, j)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= n; ++i) t.edge_vertices_[L.vertical(i, j)] = {L.vertex(i, j), L.vertex(i, j + 1)};
  if (tri) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) t.edge_vertices_[L.diagonal(i, j)] = {L.vertex(i + 1, j), L.vertex(i, j + 1)};
  }

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = L.vertex(i, j), b = L.vertex(i + 1, j), c = L.vertex(i, j + 1), d = L.vertex(i + 1, j + 1);
      const int bottom = L.horizontal(i, j), top = L.horizontal(i, j + 1);
      const int left = L.vertical(i, j), right = L.vertical(i + 1, j);
      if (tri) {
        const int diag = L.diagonal(i, j);
        // lower-left (a, b, c): edges opposite a, b, c
        t.cell_local_vertices_.insert(t.cell_local_vertices_.end(), {a, b, c});
        t.cell_local_edges_.insert(t.cell_local_edges_.end(), {diag, left, bottom});
        append_sorted<3>(t.cell_vertices_, {a, b, c});
        append_sorted<3>(t.cell_edges_, {diag, left, bottom});
        // upper-right (b, d, c)
        t.cell_local_vertices_.insert(t.cell_local_vertices_.end(), {b, d, c});
        t.cell_local_edges_.insert(t.cell_local_edges_.end(), {top, diag, right});
        append_sorted<3>(t.cell_vertices_, {b, d, c});
        append_sorted<3>(t.cell_edges_, {top, diag, right});
      } else {
        t.cell_local_vertices_.insert(t.cell_local_vertices_.end(), {a, b, c, d});
        t.cell_local_edges_.insert(t.cell_local_edges_.end(), {left, right, bottom, top});
        append_sorted<4>(t.cell_vertices_, {a, b, c, d});
        append_sorted<4>(t.cell_edges_, {left, right, bottom, top});
      }
    }
  }

  finish_incidence(t);

  mesh.geometry.vertices_.resize(nv);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.geometry.vertices_[L.vertex(i, j)] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
  finish_geometry(mesh);
  return mesh;
}

void MeshBuilder::finish_incidence(MeshTopology& t) {
  const int nv = t.num_vertices(), ne = t.num_edges(), nc = t.num_cells();
  const int vpc = t.vertices_per_cell(), epc = t.edges_per_cell();

  auto build_csr = [](int rows, const std::vector<std::pair<int, int>>& pairs, std::vector<int>& ptr,
                      std::vector<int>& idx) {
    ptr.assign(rows + 1, 0);
    for (auto [r, _] : pairs) ++ptr[r + 1];
    for (int r = 0; r < rows; ++r) ptr[r + 1] += ptr[r];
    idx.assign(pairs.size(), 0);
    std::vector<int> fill(ptr.begin(), ptr.end() - 1);
    for (auto [r, c] : pairs) idx[fill[r]++] = c;
    for (int r = 0; r < rows; ++r) std::sort(idx.begin() + ptr[r], idx.begin() + ptr[r + 1]);
  };

  std::vector<std::pair<int, int>> pairs;
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < epc; ++k) pairs.emplace_back(t.cell_edges_[c * epc + k], c);
  build_csr(ne, pairs, t.edge_cells_ptr_, t.edge_cells_);

  pairs.clear();
  for (int e = 0; e < ne; ++e) {
    pairs.emplace_back(t.edge_vertices_[e][0], e);
    pairs.emplace_back(t.edge_vertices_[e][1], e);
  }
  build_csr(nv, pairs, t.vertex_edges_ptr_, t.vertex_edges_);

  pairs.clear();
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < vpc; ++k) pairs.emplace_back(t.cell_vertices_[c * vpc + k], c);
  build_csr(nv, pairs, t.vertex_cells_ptr_, t.vertex_cells_);

  t.edge_boundary_.assign(ne, 0);
  t.vertex_boundary_.assign(nv, 0);
  t.cell_boundary_.assign(nc, 0);
  for (int e = 0; e < ne; ++e) {
    if (t.edge_cells_ptr_[e + 1] - t.edge_cells_ptr_[e] == 1) {
      t.edge_boundary_[e] = 1;
      t.vertex_boundary_[t.edge_vertices_[e][0]] = 1;
      t.vertex_boundary_[t.edge_vertices_[e][1]] = 1;
      t.cell_boundary_[t.edge_cells_[t.edge_cells_ptr_[e]]] = 1;
    }
  }
}

void MeshBuilder::finish_geometry(Mesh& m) {
  const MeshTopology& t = m.topology;
  MeshGeometry& g = m.geometry;
  const int ne = t.num_edges(), nc = t.num_cells();

  g.cell_centroid_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    Point s;
    for (int v : t.cell_vertices(c)) s += g.vertices_[v];
    g.cell_centroid_[c] = (1.0 / t.vertices_per_cell()) * s;
  }

  g.edge_length_.resize(ne);
  g.edge_normal_.resize(ne);
  g.edge_tangent_.resize(ne);
  g.edge_midpoint_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto [lo, hi] = t.edge_vertices(e);
    const Vec2 d = g.vertices_[hi] - g.vertices_[lo];
    const double len = norm(d);
    const Vec2 tan = (1.0 / len) * d;
    Vec2 nrm{tan.y, -tan.x};
    const Point mid = 0.5 * (g.vertices_[lo] + g.vertices_[hi]);
    const int c0 = t.edge_cells(e).front();
    if (dot(nrm, mid - g.cell_centroid_[c0]) < 0.0) nrm = -1.0 * nrm;
    g.edge_length_[e] = len;
    g.edge_tangent_[e] = tan;
    g.edge_normal_[e] = nrm;
    g.edge_midpoint_[e] = mid;
  }
}

bool MeshTopology::on_boundary(EntityRef e) const {
  switch (e.dim) {
    case 0: return vertex_boundary_[e.index] != 0;
    case 1: return edge_boundary_[e.index] != 0;
    default: return cell_boundary_[e.index] != 0;
  }
}

std::vector<EntityRef> MeshTopology::star(EntityRef e) const {
  if (!valid(e)) throw Error("star: invalid entity");
  std::vector<EntityRef> out{e};
  if (e.dim == 0) {
    for (int ed : vertex_edges(e.index)) out.push_back({1, ed});
    for (int c : vertex_cells(e.index)) out.push_back({2, c});
  } else if (e.dim == 1) {
    for (int c : edge_cells(e.index)) out.push_back({2, c});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EntityRef> MeshTopology::closure(std::span<const EntityRef> s) const {
  std::vector<EntityRef> out(s.begin(), s.end());
  for (const EntityRef& e : s) {
    if (!valid(e)) throw Error("closure: invalid entity");
    if (e.dim == 2) {
      for (int ed : cell_edges(e.index)) out.push_back({1, ed});
      for (int v : cell_vertices(e.index)) out.push_back({0, v});
    } else if (e.dim == 1) {
      for (int v : edge_vertices(e.index)) out.push_back({0, v});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mesh build_structured_tri(int n) { return MeshBuilder::build(CellShape::triangle, n); }
Mesh build_structured_quad(int n) { return MeshBuilder::build(CellShape::quadrilateral, n); }
Mesh build_structured(CellShape shape, int n) { return MeshBuilder::build(shape, n); }

std::pair<Mesh, RefinementLink> refine_uniform(const Mesh& coarse) {
  const int n = coarse.cells_per_side;
  const CellShape shape = coarse.shape();
  Mesh fine = build_structured(shape, 2 * n);
  const Lattice C{n}, F{2 * n};
  RefinementLink link;
  const int nc = coarse.topology.num_cells();
  link.children.resize(nc);
  link.parent.assign(fine.topology.num_cells(), -1);

  for (int J = 0; J < n; ++J) {
    for (int I = 0; I < n; ++I) {
      const int sq = J * n + I;
      auto fsq = [&](int di, int dj) { return (2 * J + dj) * (2 * n) + (2 * I + di); };
      if (shape == CellShape::triangle) {
        link.children[2 * sq] = {2 * fsq(0, 0), 2 * fsq(1, 0), 2 * fsq(0, 1), 2 * fsq(0, 0) + 1};
        link.children[2 * sq + 1] = {2 * fsq(1, 1) + 1, 2 * fsq(1, 0) + 1, 2 * fsq(0, 1) + 1, 2 * fsq(1, 1)};
      } else {
        link.children[sq] = {fsq(0, 0), fsq(1, 0), fsq(0, 1), fsq(1, 1)};
      }
    }
  }
  for (int c = 0; c < nc; ++c)
    for (int f : link.children[c]) link.parent[f] = c;

  link.vertex_map.resize(coarse.topology.num_vertices());
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) link.vertex_map[C.vertex(i, j)] = F.vertex(2 * i, 2 * j);

  link.edge_children.resize(coarse.topology.num_edges());
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < n; ++i)
      link.edge_children[C.horizontal(i, j)] = {F.horizontal(2 * i, 2 * j), F.horizontal(2 * i + 1, 2 * j)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= n; ++i)
      link.edge_children[C.vertical(i, j)] = {F.vertical(2 * i, 2 * j), F.vertical(2 * i, 2 * j + 1)};
  if (shape == CellShape::triangle) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        link.edge_children[C.diagonal(i, j)] = {F.diagonal(2 * i + 1, 2 * j), F.diagonal(2 * i, 2 * j + 1)};
  }
  return {std::move(fine), std::move(link)};
}

}  // namespace stokes
