#pragma once

// Finite 2-dimensional simplicial complexes: triangles whose sides are glued
// along a partition of the 3F edge slots, with edge orientations.
//
// Conventions: corners of a triangle are 0, 1, 2; side k joins corner k to
// corner k+1 (mod 3). A slot with orientation +1 has its edge oriented from
// corner k to corner k+1; orientation -1 reverses this.

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ihm/errors.hpp"

namespace ihm {

struct Slot {
  int triangle = 0;
  int side = 0;
  int orientation = 1;

  int index() const { return 3 * triangle + side; }
  /// Corner of the triangle at the start (tail) of the oriented edge.
  int tail_corner() const { return orientation > 0 ? side : (side + 1) % 3; }
  int head_corner() const { return orientation > 0 ? (side + 1) % 3 : side; }
  int opposite_corner() const { return (side + 2) % 3; }
  friend bool operator==(const Slot&, const Slot&) = default;
};

struct Corner {
  int triangle = 0;
  int corner = 0;
  int index() const { return 3 * triangle + corner; }
  friend bool operator==(const Corner&, const Corner&) = default;
};

/// Input description of a complex: triangle count plus the slot partition.
struct ComplexSpec {
  int triangles = 0;
  std::vector<std::vector<Slot>> edge_classes;
};

struct Edge {
  int id = 0;
  std::vector<Slot> slots;  // incidence list, in input order
  int tail_vertex = 0;
  int head_vertex = 0;

  int degree() const { return static_cast<int>(slots.size()); }
  bool singular() const { return degree() >= 3; }
};

struct Vertex {
  int id = 0;
  std::vector<Corner> corners;
};

enum class EdgeEnd { Tail = 0, Head = 1 };

/// Union-find over dense integer ids.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<int> parent_;
};

class Complex {
 public:
  int num_triangles() const { return num_triangles_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const Edge& edge(int id) const { return edges_.at(id); }
  const Vertex& vertex(int id) const { return vertices_.at(id); }

  /// Edge class containing side `side` of triangle `t`.
  int edge_of(int t, int side) const { return slot_edge_[3 * t + side]; }
  /// Position of that slot within the edge's incidence list.
  int slot_position(int t, int side) const { return slot_position_[3 * t + side]; }
  const Slot& slot(int t, int side) const {
    return edges_[edge_of(t, side)].slots[slot_position(t, side)];
  }
  int vertex_of(int t, int corner) const { return corner_vertex_[3 * t + corner]; }

  /// Canonical spec: classes sorted by their lowest slot.
  ComplexSpec spec() const {
    ComplexSpec s;
    s.triangles = num_triangles_;
    for (const Edge& e : edges_) s.edge_classes.push_back(e.slots);
    return s;
  }

  friend Complex build_complex(const ComplexSpec& spec);

 private:
  int num_triangles_ = 0;
  std::vector<Edge> edges_;
  std::vector<Vertex> vertices_;
  std::vector<int> slot_edge_;
  std::vector<int> slot_position_;
  std::vector<int> corner_vertex_;
};

/// Validates a spec and derives edges and vertices.
inline Complex build_complex(const ComplexSpec& spec) {
  const int F = spec.triangles;
  if (F < 1) throw Error(ErrorKind::InvalidSpec, "complex must have at least one triangle");

  std::vector<int> seen(3 * F, -1);
  for (std::size_t k = 0; k < spec.edge_classes.size(); ++k) {
    const auto& cls = spec.edge_classes[k];
    if (cls.empty())
      throw Error(ErrorKind::EmptyPartitionClass, "edge class " + std::to_string(k) + " is empty");
    for (const Slot& s : cls) {
      if (s.triangle < 0 || s.triangle >= F || s.side < 0 || s.side > 2)
        throw Error(ErrorKind::InvalidSpec, "slot [" + std::to_string(s.triangle) + "," +
                                                std::to_string(s.side) + "] out of range");
      if (s.orientation != 1 && s.orientation != -1)
        throw Error(ErrorKind::InconsistentOrientation,
                    "slot orientation must be +1 or -1 in class " + std::to_string(k));
      if (seen[s.index()] == static_cast<int>(k))
        throw Error(ErrorKind::InvalidSpec, "slot glued to itself in class " + std::to_string(k));
      if (seen[s.index()] >= 0)
        throw Error(ErrorKind::InvalidSpec, "slot appears in two edge classes");
      seen[s.index()] = static_cast<int>(k);
    }
  }
  for (int i = 0; i < 3 * F; ++i)
    if (seen[i] < 0)
      throw Error(ErrorKind::InvalidSpec, "slot [" + std::to_string(i / 3) + "," +
                                              std::to_string(i % 3) + "] is not in any class");

  Complex c;
  c.num_triangles_ = F;

  std::vector<std::size_t> order(spec.edge_classes.size());
  std::iota(order.begin(), order.end(), 0);
  auto lowest = [&](std::size_t k) {
    int m = 3 * F;
    for (const Slot& s : spec.edge_classes[k]) m = std::min(m, s.index());
    return m;
  };
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lowest(a) < lowest(b); });

  c.slot_edge_.assign(3 * F, -1);
  c.slot_position_.assign(3 * F, -1);
  for (std::size_t id = 0; id < order.size(); ++id) {
    Edge e;
    e.id = static_cast<int>(id);
    e.slots = spec.edge_classes[order[id]];
    for (std::size_t j = 0; j < e.slots.size(); ++j) {
      c.slot_edge_[e.slots[j].index()] = e.id;
      c.slot_position_[e.slots[j].index()] = static_cast<int>(j);
    }
    c.edges_.push_back(std::move(e));
  }

  DisjointSets faces(F);
  for (const Edge& e : c.edges_)
    for (const Slot& s : e.slots) faces.unite(e.slots.front().triangle, s.triangle);
  for (int t = 0; t < F; ++t)
    if (faces.find(t) != faces.find(0))
      throw Error(ErrorKind::DisconnectedComplex,
                  "triangle " + std::to_string(t) + " is not connected to triangle 0");

  // Gluings identify all tails of a class, and all heads.
  DisjointSets corners(3 * F);
  for (const Edge& e : c.edges_) {
    const Slot& s0 = e.slots.front();
    for (const Slot& s : e.slots) {
      corners.unite(3 * s0.triangle + s0.tail_corner(), 3 * s.triangle + s.tail_corner());
      corners.unite(3 * s0.triangle + s0.head_corner(), 3 * s.triangle + s.head_corner());
    }
  }
  c.corner_vertex_.assign(3 * F, -1);
  for (int i = 0; i < 3 * F; ++i) {
    const int root = corners.find(i);
    if (c.corner_vertex_[root] < 0) {
      c.corner_vertex_[root] = static_cast<int>(c.vertices_.size());
      c.vertices_.push_back(Vertex{static_cast<int>(c.vertices_.size()), {}});
    }
    c.corner_vertex_[i] = c.corner_vertex_[root];
    c.vertices_[c.corner_vertex_[i]].corners.push_back(Corner{i / 3, i % 3});
  }
  for (Edge& e : c.edges_) {
    const Slot& s = e.slots.front();
    e.tail_vertex = c.vertex_of(s.triangle, s.tail_corner());
    e.head_vertex = c.vertex_of(s.triangle, s.head_corner());
  }
  return c;
}

struct Counts {
  int faces = 0;
  int edges = 0;
  int vertices = 0;
  std::vector<int> singular_edges;
  int degree_sum = 0;
};

inline Counts counts(const Complex& c) {
  Counts k;
  k.faces = c.num_triangles();
  k.edges = c.num_edges();
  k.vertices = c.num_vertices();
  for (const Edge& e : c.edges()) {
    k.degree_sum += e.degree();
    if (e.singular()) k.singular_edges.push_back(e.id);
  }
  if (k.degree_sum != 3 * k.faces)
    throw Error(ErrorKind::InvalidSpec, "edge degrees do not sum to 3F");
  return k;
}

/// Link of a vertex: one node per edge-end at v, one arc per face corner at v.
struct LinkGraph {
  struct Node {
    int edge = 0;
    EdgeEnd end = EdgeEnd::Tail;
    int sign = 1;  // +1 when the edge is oriented towards v
  };
  struct Arc {
    Corner corner;
    std::array<int, 2> nodes{};           // node indices
    std::array<int, 2> slot_positions{};  // slot of the corner's side at each node
    std::array<int, 2> sides{};           // triangle side realizing each endpoint
  };
  int vertex = 0;
  std::vector<Node> nodes;
  std::vector<Arc> arcs;

  int node_index(int edge, EdgeEnd end) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].edge == edge && nodes[i].end == end) return static_cast<int>(i);
    return -1;
  }
};

inline LinkGraph link_graph(const Complex& c, int v) {
  LinkGraph g;
  g.vertex = v;
  for (const Edge& e : c.edges()) {
    if (e.tail_vertex == v) g.nodes.push_back({e.id, EdgeEnd::Tail, -1});
    if (e.head_vertex == v) g.nodes.push_back({e.id, EdgeEnd::Head, +1});
  }
  for (const Corner& k : c.vertex(v).corners) {
    LinkGraph::Arc a;
    a.corner = k;
    const std::array<int, 2> sides{k.corner, (k.corner + 2) % 3};
    for (int i = 0; i < 2; ++i) {
      const int side = sides[i];
      const Slot& s = c.slot(k.triangle, side);
      const EdgeEnd end = s.head_corner() == k.corner ? EdgeEnd::Head : EdgeEnd::Tail;
      a.nodes[i] = g.node_index(c.edge_of(k.triangle, side), end);
      a.slot_positions[i] = c.slot_position(k.triangle, side);
      a.sides[i] = side;
    }
    g.arcs.push_back(a);
  }
  return g;
}

struct OrientedArc {
  int arc = 0;
  bool forward = true;  // traversed from nodes[0] to nodes[1]
};
using LinkCycle = std::vector<OrientedArc>;

struct CycleBasis {
  std::vector<LinkCycle> cycles;
  int components = 0;
  std::vector<int> tree_arcs;  // arcs of the spanning forest
};

/// Fundamental cycles of a spanning forest; size = #arcs - #nodes + #components.
inline CycleBasis cycle_basis(const LinkGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> incident(n);
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    incident[g.arcs[a].nodes[0]].push_back(static_cast<int>(a));
    if (g.arcs[a].nodes[1] != g.arcs[a].nodes[0])
      incident[g.arcs[a].nodes[1]].push_back(static_cast<int>(a));
  }
  CycleBasis basis;
  std::vector<int> parent_arc(n, -1), depth(n, -1), parent_node(n, -1);
  std::vector<char> in_tree(g.arcs.size(), 0);
  for (int root = 0; root < n; ++root) {
    if (depth[root] >= 0) continue;
    ++basis.components;
    depth[root] = 0;
    std::vector<int> queue{root};
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int u = queue[q];
      for (int a : incident[u]) {
        const auto& arc = g.arcs[a];
        const int w = arc.nodes[0] == u ? arc.nodes[1] : arc.nodes[0];
        if (depth[w] >= 0) continue;
        depth[w] = depth[u] + 1;
        parent_arc[w] = a;
        parent_node[w] = u;
        in_tree[a] = 1;
        basis.tree_arcs.push_back(a);
        queue.push_back(w);
      }
    }
  }
  // Oriented step from node u along arc a.
  auto step = [&](int a, int from) { return OrientedArc{a, g.arcs[a].nodes[0] == from}; };
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    if (in_tree[a]) continue;
    const int u = g.arcs[a].nodes[0], w = g.arcs[a].nodes[1];
    // Cycle: u -> w along the arc, then back from w to u through the tree.
    LinkCycle cyc{OrientedArc{static_cast<int>(a), true}};
    std::vector<OrientedArc> from_w, from_u;
    int x = w, y = u;
    while (x != y) {
      if (depth[x] >= depth[y]) {
        from_w.push_back(step(parent_arc[x], x));
        x = parent_node[x];
      } else {
        from_u.push_back(step(parent_arc[y], y));
        y = parent_node[y];
      }
    }
    cyc.insert(cyc.end(), from_w.begin(), from_w.end());
    for (auto it = from_u.rbegin(); it != from_u.rend(); ++it)
      cyc.push_back(OrientedArc{it->arc, !it->forward});
    basis.cycles.push_back(std::move(cyc));
  }
  return basis;
}

}  // namespace ihm
