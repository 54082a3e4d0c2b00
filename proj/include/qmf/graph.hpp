#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmf {

/// A vertex named by its coordinate path (i1, ..., in); the empty path is the root.
///
/// Vertices are totally ordered by (level, lexicographic path). That order is the
/// canonical site order used for every tensor-product leg layout in the library.
class Vertex {
 public:
  Vertex() = default;
  explicit Vertex(std::vector<int> path) : path_(std::move(path)) {}
  Vertex(std::initializer_list<int> path) : path_(path) {}

  static Vertex root() { return Vertex{}; }

  const std::vector<int>& path() const { return path_; }
  int level() const { return static_cast<int>(path_.size()); }
  bool is_root() const { return path_.empty(); }

  /// (x, i) in coordinate notation.
  Vertex child(int i) const;
  /// Drops the last coordinate; the root has no parent.
  Vertex parent() const;

  std::string to_string() const;

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend std::strong_ordering operator<=>(const Vertex& a, const Vertex& b);

 private:
  std::vector<int> path_;
};

/// A finite set of vertices kept sorted in canonical order.
class Region {
 public:
  Region() = default;
  Region(std::initializer_list<Vertex> vs);
  explicit Region(std::vector<Vertex> vs);

  const std::vector<Vertex>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }
  const Vertex& operator[](std::size_t i) const { return sites_[i]; }

  bool contains(const Vertex& v) const;
  bool contains(const Region& other) const;
  /// Position of v in canonical order, or -1.
  int index_of(const Vertex& v) const;

  Region united(const Region& other) const;
  Region minus(const Region& other) const;
  Region intersected(const Region& other) const;
  Region with(const Vertex& v) const;

  std::string to_string() const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  std::vector<Vertex> sites_;
};

/// Undirected simple graph on named vertices.
///
/// A graph may be a finite truncation of an infinite one: vertices on the
/// frontier have neighbours that are not stored, and asking for them raises
/// TruncationError instead of silently returning a partial neighbourhood.
class Graph {
 public:
  /// General-graph mode: any simple graph given by its edge list (cycles allowed).
  static Graph from_edges(const std::vector<std::pair<Vertex, Vertex>>& edges);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::vector<std::pair<Vertex, Vertex>> edges() const;

  bool contains(const Vertex& v) const { return index_.count(v) != 0; }
  bool adjacent(const Vertex& x, const Vertex& y) const;
  /// True when some neighbours of v lie beyond the stored truncation.
  bool on_frontier(const Vertex& v) const;
  /// N(x); throws TruncationError on frontier vertices.
  std::vector<Vertex> neighbors(const Vertex& v) const;
  /// Neighbours that are actually stored, frontier or not.
  std::vector<Vertex> stored_neighbors(const Vertex& v) const;

  bool is_connected() const;
  bool is_acyclic() const;
  bool is_tree() const { return is_connected() && is_acyclic(); }

  virtual ~Graph() = default;

 protected:
  Graph() = default;
  int add_vertex(const Vertex& v);
  void add_edge(const Vertex& x, const Vertex& y);
  int index(const Vertex& v) const;

  std::vector<Vertex> vertices_;
  std::map<Vertex, int> index_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<bool> frontier_;
  std::size_t edge_count_ = 0;
};

/// Rooted tree in Cayley coordinates.
class Tree : public Graph {
 public:
  /// Order (maximum number of successors of a vertex).
  int order() const { return order_; }
  /// Largest stored level.
  int depth() const { return depth_; }
  /// Cayley trees are stored truncations; finite trees from edge lists are complete.
  bool truncated() const { return truncated_; }
  const Vertex& root() const { return root_; }

  /// Stored successors S(x); throws TruncationError for a truncated frontier vertex.
  std::vector<Vertex> successors(const Vertex& x) const;
  std::optional<Vertex> parent(const Vertex& x) const;
  /// Original label of a vertex of a tree built from an edge list.
  const Vertex& original_label(const Vertex& v) const;

  friend Tree build_cayley(int k, int depth);
  friend Tree tree_from_edges(const std::vector<std::pair<Vertex, Vertex>>& edges,
                              const Vertex& root);

 private:
  Tree() = default;
  int order_ = 1;
  int depth_ = 0;
  bool truncated_ = false;
  Vertex root_;
  std::map<Vertex, Vertex> original_;
};

/// Semi-infinite Cayley tree of order k truncated at the given depth.
Tree build_cayley(int k, int depth);

/// General-tree mode: roots the edge list at `root` and relabels by BFS so that
/// every vertex carries Cayley-style coordinates (children in canonical order of
/// their original labels). Throws NotATreeError for cyclic or disconnected input.
Tree tree_from_edges(const std::vector<std::pair<Vertex, Vertex>>& edges, const Vertex& root);

/// External boundary: vertices outside the region adjacent to it.
Region boundary(const Graph& g, const Region& region);
/// region together with its external boundary.
Region closure(const Graph& g, const Region& region);

struct Levels {
  Region shell;  // W_n
  Region ball;   // Lambda_n
};
Levels levels(const Tree& tree, int n);

std::vector<Vertex> successors(const Tree& tree, const Vertex& x);

/// Shortest-walk length; throws PreconditionError when x and y are disconnected.
int dist(const Graph& g, const Vertex& x, const Vertex& y);

/// gamma_i: prepends i to the coordinate path.
Vertex shift_vertex(int i, const Vertex& x, int order);
Region shift_region(int i, const Region& region, int order);

bool is_connected(const Graph& g, const Region& region);

/// For each boundary vertex the unique neighbour inside the region.
/// Throws PreconditionError if the region is not connected and NotATreeError if
/// some boundary vertex has two neighbours inside.
std::map<Vertex, Vertex> check_tree_property(const Graph& g, const Region& region);

/// Smallest connected region of a tree containing every vertex of `support`.
Region connected_hull(const Tree& tree, const Region& support);

/// All connected subsets of a finite graph (exponential; for small graphs only).
std::vector<Region> connected_subsets(const Graph& g, std::size_t max_size);

}  // namespace qmf
