#include "qmf/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "qmf/error.hpp"

namespace qmf {

// ---------------------------------------------------------------- Vertex

Vertex Vertex::child(int i) const {
  auto p = path_;
  p.push_back(i);
  return Vertex(std::move(p));
}

Vertex Vertex::parent() const {
  if (path_.empty()) throw InvalidParameter("the root has no parent");
  return Vertex(std::vector<int>(path_.begin(), path_.end() - 1));
}

std::string Vertex::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i) os << ',';
    os << path_[i];
  }
  os << ']';
  return os.str();
}

std::strong_ordering operator<=>(const Vertex& a, const Vertex& b) {
  if (auto c = a.level() <=> b.level(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.path_.begin(), a.path_.end(),
                                                b.path_.begin(), b.path_.end());
}

// ---------------------------------------------------------------- Region

Region::Region(std::initializer_list<Vertex> vs) : Region(std::vector<Vertex>(vs)) {}

Region::Region(std::vector<Vertex> vs) : sites_(std::move(vs)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool Region::contains(const Vertex& v) const {
  return std::binary_search(sites_.begin(), sites_.end(), v);
}

bool Region::contains(const Region& other) const {
  return std::includes(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end());
}

int Region::index_of(const Vertex& v) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), v);
  if (it == sites_.end() || *it != v) return -1;
  return static_cast<int>(it - sites_.begin());
}

Region Region::united(const Region& other) const {
  Region r;
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                 std::back_inserter(r.sites_));
  return r;
}

Region Region::minus(const Region& other) const {
  Region r;
  std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                      std::back_inserter(r.sites_));
  return r;
}

Region Region::intersected(const Region& other) const {
  Region r;
  std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(),
                        other.sites_.end(), std::back_inserter(r.sites_));
  return r;
}

Region Region::with(const Vertex& v) const {
  auto s = sites_;
  s.push_back(v);
  return Region(std::move(s));
}

std::string Region::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (i) out += ' ';
    out += sites_[i].to_string();
  }
  return out + "}";
}

// ---------------------------------------------------------------- Graph

int Graph::add_vertex(const Vertex& v) {
  auto [it, inserted] = index_.emplace(v, static_cast<int>(vertices_.size()));
  if (inserted) {
    vertices_.push_back(v);
    adjacency_.emplace_back();
    frontier_.push_back(false);
  }
  return it->second;
}

void Graph::add_edge(const Vertex& x, const Vertex& y) {
  if (x == y) throw InvalidParameter("self-loop at " + x.to_string());
  const int a = add_vertex(x);
  const int b = add_vertex(y);
  auto& na = adjacency_[a];
  if (std::find(na.begin(), na.end(), b) != na.end())
    throw InvalidParameter("duplicate edge " + x.to_string() + "-" + y.to_string());
  na.push_back(b);
  adjacency_[b].push_back(a);
  ++edge_count_;
}

int Graph::index(const Vertex& v) const {
  auto it = index_.find(v);
  if (it == index_.end()) throw TruncationError("vertex " + v.to_string() + " is not stored");
  return it->second;
}

Graph Graph::from_edges(const std::vector<std::pair<Vertex, Vertex>>& edges) {
  if (edges.empty()) throw InvalidParameter("edge list is empty");
  std::vector<Vertex> all;
  for (const auto& [x, y] : edges) {
    all.push_back(x);
    all.push_back(y);
  }
  Region sorted(all);
  Graph g;
  for (const auto& v : sorted) g.add_vertex(v);
  for (const auto& [x, y] : edges) g.add_edge(x, y);
  return g;
}

std::vector<std::pair<Vertex, Vertex>> Graph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  for (std::size_t a = 0; a < vertices_.size(); ++a)
    for (int b : adjacency_[a])
      if (vertices_[a] < vertices_[b]) out.emplace_back(vertices_[a], vertices_[b]);
  std::sort(out.begin(), out.end());
  return out;
}

bool Graph::adjacent(const Vertex& x, const Vertex& y) const {
  auto ix = index_.find(x);
  auto iy = index_.find(y);
  if (ix == index_.end() || iy == index_.end()) return false;
  const auto& n = adjacency_[ix->second];
  return std::find(n.begin(), n.end(), iy->second) != n.end();
}

bool Graph::on_frontier(const Vertex& v) const { return frontier_[index(v)]; }

std::vector<Vertex> Graph::stored_neighbors(const Vertex& v) const {
  std::vector<Vertex> out;
  for (int b : adjacency_[index(v)]) out.push_back(vertices_[b]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Vertex> Graph::neighbors(const Vertex& v) const {
  if (on_frontier(v))
    throw TruncationError("neighbours of " + v.to_string() +
                          " lie beyond the stored depth; deepen the tree");
  return stored_neighbors(v);
}

bool Graph::is_connected() const {
  if (vertices_.empty()) return true;
  std::vector<bool> seen(vertices_.size(), false);
  std::deque<int> queue{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (int b : adjacency_[a])
      if (!seen[b]) {
        seen[b] = true;
        ++count;
        queue.push_back(b);
      }
  }
  return count == vertices_.size();
}

bool Graph::is_acyclic() const {
  // A forest has |E| = |V| - #components.
  std::vector<int> comp(vertices_.size(), -1);
  int components = 0;
  for (std::size_t s = 0; s < vertices_.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::deque<int> queue{static_cast<int>(s)};
    comp[s] = components;
    while (!queue.empty()) {
      int a = queue.front();
      queue.pop_front();
      for (int b : adjacency_[a])
        if (comp[b] < 0) {
          comp[b] = components;
          queue.push_back(b);
        }
    }
    ++components;
  }
  return edge_count_ + components == vertices_.size();
}

// ---------------------------------------------------------------- Tree

std::vector<Vertex> Tree::successors(const Vertex& x) const {
  const int ix = index(x);
  if (frontier_[ix])
    throw TruncationError("successors of " + x.to_string() + " lie beyond depth " +
                          std::to_string(depth_));
  std::vector<Vertex> out;
  for (int b : adjacency_[ix])
    if (vertices_[b].level() == x.level() + 1) out.push_back(vertices_[b]);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Vertex> Tree::parent(const Vertex& x) const {
  index(x);
  if (x.is_root()) return std::nullopt;
  return x.parent();
}

const Vertex& Tree::original_label(const Vertex& v) const {
  auto it = original_.find(v);
  if (it == original_.end()) {
    index(v);
    return v;
  }
  return it->second;
}

Tree build_cayley(int k, int depth) {
  if (k < 1) throw InvalidParameter("Cayley order must be >= 1, got " + std::to_string(k));
  if (depth < 0) throw InvalidParameter("depth must be >= 0, got " + std::to_string(depth));
  Tree t;
  t.order_ = k;
  t.depth_ = depth;
  t.truncated_ = true;
  t.root_ = Vertex::root();
  std::vector<Vertex> level{Vertex::root()};
  t.add_vertex(Vertex::root());
  for (int n = 1; n <= depth; ++n) {
    std::vector<Vertex> next;
    for (const auto& x : level)
      for (int i = 1; i <= k; ++i) next.push_back(x.child(i));
    for (const auto& y : next) t.add_vertex(y);
    for (const auto& y : next) t.add_edge(y.parent(), y);
    level = std::move(next);
  }
  for (const auto& v : t.vertices_)
    if (v.level() == depth) t.frontier_[t.index(v)] = true;
  return t;
}

Tree tree_from_edges(const std::vector<std::pair<Vertex, Vertex>>& edges, const Vertex& root) {
  Tree t;
  t.root_ = Vertex::root();
  if (edges.empty()) {
    t.add_vertex(Vertex::root());
    t.original_[Vertex::root()] = root;
    return t;
  }
  Graph g = Graph::from_edges(edges);
  if (!g.contains(root)) throw InvalidParameter("root " + root.to_string() + " is not a vertex");
  if (!g.is_connected()) throw NotATreeError("edge list is not connected");
  if (!g.is_acyclic()) throw NotATreeError("edge list contains a cycle");

  std::map<Vertex, Vertex> relabel;  // original -> coordinates
  relabel[root] = Vertex::root();
  t.add_vertex(Vertex::root());
  t.original_[Vertex::root()] = root;
  std::deque<Vertex> queue{root};
  int order = 1;
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop_front();
    const Vertex& lx = relabel[x];
    int i = 0;
    for (const auto& y : g.stored_neighbors(x)) {
      if (relabel.count(y)) continue;
      Vertex ly = lx.child(++i);
      relabel[y] = ly;
      t.add_vertex(ly);
      t.add_edge(lx, ly);
      t.original_[ly] = y;
      t.depth_ = std::max(t.depth_, ly.level());
      queue.push_back(y);
    }
    order = std::max(order, i);
  }
  t.order_ = order;
  // Keep the canonical vertex order in storage.
  Region sorted(t.vertices_);
  Tree out;
  out.root_ = t.root_;
  out.order_ = t.order_;
  out.depth_ = t.depth_;
  out.original_ = t.original_;
  for (const auto& v : sorted) out.add_vertex(v);
  for (const auto& v : sorted)
    if (!v.is_root()) out.add_edge(v.parent(), v);
  return out;
}

// ---------------------------------------------------------------- operations

Region boundary(const Graph& g, const Region& region) {
  std::vector<Vertex> out;
  for (const auto& x : region) {
    if (!g.contains(x)) throw TruncationError("vertex " + x.to_string() + " is not stored");
    for (const auto& y : g.neighbors(x))
      if (!region.contains(y)) out.push_back(y);
  }
  return Region(std::move(out));
}

Region closure(const Graph& g, const Region& region) {
  return region.united(boundary(g, region));
}

Levels levels(const Tree& tree, int n) {
  if (n < 0) throw InvalidParameter("level must be >= 0");
  if (n > tree.depth())
    throw TruncationError("level " + std::to_string(n) + " exceeds stored depth " +
                          std::to_string(tree.depth()));
  std::vector<Vertex> shell, ball;
  for (const auto& v : tree.vertices()) {
    if (v.level() == n) shell.push_back(v);
    if (v.level() <= n) ball.push_back(v);
  }
  return {Region(std::move(shell)), Region(std::move(ball))};
}

std::vector<Vertex> successors(const Tree& tree, const Vertex& x) { return tree.successors(x); }

int dist(const Graph& g, const Vertex& x, const Vertex& y) {
  if (!g.contains(x) || !g.contains(y)) throw TruncationError("vertex is not stored");
  if (x == y) return 0;
  std::map<Vertex, int> d{{x, 0}};
  std::deque<Vertex> queue{x};
  while (!queue.empty()) {
    Vertex a = queue.front();
    queue.pop_front();
    for (const auto& b : g.stored_neighbors(a)) {
      if (d.count(b)) continue;
      d[b] = d[a] + 1;
      if (b == y) return d[b];
      queue.push_back(b);
    }
  }
  throw PreconditionError(x.to_string() + " and " + y.to_string() + " are not connected");
}

Vertex shift_vertex(int i, const Vertex& x, int order) {
  if (i < 1 || i > order)
    throw InvalidParameter("shift index " + std::to_string(i) + " outside [1, " +
                           std::to_string(order) + "]");
  std::vector<int> p{i};
  p.insert(p.end(), x.path().begin(), x.path().end());
  return Vertex(std::move(p));
}

Region shift_region(int i, const Region& region, int order) {
  std::vector<Vertex> out;
  for (const auto& v : region) out.push_back(shift_vertex(i, v, order));
  return Region(std::move(out));
}

bool is_connected(const Graph& g, const Region& region) {
  if (region.empty()) return false;
  std::set<Vertex> seen{region[0]};
  std::deque<Vertex> queue{region[0]};
  while (!queue.empty()) {
    Vertex a = queue.front();
    queue.pop_front();
    for (const auto& b : g.stored_neighbors(a))
      if (region.contains(b) && seen.insert(b).second) queue.push_back(b);
  }
  return seen.size() == region.size();
}

std::map<Vertex, Vertex> check_tree_property(const Graph& g, const Region& region) {
  if (!is_connected(g, region))
    throw PreconditionError("region " + region.to_string() + " is not connected");
  std::map<Vertex, Vertex> out;
  for (const auto& x : boundary(g, region)) {
    std::vector<Vertex> inside;
    for (const auto& y : g.stored_neighbors(x))
      if (region.contains(y)) inside.push_back(y);
    if (inside.size() != 1)
      throw NotATreeError("boundary vertex " + x.to_string() + " has " +
                          std::to_string(inside.size()) + " neighbours inside " +
                          region.to_string());
    out.emplace(x, inside.front());
  }
  return out;
}

Region connected_hull(const Tree& tree, const Region& support) {
  if (support.empty()) throw PreconditionError("empty support has no hull");
  for (const auto& v : support)
    if (!tree.contains(v)) throw TruncationError("vertex " + v.to_string() + " is not stored");
  // Common prefix of all paths is the lowest common ancestor.
  std::vector<int> lca = support[0].path();
  for (const auto& v : support) {
    std::size_t n = 0;
    while (n < lca.size() && n < v.path().size() && lca[n] == v.path()[n]) ++n;
    lca.resize(n);
  }
  std::vector<Vertex> out;
  for (const auto& v : support) {
    Vertex u = v;
    while (u.level() > static_cast<int>(lca.size())) {
      out.push_back(u);
      u = u.parent();
    }
  }
  out.emplace_back(lca);
  return Region(std::move(out));
}

std::vector<Region> connected_subsets(const Graph& g, std::size_t max_size) {
  const auto& vs = g.vertices();
  if (vs.size() > 20) throw InvalidParameter("connected_subsets is limited to 20 vertices");
  std::vector<Region> out;
  const std::uint32_t n = static_cast<std::uint32_t>(vs.size());
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > max_size) continue;
    std::vector<Vertex> s;
    for (std::uint32_t b = 0; b < n; ++b)
      if (mask & (1u << b)) s.push_back(vs[b]);
    Region r(std::move(s));
    if (is_connected(g, r)) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qmf
