#pragma once

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "qmf/algebra.hpp"
#include "qmf/graph.hpp"

namespace qmf {

/// Edge amplitudes psi_xy(i_x, i_y) of an entangled Markov field.
///
/// Storage is keyed by the edge with its endpoints in canonical order, which on a
/// rooted tree is (parent, child); the stored matrix is indexed (i_parent, i_child).
/// Lookups with the endpoints swapped return the transpose.
class AmplitudeField {
 public:
  AmplitudeField(std::shared_ptr<const Graph> graph, int d);

  /// Same matrix psi(i_x, i_y) on every edge, x the endpoint first in canonical order.
  static AmplitudeField homogeneous(std::shared_ptr<const Graph> graph, const Matrix& psi);

  /// Sets psi_xy with rows indexed by x and columns by y.
  void set(const Vertex& x, const Vertex& y, const Matrix& psi);
  bool has(const Vertex& x, const Vertex& y) const;
  /// psi_xy(ix, iy), 0-based indices.
  cplx amplitude(const Vertex& x, const Vertex& y, int ix, int iy) const;
  /// psi_xy oriented with rows indexed by x.
  Matrix matrix(const Vertex& x, const Vertex& y) const;

  const Graph& graph() const { return *graph_; }
  std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
  /// The underlying graph as a tree; throws NotATreeError otherwise.
  const Tree& tree() const;
  int d() const { return d_; }
  const std::map<std::pair<Vertex, Vertex>, Matrix>& edges() const { return psi_; }

  /// Largest deviation of a row or column sum of |psi|^2 from 1 over all edges.
  double bistochastic_defect() const;
  /// Largest deviation of |psi(i, j)|^2 from 1/d over all edges.
  double uniform_modulus_defect() const;
  /// Throws InvalidParameter if an edge is missing or the moduli are not bi-stochastic.
  void validate(double tol = 1e-10) const;

 private:
  std::shared_ptr<const Graph> graph_;
  int d_;
  std::map<std::pair<Vertex, Vertex>, Matrix> psi_;
};

/// psi_Lambda(omega) = product of psi_xy(omega(x), omega(y)) over edges inside Lambda.
/// Lambda must be connected.
StateVector psi_vector(const AmplitudeField& field, const Region& region);

/// (1/d) <psi_Lambda, a psi_Lambda> with Lambda the second closure of the connected
/// hull of supp(a). The value is recomputed with one more boundary vertex and an
/// InvariantViolation is raised if the two disagree beyond tol.
cplx emf_expect(const AmplitudeField& field, const LocalOperator& a, double tol = 1e-10);

/// V_(z|x) : H_z -> H_z (x) H_x as a d^2 x d matrix. Rows follow the canonical
/// order of the pair {z, x}.
struct BoundaryIsometry {
  Vertex z;
  Vertex x;
  Region out;
  Matrix v;
};

BoundaryIsometry boundary_isometry(const AmplitudeField& field, const Vertex& z, const Vertex& x);

/// (1 (x) V_(z|x)) applied to a vector on a region containing z but not x.
StateVector apply_isometry(const BoundaryIsometry& iso, const StateVector& v);

/// Nested regions Lambda_1 = {root}, Lambda_n = closure(Lambda_{n-1}).
Region emf_region(const Tree& tree, int n);

/// rho o E_1 o ... o E_n (a) with n = n_max - 1 and E_m(b) = V_m^* b V_m, evaluated as
/// an operator recursion. Requires supp(a) inside Lambda_n.
cplx emf_as_chain(const AmplitudeField& field, int n_max, const LocalOperator& a);

/// Generalised quantum Markov reconstruction for uniform-modulus fields: applies the
/// shell isometries V_n, ..., V_1 to the normalised boundary vector on
/// Lambda_{n+2} \ Lambda_n and evaluates a on the result. Requires supp(a) inside
/// Lambda_n. Throws UnsupportedField when some |psi(i, j)|^2 differs from 1/d.
cplx gqms_reconstruct(const AmplitudeField& field, const LocalOperator& a, int n,
                      double tol = 1e-10);

struct ClassicalityReport {
  std::vector<Vertex> segment;
  Matrix density;
  std::vector<double> eigenvalues;  // ascending
  int rank = 0;
  double product_deviation = 0.0;
  /// Partial-transpose positivity; reported for two-site segments only.
  std::optional<bool> ppt;
  std::optional<double> ppt_min_eigenvalue;
};

/// Diagnostics of the restriction of the field state to an n-site path segment.
/// Without an explicit path the segment is taken from the middle of a longest path.
ClassicalityReport classicality_report(const AmplitudeField& field, int n,
                                       const std::optional<std::vector<Vertex>>& path = {});

}  // namespace qmf
