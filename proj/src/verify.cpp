#include <cmath>
#include <cstdio>

#include "qmf/cayley_chain.hpp"
#include "qmf/cli.hpp"
#include "qmf/emf.hpp"
#include "qmf/error.hpp"
#include "qmf/kernels.hpp"
#include "qmf/random.hpp"

namespace qmf {

namespace {

const std::vector<double> kBetaGrid{0.1, 0.2, 0.5, 1.0};
const std::vector<double> kDecayBetas{0.2, 0.5, 1.0};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double max_norm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Random labelled tree on n vertices: vertex i attaches to a uniformly chosen earlier one.
Tree random_tree(Rng& rng, int n) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    edges.emplace_back(Vertex{pick(rng)}, Vertex{i});
  }
  return tree_from_edges(edges, Vertex{0});
}

AmplitudeField random_field(std::shared_ptr<const Graph> g, Rng& rng, int d, bool uniform_modulus) {
  AmplitudeField f(g, d);
  for (const auto& [x, y] : g->edges())
    f.set(x, y, uniform_modulus ? random_uniform_modulus_amplitudes(rng, d) : random_bistochastic_amplitudes(rng, d));
  return f;
}

Matrix example_amplitudes() {
  Matrix psi(2, 2);
  psi << 1.0 / std::sqrt(3.0), std::sqrt(2.0 / 3.0), std::sqrt(2.0 / 3.0), 1.0 / std::sqrt(3.0);
  return psi;
}

Matrix e11() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  return m;
}

ChainSpec family_chain(KernelFamily fam, double beta) {
  const AnalyticOracle o = analytic_oracle(fam, beta, 2);
  return solve_chain(o.K, 2, 2, to_string(fam), beta);
}

void norm_law(Rng& rng, const Tolerance& tol, std::vector<Check>& checks, json& details) {
  double worst = 0.0;
  std::size_t regions = 0;
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<int> size(2, 10);
    const auto tree = std::make_shared<Tree>(random_tree(rng, size(rng)));
    const int d = 2 + t % 2;
    const AmplitudeField f = random_field(tree, rng, d, false);
    for (const auto& r : connected_subsets(*tree, tree->vertex_count())) {
      if (r.size() < 2) continue;
      worst = std::max(worst, std::abs(psi_vector(f, r).norm_squared() - d));
      ++regions;
    }
  }
  details["norm_law"] = json{{"trees", 50}, {"regions", regions}, {"max_deviation", worst}};
  checks.push_back({"norm_law", "norm law for entangled Markov fields on trees", worst, tol.equality});
}

void example_field(const Tolerance& tol, std::vector<Check>& checks, json& details) {
  const auto line = std::make_shared<Tree>(build_cayley(1, 6));
  const AmplitudeField f = AmplitudeField::homogeneous(line, example_amplitudes());
  const Vertex x{1}, y{1, 1};
  const cplx one = emf_expect(f, matrix_unit(x, 1, 1, 2));
  const cplx two = emf_expect(f, op_mul(matrix_unit(x, 1, 1, 2), matrix_unit(y, 1, 1, 2)));
  const ClassicalityReport rep = classicality_report(f, 2);
  details["example_field"] = json{{"phi_e11", one.real()}, {"phi_e11_e11", two.real()}, {"classicality", to_json(rep)}};
  checks.push_back({"example_phi_e11", "single-site marginal of the example field", std::abs(one - 0.5), tol.trace});
  checks.push_back({"example_phi_adjacent", "adjacent two-site correlation of the example field",
                    std::abs(two - 1.0 / 6.0), tol.trace});
  checks.push_back({"example_rank", "two-site restriction mixes four rank-one projections",
                    std::abs(rep.rank - 4.0), 0.0});
  checks.push_back({"example_product_deviation", "two-site restriction is not a product state",
                    rep.product_deviation, 1.0 / 20.0, "gt"});
}

void isometries(Rng& rng, std::vector<Check>& checks, json& details) {
  const auto tree = std::make_shared<Tree>(build_cayley(2, 3));
  double iso = 0.0, comm = 0.0;
  for (int s = 0; s < 20; ++s) {
    const AmplitudeField f = random_field(tree, rng, 2, false);
    for (const auto& z : tree->vertices()) {
      if (z.level() >= tree->depth()) continue;
      const auto kids = tree->successors(z);
      for (const auto& x : kids) {
        const BoundaryIsometry v = boundary_isometry(f, z, x);
        iso = std::max(iso, max_norm(v.v.adjoint() * v.v - Matrix::Identity(2, 2)));
      }
      for (std::size_t i = 0; i < kids.size(); ++i)
        for (std::size_t j = i + 1; j < kids.size(); ++j) {
          const BoundaryIsometry vx = boundary_isometry(f, z, kids[i]);
          const BoundaryIsometry vy = boundary_isometry(f, z, kids[j]);
          for (int w = 1; w <= 2; ++w) {
            const StateVector e = StateVector::basis(Region{z}, 2, {w});
            const StateVector xy = apply_isometry(vy, apply_isometry(vx, e));
            const StateVector yx = apply_isometry(vx, apply_isometry(vy, e));
            comm = std::max(comm, (xy.amplitudes() - yx.amplitudes()).cwiseAbs().maxCoeff());
          }
        }
    }
  }
  details["isometries"] = json{{"fields", 20}, {"isometry_defect", iso}, {"commutation_defect", comm}};
  checks.push_back({"isometry", "boundary maps are isometries", iso, 1e-12});
  checks.push_back({"isometry_commutation", "isometries at sibling vertices commute", comm, 1e-12});
}

LocalOperator random_observable(Rng& rng, const Region& region, bool two_site) {
  std::uniform_int_distribution<std::size_t> pick(0, region.size() - 1);
  const Vertex x = region[pick(rng)];
  LocalOperator a = LocalOperator::on_site(x, random_hermitian(rng, 2));
  if (!two_site) return a;
  Vertex y = x;
  while (y == x) y = region[pick(rng)];
  return op_mul(a, LocalOperator::on_site(y, random_hermitian(rng, 2)));
}

void chain_field_equivalence(Rng& rng, const Tolerance& tol, std::vector<Check>& checks, json& details) {
  const auto tree = std::make_shared<Tree>(build_cayley(2, 4));
  const Region lambda2 = emf_region(*tree, 2);
  double chain_gap = 0.0, gqms_gap = 0.0;
  for (int s = 0; s < 20; ++s) {
    const LocalOperator a = random_observable(rng, lambda2, s % 2 == 1);
    const AmplitudeField f = random_field(tree, rng, 2, false);
    chain_gap = std::max(chain_gap, std::abs(emf_as_chain(f, 3, a) - emf_expect(f, a)));
    const AmplitudeField u = random_field(tree, rng, 2, true);
    gqms_gap = std::max(gqms_gap, std::abs(gqms_reconstruct(u, a, 2) - emf_expect(u, a)));
  }
  details["chain_field_equivalence"] = json{{"observables", 20}, {"chain_gap", chain_gap}, {"reconstruction_gap", gqms_gap}};
  checks.push_back({"emf_chain_equivalence", "field state equals its quantum Markov chain representation",
                    chain_gap, tol.equality});
  checks.push_back({"gqms_reconstruction", "uniform-modulus fields are generalised quantum Markov states",
                    gqms_gap, tol.equality});
}

void closed_forms(const Tolerance& tol, std::vector<Check>& checks, json& details) {
  json rows = json::array();
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    const OracleReport rep = oracle_vs_numeric(fam, kBetaGrid, 2);
    double alpha_err = 0.0, w0_err = 0.0, resid = 0.0;
    for (const auto& r : rep.rows) {
      const double expected = fam == KernelFamily::Hopping ? std::pow(std::cosh(r.beta), -4.0)
                                                           : 4.0 / std::pow(std::exp(2.0 * r.beta) + 1.0, 2.0);
      const ChainSpec spec = family_chain(fam, r.beta);
      alpha_err = std::max(alpha_err, std::abs(spec.alpha.value_or(spec.h(0, 0).real()) - expected));
      w0_err = std::max(w0_err, max_norm(spec.w0 * expected - Matrix::Identity(2, 2)));
      resid = std::max({resid, r.normalization_residual, r.boundary_residual, r.initial_residual});
      rows.push_back(json{{"kernel", to_string(fam)}, {"beta", r.beta}, {"alpha", expected},
                          {"oracle_max_error", r.max_error()}});
    }
    const std::string name = to_string(fam);
    checks.push_back({name + "_closed_form_alpha", "closed-form boundary weight (" + name + " kernel)", alpha_err, tol.equality});
    checks.push_back({name + "_closed_form_w0", "initial weight proportional to the identity (" + name + " kernel)",
                      w0_err, tol.equality});
    checks.push_back({name + "_residuals", "boundary, normalisation and initial equations (" + name + " kernel)",
                      resid, tol.equality});
    checks.push_back({name + "_oracle", "numeric solvers agree with the analytic oracle (" + name + " kernel)",
                      rep.max_error(), tol.equality});
  }
  details["closed_forms"] = rows;
}

void compatibility(const Tolerance& tol, std::vector<Check>& checks, json& details) {
  json rows = json::array();
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    double worst = 0.0, step = 0.0;
    for (double beta : kBetaGrid) {
      const CayleyChain chain(family_chain(fam, beta));
      const double c0 = chain.compatibility_check(0), c1 = chain.compatibility_check(1);
      worst = std::max({worst, c0, c1});
      step = std::max(step, chain.boundary_residual());
      rows.push_back(json{{"kernel", to_string(fam)}, {"beta", beta}, {"n0", c0}, {"n1", c1}});
    }
    const std::string name = to_string(fam);
    checks.push_back({name + "_compatibility", "compatibility of the finite-volume states (" + name + " kernel)",
                      worst, tol.equality});
    checks.push_back({name + "_inductive_step", "boundary equation on the three-site block (" + name + " kernel)",
                      step, tol.equality});
  }
  details["compatibility"] = rows;
}

std::vector<LocalOperator> shift_samples() {
  std::vector<LocalOperator> out;
  for (int p = 1; p <= 2; ++p)
    for (int q = 1; q <= 2; ++q) {
      out.push_back(matrix_unit(Vertex::root(), p, q, 2));
      out.push_back(op_mul(matrix_unit(Vertex::root(), p, q, 2), matrix_unit(Vertex{1}, q, p, 2)));
      out.push_back(op_mul(matrix_unit(Vertex{1}, p, q, 2), matrix_unit(Vertex{2}, p, q, 2)));
    }
  return out;
}

void shift_invariance(const Tolerance& tol, std::vector<Check>& checks, json& details) {
  const auto samples = shift_samples();
  double worst = 0.0, control = 0.0;
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    for (double beta : kBetaGrid) {
      ChainSpec spec = family_chain(fam, beta);
      const CayleyChain chain(spec);
      for (int i = 1; i <= 2; ++i) worst = std::max(worst, chain.shift_invariance_check(i, samples));
      // Traceless perturbation keeps Tr(w0 h) = 1 because h is proportional to I.
      Matrix bump = Matrix::Zero(2, 2);
      bump(0, 0) = 0.3;
      bump(1, 1) = -0.3;
      spec.w0 += bump * spec.w0(0, 0);
      const CayleyChain perturbed(spec, false);
      control = std::max(control, perturbed.shift_invariance_check(1, samples));
    }
  }
  details["shift_invariance"] = json{{"max_deviation", worst}, {"perturbed_control", control}};
  checks.push_back({"shift_invariance", "chain states are invariant under the tree shifts", worst, tol.equality});
  checks.push_back({"shift_control", "a perturbed initial weight breaks shift invariance", control, 1e-3, "gt"});
}

void clustering(const Tolerance& tol, std::vector<Check>& checks, json& details, std::string& csv) {
  const auto emit = [&](const std::string& kernel, double beta, const ClusteringResult& cl) {
    for (std::size_t n = 0; n < cl.delta.size(); ++n)
      csv += kernel + "," + fmt(beta) + ",0," + std::to_string(n + 1) + "," + fmt(cl.delta[n]) + "," +
             (n < cl.brute_force.size() ? fmt(cl.brute_force[n]) : "") + "\n";
  };
  double ratio_err = 0.0, gap = 0.0;
  json rows = json::array();
  for (double beta : kDecayBetas) {
    const CayleyChain chain(family_chain(KernelFamily::Diagonal, beta));
    const ClusteringResult cl = chain.clustering_decay(e11(), e11(), 11);
    const double t = std::tanh(beta);
    for (int n = 5; n <= 10; ++n) ratio_err = std::max(ratio_err, std::abs(cl.delta[n] / cl.delta[n - 1] - t) / t);
    gap = std::max(gap, cl.max_brute_force_gap);
    rows.push_back(json{{"kernel", "diagonal"}, {"beta", beta}, {"rate", cl.rate}, {"tanh_beta", t}});
    emit("diagonal", beta, cl);
  }
  const double hb = 0.2;
  const CayleyChain hop(family_chain(KernelFamily::Hopping, hb));
  const ClusteringResult hc = hop.clustering_decay(e11(), e11(), 11);
  gap = std::max(gap, hc.max_brute_force_gap);
  emit("hopping", hb, hc);
  const double lambda2 = analytic_oracle(KernelFamily::Hopping, hb, 2).transfer_rate;
  rows.push_back(json{{"kernel", "hopping"}, {"beta", hb}, {"rate", hc.rate}, {"second_eigenvalue", lambda2},
                      {"delta_last", hc.delta.back()}});
  details["clustering"] = rows;
  checks.push_back({"diagonal_decay_rate", "correlations decay at the rate tanh(beta)", ratio_err, 1e-6});
  checks.push_back({"hopping_decay", "correlations of the hopping chain vanish", hc.delta.back(), tol.equality});
  checks.push_back({"hopping_rate", "reported rate is the second transfer eigenvalue",
                    std::abs(hc.rate - lambda2), tol.equality});
  checks.push_back({"clustering_brute_force", "transfer-power correlations match direct evaluation", gap, 1e-9});
}

void cycle_control(std::vector<Check>& checks, json& details) {
  const Vertex a{0}, b{1}, c{2}, e{3};
  const auto cycle = std::make_shared<Graph>(Graph::from_edges({{a, b}, {b, c}, {c, e}, {e, a}}));
  Matrix psi(2, 2);
  psi << std::sqrt(0.9), std::sqrt(0.1), std::sqrt(0.1), std::sqrt(0.9);
  const AmplitudeField f = AmplitudeField::homogeneous(cycle, psi);
  double worst = 0.0;
  for (const auto& r : connected_subsets(*cycle, 4))
    if (r.size() >= 2) worst = std::max(worst, std::abs(psi_vector(f, r).norm_squared() - 2.0));
  details["cycle_control"] = json{{"max_deviation", worst}};
  checks.push_back({"cycle_control", "the norm law fails on a graph with a loop", worst, 1e-3, "gt"});
}

}  // namespace

VerifyResult verify_suite(std::uint64_t seed, const Tolerance& tol) {
  VerifyResult out;
  Rng rng(seed);
  norm_law(rng, tol, out.checks, out.details);
  example_field(tol, out.checks, out.details);
  isometries(rng, out.checks, out.details);
  chain_field_equivalence(rng, tol, out.checks, out.details);
  closed_forms(tol, out.checks, out.details);
  compatibility(tol, out.checks, out.details);
  shift_invariance(tol, out.checks, out.details);
  clustering(tol, out.checks, out.details, out.decay_csv);
  cycle_control(out.checks, out.details);
  return out;
}

}  // namespace qmf
