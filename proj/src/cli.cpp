#include "qmf/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qmf/cayley_chain.hpp"
#include "qmf/emf.hpp"
#include "qmf/error.hpp"
#include "qmf/kernels.hpp"
#include "qmf/random.hpp"

namespace qmf {

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) schema_fail(key, "expected an integer");
  return j[key].get<int>();
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_fail(where, "expected a number");
  return j.get<double>();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Tolerance read_tolerance(const json& cfg) {
  Tolerance tol;
  if (!cfg.contains("tolerance")) return tol;
  const json& t = cfg["tolerance"];
  if (!t.is_object()) schema_fail("tolerance", "expected an object");
  if (t.contains("equality")) tol.equality = get_number(t["equality"], "tolerance.equality");
  if (t.contains("trace")) tol.trace = get_number(t["trace"], "tolerance.trace");
  if (tol.equality <= 0 || tol.trace <= 0) schema_fail("tolerance", "tolerances must be positive");
  return tol;
}

std::uint64_t read_seed(const json& cfg, const RunOptions& opt) {
  if (opt.seed) return *opt.seed;
  if (!cfg.contains("seed")) return 0;
  if (!cfg["seed"].is_number_unsigned()) schema_fail("seed", "expected a non-negative integer");
  return cfg["seed"].get<std::uint64_t>();
}

void require_stored(const Graph& g, const LocalOperator& a, const std::string& where) {
  for (const auto& v : a.support())
    if (!g.contains(v)) throw TruncationError(where + ": vertex " + v.to_string() + " is not in the stored tree");
}

/// "eij" for a matrix unit, or a matrix object.
Matrix site_matrix(const json& j, int d, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "identity") return Matrix::Identity(d, d);
    if (s.size() != 3 || s[0] != 'e' || !std::isdigit(s[1]) || !std::isdigit(s[2]))
      schema_fail(where, "expected 'eij', 'identity' or a matrix");
    const int i = s[1] - '0', k = s[2] - '0';
    if (i < 1 || i > d || k < 1 || k > d) schema_fail(where, "matrix unit index out of range");
    Matrix m = Matrix::Zero(d, d);
    m(i - 1, k - 1) = 1.0;
    return m;
  }
  Matrix m = matrix_from_json(j, where);
  if (m.rows() != d) schema_fail(where, "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
  return m;
}

struct ObservableSpec {
  std::string expr;
  std::optional<double> expected;
};

std::vector<ObservableSpec> read_observables(const json& cfg) {
  std::vector<ObservableSpec> out;
  if (!cfg.contains("observables")) return out;
  const json& obs = cfg["observables"];
  if (!obs.is_array()) schema_fail("observables", "expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string w = "observables[" + std::to_string(i) + "]";
    if (obs[i].is_string()) {
      out.push_back({obs[i].get<std::string>(), std::nullopt});
    } else if (obs[i].is_object() && obs[i].contains("expr") && obs[i]["expr"].is_string()) {
      ObservableSpec s{obs[i]["expr"].get<std::string>(), std::nullopt};
      if (obs[i].contains("expected")) s.expected = get_number(obs[i]["expected"], w + ".expected");
      out.push_back(s);
    } else {
      schema_fail(w, "expected a string or {\"expr\", \"expected\"}");
    }
  }
  return out;
}

// ---------------------------------------------------------------- emf mode

AmplitudeField read_field(const std::shared_ptr<const Tree>& tree, const json& cfg, Rng& rng) {
  if (!cfg.contains("field")) schema_fail("field", "missing");
  const json& f = cfg["field"];
  if (!f.is_object()) schema_fail("field", "expected an object");
  if (f.contains("homogeneous")) return AmplitudeField::homogeneous(tree, matrix_from_json(f["homogeneous"], "field.homogeneous"));
  if (f.contains("random")) {
    if (!f["random"].is_string()) schema_fail("field.random", "expected a string");
    const std::string kind = f["random"].get<std::string>();
    const int d = get_int(f, "d", 2);
    if (d < 2) schema_fail("field.d", "must be at least 2");
    AmplitudeField out(tree, d);
    for (const auto& [x, y] : tree->edges()) {
      if (kind == "bistochastic") out.set(x, y, random_bistochastic_amplitudes(rng, d));
      else if (kind == "uniform_modulus") out.set(x, y, random_uniform_modulus_amplitudes(rng, d));
      else schema_fail("field.random", "expected 'bistochastic' or 'uniform_modulus'");
    }
    return out;
  }
  return field_from_json(tree, f, "field");
}

void run_emf(const json& cfg, std::uint64_t seed, const Tolerance& tol, json& report, std::vector<Check>& checks) {
  if (!cfg.contains("tree")) schema_fail("tree", "missing");
  const auto tree = tree_from_json(cfg["tree"], "tree");
  Rng rng(seed);
  const AmplitudeField field = read_field(tree, cfg, rng);
  try {
    field.validate(tol.equality);
  } catch (const InvalidParameter& e) {
    schema_fail("field", e.what());
  }
  const int d = field.d();
  report["field"] = to_json(field);

  json obs_out = json::array();
  double chain_gap = 0.0;
  bool chain_compared = false;
  for (const auto& spec : read_observables(cfg)) {
    const LocalOperator a = parse_observable(spec.expr, d);
    require_stored(*tree, a, "observable '" + spec.expr + "'");
    const cplx phi = emf_expect(field, a, tol.equality);
    json row{{"observable", spec.expr}, {"phi", phi.real()}, {"phi_im", phi.imag()}};
    // Cross-check through the Heisenberg recursion when the tree has room for it.
    for (int n = 1; n <= tree->depth() + 1; ++n) {
      if (!emf_region(*tree, n).contains(a.support())) continue;
      try {
        const cplx via_chain = emf_as_chain(field, n + 1, a);
        row["phi_chain"] = via_chain.real();
        chain_gap = std::max(chain_gap, std::abs(via_chain - phi));
        chain_compared = true;
      } catch (const TruncationError&) {
      }
      break;
    }
    if (spec.expected) {
      checks.push_back({"observable:" + spec.expr, "expectation matches the configured value",
                        std::abs(phi - cplx(*spec.expected)), tol.equality});
    }
    obs_out.push_back(row);
  }
  report["observables"] = obs_out;
  if (chain_compared)
    checks.push_back({"emf_chain_equivalence", "field state equals its quantum Markov chain representation",
                      chain_gap, tol.equality});

  int max_size = 6;
  if (cfg.contains("norm_check")) max_size = get_int(cfg["norm_check"], "max_size", max_size);
  std::vector<Region> regions;
  if (tree->vertex_count() <= 20) {
    for (auto& r : connected_subsets(*tree, static_cast<std::size_t>(max_size)))
      if (r.size() >= 2) regions.push_back(std::move(r));
  } else {
    for (int n = 2; n - 1 <= tree->depth(); ++n) {
      Region r = emf_region(*tree, n);
      if (r.size() > kMaxVectorSites) break;
      regions.push_back(std::move(r));
    }
  }
  double norm_dev = 0.0;
  for (const auto& r : regions) norm_dev = std::max(norm_dev, std::abs(psi_vector(field, r).norm_squared() - d));
  report["norm_check"] = json{{"regions", regions.size()}, {"max_deviation", norm_dev}};
  checks.push_back({"norm_law", "squared norm of psi on connected regions equals d", norm_dev, tol.equality});

  if (cfg.contains("classicality")) {
    const int n = get_int(cfg["classicality"], "n", 2);
    report["classicality"] = to_json(classicality_report(field, n));
  }
}

// -------------------------------------------------------------- chain mode

struct KernelChoice {
  std::optional<KernelFamily> family;
  std::optional<Matrix> generator;  // H with K = exp(beta H)
  std::optional<Matrix> fixed;      // K given directly
  std::string id;
};

KernelChoice read_kernel(const json& cfg) {
  if (!cfg.contains("kernel")) schema_fail("kernel", "missing");
  const json& k = cfg["kernel"];
  KernelChoice out;
  if (k.is_string()) {
    try {
      out.family = parse_kernel_family(k.get<std::string>());
    } catch (const InvalidParameter& e) {
      schema_fail("kernel", e.what());
    }
    out.id = k.get<std::string>();
  } else if (k.is_object() && k.contains("H")) {
    out.generator = matrix_from_json(k["H"], "kernel.H");
    if (!is_hermitian(*out.generator)) schema_fail("kernel.H", "must be Hermitian");
    out.id = "custom-generator";
  } else if (k.is_object() && k.contains("K")) {
    out.fixed = matrix_from_json(k["K"], "kernel.K");
    out.id = "custom-kernel";
  } else {
    schema_fail("kernel", "expected 'hopping', 'diagonal', {\"H\", \"beta\"} or {\"K\"}");
  }
  return out;
}

cplx read_beta(const json& j, const std::string& where, bool allow_complex) {
  if (j.is_number()) return j.get<double>();
  if (j.is_object() && j.contains("re")) {
    const double re = get_number(j["re"], where + ".re");
    const double im = j.contains("im") ? get_number(j["im"], where + ".im") : 0.0;
    if (im != 0.0 && !allow_complex) schema_fail(where, "complex beta needs \"allow_complex_beta\": true");
    return {re, im};
  }
  schema_fail(where, "expected a number or {\"re\", \"im\"}");
}

std::vector<cplx> read_betas(const json& cfg, const KernelChoice& kc) {
  const bool allow_complex = cfg.value("allow_complex_beta", false);
  std::vector<cplx> betas;
  if (cfg.contains("betas")) {
    if (!cfg["betas"].is_array() || cfg["betas"].empty()) schema_fail("betas", "expected a non-empty array");
    for (std::size_t i = 0; i < cfg["betas"].size(); ++i)
      betas.push_back(read_beta(cfg["betas"][i], "betas[" + std::to_string(i) + "]", allow_complex));
  } else if (cfg.contains("beta")) {
    betas.push_back(read_beta(cfg["beta"], "beta", allow_complex));
  } else if (kc.generator && cfg["kernel"].contains("beta")) {
    betas.push_back(read_beta(cfg["kernel"]["beta"], "kernel.beta", allow_complex));
  } else if (kc.fixed) {
    betas.push_back(0.0);
  } else {
    schema_fail("beta", "missing");
  }
  for (const auto& b : betas)
    if (b.imag() != 0.0 && kc.family == KernelFamily::Hopping)
      schema_fail("beta", "the hopping kernel takes a real beta");
  return betas;
}

Matrix kernel_matrix(const KernelChoice& kc, cplx beta) {
  if (kc.family == KernelFamily::Hopping) return hopping_kernel(beta.real());
  if (kc.family == KernelFamily::Diagonal) return diagonal_kernel(beta);
  if (kc.generator) return herm_exp(*kc.generator, beta);
  return *kc.fixed;
}

int site_dimension(const Matrix& K) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(K.rows()))));
  if (d < 2 || d * d != K.rows() || K.rows() != K.cols()) schema_fail("kernel", "must be a square d^2 x d^2 matrix with d >= 2");
  return d;
}

std::vector<LocalOperator> shift_samples(int d) {
  std::vector<LocalOperator> out;
  for (int p = 1; p <= d; ++p)
    for (int q = 1; q <= d; ++q) {
      out.push_back(matrix_unit(Vertex::root(), p, q, d));
      for (int r = 1; r <= d; ++r)
        for (int s = 1; s <= d; ++s)
          out.push_back(op_mul(matrix_unit(Vertex::root(), p, q, d), matrix_unit(Vertex{1}, r, s, d)));
    }
  return out;
}

void run_chain(const json& cfg, const Tolerance& tol, json& report, std::vector<Check>& checks, std::string& csv) {
  const int k = get_int(cfg, "k", 2);
  if (k < 1) schema_fail("k", "must be at least 1");
  const KernelChoice kc = read_kernel(cfg);
  const std::vector<cplx> betas = read_betas(cfg, kc);
  HAnsatz ansatz = HAnsatz::Scalar;
  if (cfg.contains("h_ansatz")) {
    const std::string a = cfg["h_ansatz"].is_string() ? cfg["h_ansatz"].get<std::string>() : "";
    if (a == "full") ansatz = HAnsatz::Full;
    else if (a != "scalar") schema_fail("h_ansatz", "expected 'scalar' or 'full'");
  }
  const auto matrix_or_solve = [&](const char* key) -> std::optional<Matrix> {
    if (!cfg.contains(key) || (cfg[key].is_string() && cfg[key] == "solve")) return std::nullopt;
    return matrix_from_json(cfg[key], key);
  };
  const std::optional<Matrix> h_given = matrix_or_solve("h");
  const std::optional<Matrix> w0_given = matrix_or_solve("w0");

  json clustering_cfg = cfg.value("clustering", json::object());
  const int N = get_int(clustering_cfg, "N", 10);
  if (N < 1) schema_fail("clustering.N", "must be positive");
  const auto observables = read_observables(cfg);

  json runs = json::array();
  for (const cplx beta : betas) {
    const Matrix K = kernel_matrix(kc, beta);
    const int d = site_dimension(K);
    ChainSpec spec;
    spec.k = k;
    spec.d = d;
    spec.K = K;
    spec.kernel_id = kc.id;
    spec.beta = beta;
    if (h_given) {
      if (h_given->rows() != d) schema_fail("h", "dimension differs from the kernel's site dimension");
      spec.h = *h_given;
    } else {
      const HSolution sol = solve_h(K, d, k, ansatz);
      spec.h = sol.h;
      spec.alpha = sol.alpha;
    }
    if (w0_given) {
      if (w0_given->rows() != d) schema_fail("w0", "dimension differs from the kernel's site dimension");
      spec.w0 = *w0_given;
    } else {
      spec.w0 = solve_w0(K, spec.h, k);
    }

    const CayleyChain chain(spec, false);
    const std::string tag = kc.id + "@" + fmt(beta.real()) + (beta.imag() != 0.0 ? "+" + fmt(beta.imag()) + "i" : "");
    json run{{"beta", complex_to_json(beta)}, {"k", k}, {"d", d}, {"h", matrix_to_json(spec.h)}, {"w0", matrix_to_json(spec.w0)}};
    if (spec.alpha) run["alpha"] = *spec.alpha;

    const double positivity = std::max({0.0, -min_eigenvalue(spec.h), -min_eigenvalue(spec.w0)});
    const bool hermitian = is_hermitian(spec.h, tol.equality) && is_hermitian(spec.w0, tol.equality);
    checks.push_back({tag + ":positivity", "boundary and initial weights are positive",
                      hermitian ? positivity : 1.0, tol.equality});

    const json residuals{{"normalization", chain.normalization_residual()},
                         {"boundary", chain.boundary_residual()},
                         {"initial", chain.initial_residual()}};
    run["residuals"] = residuals;
    checks.push_back({tag + ":normalization", "normalisation of the initial weight", residuals["normalization"], tol.equality});
    checks.push_back({tag + ":boundary", "boundary fixed-point equation", residuals["boundary"], tol.equality});
    checks.push_back({tag + ":initial", "initial condition on the root weight", residuals["initial"], tol.equality});

    if (kc.family && k >= 2) {
      const AnalyticOracle o = analytic_oracle(*kc.family, beta, k);
      const double alpha_err = spec.alpha ? std::abs(*spec.alpha - o.alpha) : (spec.h - o.h).cwiseAbs().maxCoeff();
      const double w0_err = (spec.w0 - o.w0).cwiseAbs().maxCoeff();
      run["closed_form"] = json{{"alpha", o.alpha}, {"alpha_error", alpha_err}, {"w0_error", w0_err}};
      checks.push_back({tag + ":closed_form_alpha", "closed-form boundary weight", alpha_err, tol.equality});
      checks.push_back({tag + ":closed_form_w0", "closed-form initial weight", w0_err, tol.equality});
    }

    const double compat0 = chain.compatibility_check(0);
    const double compat1 = chain.compatibility_check(1);
    run["compatibility"] = json::array({compat0, compat1});
    checks.push_back({tag + ":compatibility", "compatibility of the finite-volume states",
                      std::max(compat0, compat1), tol.equality});

    const auto samples = shift_samples(d);
    double shift = 0.0;
    for (int i = 1; i <= k; ++i) shift = std::max(shift, chain.shift_invariance_check(i, samples));
    run["shift_invariance"] = shift;
    checks.push_back({tag + ":shift_invariance", "invariance under the tree shifts", shift, tol.equality});

    const TransferSuperoperator T = chain.transfer_superoperator();
    run["transfer"] = to_json(T);
    run["transfer"]["rate_below_one"] = T.second_modulus() < 1.0;

    const Matrix a = site_matrix(clustering_cfg.value("a", json("e11")), d, "clustering.a");
    const Matrix b = site_matrix(clustering_cfg.value("b", json("e11")), d, "clustering.b");
    const ClusteringResult cl = chain.clustering_decay(a, b, N);
    run["clustering"] = to_json(cl);
    checks.push_back({tag + ":clustering_brute_force", "transfer-power correlations match direct evaluation",
                      cl.max_brute_force_gap, 1e-9});
    for (std::size_t n = 0; n < cl.delta.size(); ++n) {
      csv += kc.id + "," + fmt(beta.real()) + "," + fmt(beta.imag()) + "," + std::to_string(n + 1) + "," +
             fmt(cl.delta[n]) + "," + (n < cl.brute_force.size() ? fmt(cl.brute_force[n]) : "") + "\n";
    }

    json obs_out = json::array();
    for (const auto& os : observables) {
      const LocalOperator o = parse_observable(os.expr, d);
      const cplx phi = chain.chain_expect(o);
      obs_out.push_back(json{{"observable", os.expr}, {"phi", phi.real()}, {"phi_im", phi.imag()}});
      if (os.expected)
        checks.push_back({tag + ":observable:" + os.expr, "expectation matches the configured value",
                          std::abs(phi - cplx(*os.expected)), tol.equality});
    }
    if (!observables.empty()) run["observables"] = obs_out;
    runs.push_back(run);
  }
  report["kernel"] = kc.id;
  report["runs"] = runs;
}

const char* const kCsvHeader = "kernel,beta_re,beta_im,n,delta,brute_force\n";

json error_report(const std::string& kind, const std::string& message, int code) {
  return json{{"schema", kSchemaVersion}, {"error", json{{"kind", kind}, {"message", message}}}, {"exit_code", code}};
}

}  // namespace

json to_json(const Check& c) {
  return json{{"id", c.id},
              {"claim", c.claim},
              {"value", c.value},
              {"tolerance", c.tolerance},
              {"relation", c.relation},
              {"passed", c.passed()}};
}

RunResult run_config(const json& config, const RunOptions& options) {
  RunResult out;
  const auto fail = [&](const std::string& kind, const std::string& msg, int code) {
    out.exit_code = code;
    out.message = kind + ": " + msg;
    out.report = error_report(kind, msg, code);
    out.decay_csv.clear();
    return out;
  };
  try {
    if (!config.is_object()) schema_fail("config", "expected a JSON object");
    if (!config.contains("schema")) schema_fail("schema", "missing; expected \"qmf/1\"");
    if (config["schema"] != kSchemaVersion) schema_fail("schema", "unsupported version; expected \"qmf/1\"");
    if (!config.contains("mode") || !config["mode"].is_string()) schema_fail("mode", "missing or not a string");
    const std::string mode = config["mode"].get<std::string>();
    const Tolerance tol = read_tolerance(config);
    const std::uint64_t seed = read_seed(config, options);

    json report{{"schema", kSchemaVersion}, {"mode", mode}, {"seed", seed},
                {"tolerance", json{{"equality", tol.equality}, {"trace", tol.trace}}}};
    std::vector<Check> checks;
    std::string csv;
    if (mode == "emf") {
      run_emf(config, seed, tol, report, checks);
    } else if (mode == "chain") {
      run_chain(config, tol, report, checks, csv);
    } else if (mode == "verify") {
      VerifyResult v = verify_suite(seed, tol);
      checks = std::move(v.checks);
      report["details"] = std::move(v.details);
      csv = std::move(v.decay_csv);
    } else {
      schema_fail("mode", "expected 'emf', 'chain' or 'verify'");
    }

    json cj = json::array();
    bool all = true;
    for (const auto& c : checks) {
      cj.push_back(to_json(c));
      all = all && c.passed();
    }
    report["checks"] = cj;
    report["passed"] = all;
    out.report = std::move(report);
    if (!csv.empty()) out.decay_csv = kCsvHeader + csv;
    out.exit_code = all ? kExitOk : kExitCheckFailed;
    if (!all) out.message = "one or more checks failed";
    return out;
  } catch (const SchemaError& e) {
    return fail("schema", e.what(), kExitSchema);
  } catch (const TruncationError& e) {
    return fail("truncation", e.what(), kExitTruncation);
  } catch (const SolverError& e) {
    return fail("solver", e.what(), kExitSolver);
  } catch (const InvariantViolation& e) {
    return fail("invariant", e.what(), kExitCheckFailed);
  } catch (const Error& e) {
    return fail("invalid", e.what(), kExitSchema);
  } catch (const json::exception& e) {
    return fail("schema", e.what(), kExitSchema);
  }
}

int run_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err) {
  RunResult result;
  std::ifstream in(config_path);
  if (!in) {
    err << "cannot open " << config_path << "\n";
    return kExitSchema;
  }
  json cfg;
  try {
    cfg = json::parse(in);
    result = run_config(cfg, options);
  } catch (const json::parse_error& e) {
    result.exit_code = kExitSchema;
    result.message = std::string("schema: config is not valid JSON: ") + e.what();
    result.report = error_report("schema", e.what(), kExitSchema);
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  std::ofstream(options.out_dir / "report.json") << result.report.dump(2) << "\n";
  if (!result.decay_csv.empty()) std::ofstream(options.out_dir / "decay.csv") << result.decay_csv;
  if (!result.message.empty()) err << result.message << "\n";
  return result.exit_code;
}

}  // namespace qmf
