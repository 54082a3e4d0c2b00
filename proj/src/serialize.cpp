#include "qmf/serialize.hpp"

#include <cctype>
#include <sstream>

#include "qmf/error.hpp"

namespace qmf {

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

std::vector<std::vector<double>> real_rows(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where, "expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& r = j[i];
    if (!r.is_array()) schema_fail(where + "[" + std::to_string(i) + "]", "expected a row array");
    std::vector<double> row;
    for (const auto& x : r) {
      if (!x.is_number()) schema_fail(where + "[" + std::to_string(i) + "]", "expected numbers");
      row.push_back(x.get<double>());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) schema_fail(where, "empty matrix");
  for (const auto& r : rows)
    if (r.size() != rows.size()) schema_fail(where, "matrix must be square");
  return rows;
}

}  // namespace

json to_json(const Vertex& v) { return json(v.path()); }

json to_json(const Region& r) {
  json out = json::array();
  for (const auto& v : r) out.push_back(to_json(v));
  return out;
}

json complex_to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json matrix_to_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"re", re}, {"im", im}};
}

json to_json(const LocalOperator& a) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < a.matrix().rows(); ++i)
    for (Eigen::Index j = 0; j < a.matrix().cols(); ++j) {
      re.push_back(a.matrix()(i, j).real());
      im.push_back(a.matrix()(i, j).imag());
    }
  return json{{"support", to_json(a.support())}, {"d", a.d()}, {"re", re}, {"im", im}};
}

json to_json(const StateVector& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < v.amplitudes().size(); ++i) {
    re.push_back(v.amplitudes()(i).real());
    im.push_back(v.amplitudes()(i).imag());
  }
  return json{{"support", to_json(v.support())}, {"d", v.d()}, {"re", re}, {"im", im}};
}

json to_json(const AmplitudeField& f) {
  json edges = json::array();
  for (const auto& [e, psi] : f.edges()) {
    json m = matrix_to_json(psi);
    edges.push_back(
        json{{"parent", to_json(e.first)}, {"child", to_json(e.second)}, {"re", m["re"]}, {"im", m["im"]}});
  }
  return json{{"d", f.d()}, {"edges", edges}};
}

json to_json(const ClassicalityReport& r) {
  json seg = json::array();
  for (const auto& v : r.segment) seg.push_back(to_json(v));
  json out{{"segment", seg},
           {"density", matrix_to_json(r.density)},
           {"eigenvalues", r.eigenvalues},
           {"rank", r.rank},
           {"product_deviation", r.product_deviation}};
  if (r.ppt) {
    out["ppt"] = *r.ppt;
    out["ppt_min_eigenvalue"] = *r.ppt_min_eigenvalue;
    out["ppt_note"] = "partial-transpose positivity; an external criterion, exact for 2x2";
  } else {
    out["ppt"] = nullptr;
  }
  return out;
}

json to_json(const TransferSuperoperator& t) {
  json ev = json::array();
  for (const auto& z : t.eigenvalues) ev.push_back(complex_to_json(z));
  return json{{"T", matrix_to_json(t.T)},
              {"vertex_map", matrix_to_json(t.vertex_map)},
              {"eigenvalues", ev},
              {"second_modulus", t.second_modulus()},
              {"kernel", t.kernel_id},
              {"beta", complex_to_json(t.beta)}};
}

json to_json(const ClusteringResult& c) {
  return json{{"delta", c.delta},
              {"brute_force", c.brute_force},
              {"max_brute_force_gap", c.max_brute_force_gap},
              {"rate", c.rate},
              {"phi_a", c.phi_a},
              {"phi_b", c.phi_b}};
}

Vertex vertex_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where, "vertex must be an array of integers");
  std::vector<int> p;
  for (const auto& x : j) {
    if (!x.is_number_integer()) schema_fail(where, "vertex coordinates must be integers");
    p.push_back(x.get<int>());
  }
  return Vertex(std::move(p));
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (j.is_array()) {
    const auto rows = real_rows(j, where);
    Matrix m(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows.size(); ++k) m(i, k) = rows[i][k];
    return m;
  }
  if (!j.is_object() || !j.contains("re")) schema_fail(where, "expected a matrix {\"re\", \"im\"}");
  const auto re = real_rows(j["re"], where + ".re");
  Matrix m(re.size(), re.size());
  for (std::size_t i = 0; i < re.size(); ++i)
    for (std::size_t k = 0; k < re.size(); ++k) m(i, k) = re[i][k];
  if (j.contains("im")) {
    const auto im = real_rows(j["im"], where + ".im");
    if (im.size() != re.size()) schema_fail(where + ".im", "shape differs from re");
    for (std::size_t i = 0; i < im.size(); ++i)
      for (std::size_t k = 0; k < im.size(); ++k) m(i, k) += cplx(0.0, im[i][k]);
  }
  return m;
}

LocalOperator operator_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) schema_fail(where, "expected an operator object");
  for (const char* key : {"support", "d", "re"})
    if (!j.contains(key)) schema_fail(where, std::string("missing field '") + key + "'");
  std::vector<Vertex> sites;
  for (std::size_t i = 0; i < j["support"].size(); ++i)
    sites.push_back(vertex_from_json(j["support"][i], where + ".support[" + std::to_string(i) + "]"));
  const int d = j["d"].get<int>();
  const Region support(sites);
  if (support.size() != sites.size()) schema_fail(where + ".support", "repeated vertex");
  if (!std::is_sorted(sites.begin(), sites.end()))
    schema_fail(where + ".support", "vertices must be listed in canonical order");
  const auto n = ipow(d, support.size());
  const auto& re = j["re"];
  if (!re.is_array() || static_cast<std::int64_t>(re.size()) != n * n)
    schema_fail(where + ".re", "expected " + std::to_string(n * n) + " entries");
  Matrix m(n, n);
  for (std::int64_t i = 0; i < n * n; ++i) m(i / n, i % n) = re[static_cast<std::size_t>(i)].get<double>();
  if (j.contains("im")) {
    const auto& im = j["im"];
    if (!im.is_array() || static_cast<std::int64_t>(im.size()) != n * n)
      schema_fail(where + ".im", "expected " + std::to_string(n * n) + " entries");
    for (std::int64_t i = 0; i < n * n; ++i)
      m(i / n, i % n) += cplx(0.0, im[static_cast<std::size_t>(i)].get<double>());
  }
  return LocalOperator(support, d, std::move(m));
}

std::shared_ptr<const Tree> tree_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) schema_fail(where, "expected a tree object");
  if (j.contains("cayley")) {
    const json& c = j["cayley"];
    if (!c.is_object() || !c.contains("k") || !c.contains("depth") || !c["k"].is_number_integer() ||
        !c["depth"].is_number_integer())
      schema_fail(where + ".cayley", "needs integer fields 'k' and 'depth'");
    return std::make_shared<Tree>(build_cayley(c["k"].get<int>(), c["depth"].get<int>()));
  }
  if (j.contains("edges")) {
    const json& e = j["edges"];
    if (!e.is_array() || e.empty()) schema_fail(where + ".edges", "expected a non-empty array");
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string w = where + ".edges[" + std::to_string(i) + "]";
      if (!e[i].is_array() || e[i].size() != 2) schema_fail(w, "edge must be a pair of vertices");
      edges.emplace_back(vertex_from_json(e[i][0], w + "[0]"), vertex_from_json(e[i][1], w + "[1]"));
    }
    const Vertex root = j.contains("root") ? vertex_from_json(j["root"], where + ".root") : edges[0].first;
    return std::make_shared<Tree>(tree_from_edges(edges, root));
  }
  schema_fail(where, "needs 'cayley' or 'edges'");
}

AmplitudeField field_from_json(std::shared_ptr<const Graph> graph, const json& j,
                               const std::string& where) {
  if (!j.is_object() || !j.contains("d") || !j["d"].is_number_integer())
    schema_fail(where, "needs integer field 'd'");
  if (!j.contains("edges") || !j["edges"].is_array()) schema_fail(where, "needs array 'edges'");
  AmplitudeField f(std::move(graph), j["d"].get<int>());
  const json& e = j["edges"];
  for (std::size_t i = 0; i < e.size(); ++i) {
    const std::string w = where + ".edges[" + std::to_string(i) + "]";
    if (!e[i].contains("parent") || !e[i].contains("child")) schema_fail(w, "needs 'parent' and 'child'");
    f.set(vertex_from_json(e[i]["parent"], w + ".parent"), vertex_from_json(e[i]["child"], w + ".child"),
          matrix_from_json(e[i], w));
  }
  return f;
}

LocalOperator parse_observable(const std::string& expr, int d) {
  const auto fail = [&](const std::string& what) {
    throw SchemaError("observable '" + expr + "': " + what);
  };
  std::optional<LocalOperator> out;
  std::stringstream ss(expr);
  std::string factor;
  while (std::getline(ss, factor, '*')) {
    factor.erase(std::remove_if(factor.begin(), factor.end(), ::isspace), factor.end());
    const auto at = factor.find('@');
    if (at == std::string::npos || at != 3 || factor[0] != 'e' || !std::isdigit(factor[1]) ||
        !std::isdigit(factor[2]))
      fail("factor '" + factor + "' is not of the form eij@[path]");
    const int i = factor[1] - '0';
    const int k = factor[2] - '0';
    json path;
    try {
      path = json::parse(factor.substr(at + 1));
    } catch (const json::exception&) {
      fail("vertex in '" + factor + "' is not a JSON array");
    }
    const Vertex v = vertex_from_json(path, "observable '" + expr + "'");
    LocalOperator e(Region{v}, d);
    try {
      e = matrix_unit(v, i, k, d);
    } catch (const InvalidParameter& err) {
      fail(err.what());
    }
    out = out ? op_mul(*out, e) : e;
  }
  if (!out) fail("empty expression");
  return *out;
}

}  // namespace qmf
