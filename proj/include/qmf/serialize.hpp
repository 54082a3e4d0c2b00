#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "qmf/algebra.hpp"
#include "qmf/cayley_chain.hpp"
#include "qmf/emf.hpp"
#include "qmf/graph.hpp"

namespace qmf {

using json = nlohmann::json;

json to_json(const Vertex& v);
json to_json(const Region& r);
/// {"re": [[...]], "im": [[...]]}
json matrix_to_json(const Matrix& m);
/// {"support": [...], "d": d, "re": [...], "im": [...]} with entries row-major.
json to_json(const LocalOperator& a);
json to_json(const StateVector& v);
json to_json(const AmplitudeField& f);
json to_json(const ClassicalityReport& r);
json to_json(const TransferSuperoperator& t);
json to_json(const ClusteringResult& c);
json complex_to_json(cplx z);

/// Field names in error messages are prefixed by `where`, e.g. "tree.edges[2]".
Vertex vertex_from_json(const json& j, const std::string& where);
/// Accepts {"re": [[...]], "im": [[...]]} (im optional) or a bare real [[...]].
Matrix matrix_from_json(const json& j, const std::string& where);
LocalOperator operator_from_json(const json& j, const std::string& where);

/// {"cayley": {"k": int, "depth": int}} or {"edges": [[path, path], ...], "root": path}.
std::shared_ptr<const Tree> tree_from_json(const json& j, const std::string& where);
/// {"d": int, "edges": [{"parent", "child", "re", "im"}, ...]}.
AmplitudeField field_from_json(std::shared_ptr<const Graph> graph, const json& j,
                               const std::string& where);

/// Products of matrix units such as "e11@[]*e12@[1,2]"; indices are single digits 1..9.
LocalOperator parse_observable(const std::string& expr, int d);

}  // namespace qmf
