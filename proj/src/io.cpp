#include "symortho/io.hpp"

#include <algorithm>

namespace symortho {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
    throw ParseError("field '" + field + "': " + what);
}

const Json& member(const Json& json, const std::string& key, const std::string& where) {
    if (!json.is_object()) {
        bad_field(where, "expected an object");
    }
    const auto it = json.find(key);
    if (it == json.end()) {
        bad_field(where.empty() ? key : where + "." + key, "missing");
    }
    return *it;
}

double number(const Json& json, const std::string& field) {
    if (!json.is_number()) {
        bad_field(field, "expected a number");
    }
    return json.get<double>();
}

std::vector<std::size_t> dims_from(const Json& json, const std::string& field) {
    if (!json.is_array() || json.empty()) {
        bad_field(field, "expected a nonempty array of positive integers");
    }
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < json.size(); ++i) {
        const Json& n = json[i];
        if (!n.is_number_integer() || n.get<long long>() <= 0) {
            bad_field(field + "[" + std::to_string(i) + "]", "expected a positive integer");
        }
        dims.push_back(n.get<std::size_t>());
    }
    return dims;
}

std::size_t product(const std::vector<std::size_t>& dims) {
    std::size_t p = 1;
    for (auto n : dims) {
        p *= n;
    }
    return p;
}

Json vector_to_json(const Vec& v) {
    Json out = Json::array();
    for (double x : v) {
        out.push_back(x);
    }
    return out;
}

Vec vector_from_json(const Json& json, const std::string& field) {
    if (!json.is_array()) {
        bad_field(field, "expected an array of numbers");
    }
    Vec v(static_cast<Eigen::Index>(json.size()));
    for (std::size_t i = 0; i < json.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = number(json[i], field + "[" + std::to_string(i) + "]");
    }
    return v;
}

Json pair_to_json(const PairCertificate& p) {
    Json modes = Json::array();
    for (const auto& z : p.mode_inner) {
        modes.push_back(z.imag() == 0.0 ? Json(z.real()) : Json::array({z.real(), z.imag()}));
    }
    Json out{{"first", p.first}, {"second", p.second}, {"mode_inner", modes},
             {"on", p.on},       {"son", p.son},       {"con", p.con}};
    if (p.pcon) {
        out["pcon"] = *p.pcon;
    }
    out["holds"] = p.holds;
    return out;
}

Json notion_to_json(const Notion& notion) {
    Json out{{"kind", to_string(notion)}};
    if (notion.kind == NotionKind::PCON) {
        Json modes = Json::array();
        for (auto m : notion.modes) {
            modes.push_back(m + 1);
        }
        out["modes"] = modes;
    }
    return out;
}

Json strings(const std::vector<std::string>& list) {
    Json out = Json::array();
    for (const auto& s : list) {
        out.push_back(s);
    }
    return out;
}

} // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        // Translate the byte offset into a line and column.
        const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column));
    }
}

AnyTensor tensor_from_json(const Json& json) {
    if (!json.is_object()) {
        bad_field("tensor", "expected an object");
    }
    std::string field = "real";
    if (json.contains("field")) {
        if (!json["field"].is_string()) {
            bad_field("field", "expected \"real\" or \"complex\"");
        }
        field = json["field"].get<std::string>();
    }
    if (field != "real" && field != "complex") {
        bad_field("field", "expected \"real\" or \"complex\", got \"" + field + "\"");
    }
    const auto dims = dims_from(member(json, "dims", ""), "dims");
    const Json& data = member(json, "data", "");
    if (!data.is_array()) {
        bad_field("data", "expected an array");
    }
    const std::size_t size = product(dims);
    if (field == "real") {
        if (data.size() != size) {
            bad_field("data", "expected " + std::to_string(size) + " entries, got " +
                                  std::to_string(data.size()));
        }
        std::vector<double> values(size);
        for (std::size_t i = 0; i < size; ++i) {
            values[i] = number(data[i], "data[" + std::to_string(i) + "]");
        }
        return Tensor(dims, std::move(values));
    }
    std::vector<Complex> values(size);
    if (data.size() == size && (size == 0 || data[0].is_array())) {
        for (std::size_t i = 0; i < size; ++i) {
            const std::string where = "data[" + std::to_string(i) + "]";
            if (!data[i].is_array() || data[i].size() != 2) {
                bad_field(where, "expected a [re, im] pair");
            }
            values[i] = {number(data[i][0], where + "[0]"), number(data[i][1], where + "[1]")};
        }
    } else if (data.size() == 2 * size) {
        for (std::size_t i = 0; i < size; ++i) {
            values[i] = {number(data[2 * i], "data[" + std::to_string(2 * i) + "]"),
                         number(data[2 * i + 1], "data[" + std::to_string(2 * i + 1) + "]")};
        }
    } else {
        bad_field("data", "expected " + std::to_string(size) + " [re, im] pairs or " +
                              std::to_string(2 * size) + " interleaved numbers, got " +
                              std::to_string(data.size()) + " entries");
    }
    return ComplexTensor(dims, std::move(values));
}

AnyTensor parse_tensor(std::string_view text) { return tensor_from_json(parse_json(text)); }

Json tensor_to_json(const AnyTensor& tensor) {
    return std::visit(
        [](const auto& t) {
            using S = typename std::decay_t<decltype(t)>::scalar_type;
            Json data = Json::array();
            for (const S& x : t.data()) {
                if constexpr (std::is_same_v<S, double>) {
                    data.push_back(x);
                } else {
                    data.push_back(Json::array({x.real(), x.imag()}));
                }
            }
            return Json{{"field", std::string(to_string(t.field()))}, {"dims", t.dims()},
                        {"data", data}};
        },
        tensor);
}

Json decomposition_to_json(const Decomposition& decomposition) {
    Json terms = Json::array();
    for (const auto& term : decomposition.terms) {
        Json factors = Json::array();
        for (const auto& f : term.factors) {
            factors.push_back(vector_to_json(f));
        }
        terms.push_back(Json{{"sigma", term.sigma}, {"factors", factors}});
    }
    return Json{{"dims", decomposition.dims}, {"terms", terms}};
}

Decomposition decomposition_from_json(const Json& json) {
    Decomposition out;
    out.dims = dims_from(member(json, "dims", ""), "dims");
    const Json& terms = member(json, "terms", "");
    if (!terms.is_array()) {
        bad_field("terms", "expected an array");
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const std::string where = "terms[" + std::to_string(k) + "]";
        RankOneTerm term;
        term.sigma = number(member(terms[k], "sigma", where), where + ".sigma");
        const Json& factors = member(terms[k], "factors", where);
        if (!factors.is_array() || factors.size() != out.dims.size()) {
            bad_field(where + ".factors", "expected one factor per mode");
        }
        for (std::size_t j = 0; j < factors.size(); ++j) {
            const std::string fw = where + ".factors[" + std::to_string(j) + "]";
            Vec f = vector_from_json(factors[j], fw);
            if (static_cast<std::size_t>(f.size()) != out.dims[j]) {
                bad_field(fw, "expected length " + std::to_string(out.dims[j]));
            }
            term.factors.push_back(std::move(f));
        }
        out.terms.push_back(std::move(term));
    }
    return out;
}

Json certificate_to_json(const DecompositionCertificate& certificate) {
    Json pairs = Json::array();
    for (const auto& p : certificate.pairs) {
        pairs.push_back(pair_to_json(p));
    }
    return Json{{"notion", notion_to_json(certificate.notion)},
                {"tol", certificate.tol},
                {"valid", certificate.valid},
                {"pairs", pairs}};
}

Json result_to_json(const ApproxResult& result) {
    Json out{{"notion", notion_to_json(result.notion)},
             {"rank", result.decomposition.rank()},
             {"objective", result.objective},
             {"residual", result.residual},
             {"relative_residual", result.relative_residual},
             {"phase", result.phase},
             {"pattern", result.pattern},
             {"degenerate", result.degenerate},
             {"heuristic", result.heuristic},
             {"best_start", result.best_start},
             {"starts", result.starts.size()},
             {"iterations", result.starts.empty() ? 0 : result.starts[result.best_start].iterations}};
    if (result.cross_orthogonal) {
        out["cross_orthogonal"] = *result.cross_orthogonal;
    }
    if (result.symmetric_objective) {
        out["symmetric_objective"] = *result.symmetric_objective;
    }
    if (!result.infeasible_patterns.empty()) {
        out["infeasible_patterns"] = strings(result.infeasible_patterns);
    }
    out["decomposition"] = decomposition_to_json(result.decomposition);
    out["certificate"] = certificate_to_json(result.certificate);
    return out;
}

Json oracle_to_json(const OracleReport& report) {
    Json angles = Json::array();
    for (double a : report.best_angles) {
        angles.push_back(a);
    }
    return Json{{"lo", report.lo},
                {"hi", report.hi},
                {"certified", report.certified},
                {"certification_tol", report.certification_tol},
                {"grid_step", report.grid_step},
                {"depth", report.depth},
                {"cells", report.cells},
                {"spaces", report.spaces},
                {"best_space", report.best_space},
                {"best_angles", angles},
                {"decomposition", decomposition_to_json(report.decomposition)}};
}

Json deflation_to_json(const DeflationResult& result) {
    Json steps = Json::array();
    for (const auto& s : result.trace.steps) {
        Json factors = Json::array();
        for (const auto& f : s.term.factors) {
            factors.push_back(vector_to_json(f));
        }
        steps.push_back(Json{{"sigma", s.term.sigma},
                             {"factors", factors},
                             {"residual_norm", s.residual_norm},
                             {"zero", s.zero}});
    }
    return Json{{"constraint", result.trace.constrained ? "con-orthogonal" : "none"},
                {"symmetric", result.trace.symmetric},
                {"stopped_early", result.trace.stopped_early},
                {"truncated", result.trace.truncated},
                {"objective", result.objective},
                {"residual", result.residual},
                {"steps", steps},
                {"decomposition", decomposition_to_json(result.decomposition)}};
}

Json gap_to_json(const DeflationGap& gap) {
    return Json{{"notion", notion_to_json(gap.notion)},
                {"rank", gap.rank},
                {"deflation_objective", gap.deflation_objective},
                {"direct_objective", gap.direct_objective},
                {"gap", gap.gap},
                {"deflation_residual", gap.deflation_residual},
                {"direct_residual", gap.direct_residual},
                {"deflation_alignment", gap.deflation_alignment},
                {"class_norm", gap.class_norm},
                {"direct", result_to_json(gap.direct)}};
}

Json norm_entry_to_json(const NormEntry& entry) {
    Json out{{"notion", notion_to_json(entry.notion)},
             {"rank", entry.rank},
             {"value", entry.value},
             {"status", entry.certified ? "oracle-certified" : "lower-bound"}};
    if (entry.upper) {
        out["upper"] = *entry.upper;
    }
    out["optimizer"] = decomposition_to_json(entry.optimizer);
    return out;
}

Json chain_to_json(const ChainReport& report) {
    Json entries = Json::array();
    for (const auto& e : report.norms.entries) {
        entries.push_back(norm_entry_to_json(e));
    }
    Json violations = Json::array();
    for (const auto& v : report.violations) {
        violations.push_back(Json{{"relation", v.relation}, {"lhs", v.lhs}, {"rhs", v.rhs}});
    }
    Json spectral{{"value", report.norms.spectral.value},
                  {"status", report.norms.spectral.certified ? "oracle-certified" : "lower-bound"}};
    return Json{{"frobenius", report.norms.frobenius},
                {"spectral", spectral},
                {"nuclear", nullptr},
                {"entries", entries},
                {"skipped", strings(report.skipped)},
                {"slack", report.slack},
                {"violations", violations},
                {"holds", report.holds}};
}

Json case_to_json(const CaseReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        checks.push_back(Json{{"name", c.name},
                              {"relation", c.relation},
                              {"expected", c.target},
                              {"measured", c.measured},
                              {"tolerance", c.tolerance},
                              {"source", to_string(c.source)},
                              {"pass", c.pass}});
    }
    return Json{{"id", report.id}, {"pass", report.pass}, {"checks", checks}};
}

} // namespace symortho
