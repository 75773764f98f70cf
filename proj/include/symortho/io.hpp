#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "symortho/deflation.hpp"
#include "symortho/norms.hpp"
#include "symortho/oracle.hpp"
#include "symortho/paper_suite.hpp"
#include "symortho/solvers.hpp"

namespace symortho {

/// Insertion-ordered JSON so that reports serialize identically on every run.
using Json = nlohmann::ordered_json;

/**
 * Tensor JSON: {"field": "real" | "complex", "dims": [n1, ..., nd], "data": [...]}
 * with data row-major (last index fastest). Complex data is a list of [re, im]
 * pairs; a flat interleaved list re, im, re, im, ... is accepted on input.
 * Throws ParseError naming the offending field.
 */
AnyTensor tensor_from_json(const Json& json);
/// Parses text, reporting syntax errors with line and column.
AnyTensor parse_tensor(std::string_view text);
Json tensor_to_json(const AnyTensor& tensor);

/// {"dims": [...], "terms": [{"sigma": s, "factors": [[...], ...]}, ...]}
Json decomposition_to_json(const Decomposition& decomposition);
Decomposition decomposition_from_json(const Json& json);

/// Parses any JSON text, reporting syntax errors with line and column.
Json parse_json(std::string_view text);

Json certificate_to_json(const DecompositionCertificate& certificate);
Json result_to_json(const ApproxResult& result);
Json oracle_to_json(const OracleReport& report);
Json deflation_to_json(const DeflationResult& result);
Json gap_to_json(const DeflationGap& gap);
Json norm_entry_to_json(const NormEntry& entry);
Json chain_to_json(const ChainReport& report);
Json case_to_json(const CaseReport& report);

} // namespace symortho
