#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symortho/solvers.hpp"

namespace symortho {

/// Where an expected value comes from.
enum class Source {
    /// A decimal quoted to four digits by the original construction.
    Reported,
    /// A closed-form value (radical, rational) known exactly.
    Exact,
    /// Computed independently here, e.g. by the grid oracle or a direct formula.
    Derived,
};

std::string to_string(Source source);

struct Expectation {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Source source = Source::Exact;
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct NamedCase {
    std::string id;
    std::string summary;
    std::vector<NamedTensor> tensors;
    std::vector<Expectation> expected;
    /// Tolerance for quoted four-digit decimals; closed-form radicals use 1e-6.
    double tolerance = 5e-4;
};

/// All case ids in a fixed order.
const std::vector<std::string>& case_ids();

/**
 * Tensors and expected values of a named case. Cases built from random
 * tensors draw them from `seed`. Throws ArgumentError for unknown ids.
 */
NamedCase build_case(const std::string& id, std::uint64_t seed = 0);

/// B_1(T) + ... + B_r(T): r copies of T on the block diagonal, every dimension scaled by r.
Tensor block_embed(const Tensor& tensor, std::size_t r);

/// B_l(v): v placed in block l (0-based) of a vector r times longer.
Vec block_vector(const Vec& v, std::size_t r, std::size_t block);

/// One measured quantity compared to its target.
struct CaseCheck {
    std::string name;
    /// "=", "<=", ">=", "<" or ">".
    std::string relation;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    Source source = Source::Exact;
    bool pass = false;
};

struct CaseReport {
    std::string id;
    std::vector<CaseCheck> checks;
    bool pass = true;
};

struct SuiteOptions {
    /// Random tensors per symmetric-optimizer property case.
    std::size_t samples = 50;
    /// Random tensors for the block-embedding case.
    std::size_t block_samples = 20;
    /// Starts for the cross-check where the oracle does not apply.
    int cross_check_starts = 512;
};

/// Runs the solves and oracles prescribed for a case and compares with the expected values.
CaseReport verify_case(const std::string& id, const SolverConfig& config,
                       const SuiteOptions& options = {});

enum class StructureKind { SymRank2, SymRank3, SymDecomp };

StructureKind parse_structure_kind(const std::string& name);

struct StructureVerdict {
    bool holds = false;
    /// "symmetric", "cyclic" or "none".
    std::string family = "none";
    /// Why the verdict failed, including violated preconditions.
    std::string reason;
    /// Largest deviation found in the deciding comparison.
    double deviation = 0.0;
};

/**
 * Checks the structure forced on symmetric orthogonal decompositions.
 *
 * SymDecomp: a minimal decomposition with one mutually orthogonal mode must
 * have all factors of each term equal up to sign. SymRank2: a two-term
 * decomposition must consist of two symmetric terms with orthogonal vectors.
 * SymRank3: for order 3, three symmetric terms with orthonormal vectors or the
 * cyclic family s (v w w + w v w + w w v) with v orthogonal to w; for higher
 * orders only the former. Violated preconditions (non-symmetric sum,
 * non-minimal rank) give a failing verdict with the reason set.
 */
StructureVerdict check_symmetric_structure(const Decomposition& decomposition, StructureKind kind,
                                           double tol = 1e-9);

} // namespace symortho
