#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symortho/manifold.hpp"
#include "symortho/orthogonality.hpp"
#include "symortho/tensor.hpp"

namespace symortho {

/// Constraint-weight schedule of the penalty phase used for ON and SON.
struct PenaltySchedule {
    /// First weight, relative to ||T||^2.
    double initial_weight = 1.0;
    double growth = 10.0;
    int rounds = 6;
};

struct SolverConfig {
    int starts = 64;
    int max_iters = 2000;
    double grad_tol = 1e-9;
    std::uint64_t seed = 0;
    PenaltySchedule penalty;
    /// Worker threads for independent starts; 0 picks hardware concurrency.
    unsigned threads = 0;

    /// Throws ArgumentError on nonpositive starts/iterations or a bad schedule.
    void validate() const;
};

struct ApproxProblem {
    Tensor tensor;
    Notion notion = Notion::con();
    std::size_t rank = 1;
    /// Every term is v_k (x) ... (x) v_k; needs a cubical symmetric tensor.
    bool symmetric_constraint = false;
    /// PCON only: one factor per term on the orthogonal modes, one on the remaining modes.
    bool structured = false;
    SolverConfig config;
};

struct StartTrace {
    std::string pattern;
    std::size_t index = 0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool monotone = true;
};

struct ApproxResult {
    Decomposition decomposition;
    Notion notion = Notion::con();
    double objective = 0.0;
    double residual = 0.0;
    double relative_residual = 0.0;
    DecompositionCertificate certificate;
    std::vector<StartTrace> starts;
    /// Objective sequence of the winning start.
    std::vector<double> best_history;
    std::size_t best_start = 0;
    /// "hopm", "frame", "pattern", "penalty" or "zero".
    std::string phase;
    std::string pattern;
    bool degenerate = false;
    /// Set when no exhaustive pattern search backs the result.
    bool heuristic = false;
    std::vector<std::string> infeasible_patterns;
    std::optional<bool> cross_orthogonal;
    /// Cross-orthogonal solves of symmetric input: optimum over symmetric terms.
    std::optional<double> symmetric_objective;
};

/// sum_k <T, v_k1 (x) ... (x) v_kd>^2.
double objective(const Tensor& tensor, const FactorLists& factors);

/// Terms with sigma_k = <T, (x)_j v_kj>, in canonical sign form.
Decomposition sigma_from_factors(const Tensor& tensor, const FactorLists& factors);

/// Throws FieldError for complex tensors; the solvers work over the reals.
const Tensor& require_real(const AnyTensor& tensor);

/**
 * Best rank-one approximation by the higher-order power method. General mode
 * alternates v_j <- normalize(T contracted on all other modes); symmetric mode
 * runs the shifted symmetric iteration on both signs for even order. Every
 * start is finished by manifold ascent.
 */
ApproxResult rank_one_hopm(const Tensor& tensor, bool symmetric, const SolverConfig& config);

ApproxResult solve_con(const ApproxProblem& problem);
/// Best of at most `rank` strongly orthogonal terms.
ApproxResult solve_son(const ApproxProblem& problem);
/// Best of at most `rank` orthogonal terms.
ApproxResult solve_on(const ApproxProblem& problem);
ApproxResult solve_pcon(const ApproxProblem& problem);
/// Terms whose factors are orthogonal across terms in every pair of modes.
ApproxResult solve_cross(const ApproxProblem& problem);

/// Dispatches on the notion.
ApproxResult solve(const ApproxProblem& problem);

} // namespace symortho
