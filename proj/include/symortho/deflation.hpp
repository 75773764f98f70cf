#pragma once

#include <vector>

#include "symortho/solvers.hpp"

namespace symortho {

struct DeflationStep {
    /// Unit term Y_i with sigma_i = <residual before the step, Y_i>.
    RankOneTerm term;
    /// Frobenius norm of the residual after subtracting sigma_i Y_i.
    double residual_norm = 0.0;
    /// sigma_i vanished: this and every later term are zero padding.
    bool zero = false;
};

struct DeflationTrace {
    /// Every step is restricted to the orthogonal complement of the earlier factors, mode by mode.
    bool constrained = false;
    /// Symmetric input: every step used the symmetric power method.
    bool symmetric = false;
    std::vector<DeflationStep> steps;
    /// A zero step ended the greedy search before r terms were found.
    bool stopped_early = false;
    /// Constrained mode ran out of complement directions before r steps.
    bool truncated = false;
};

struct DeflationResult {
    DeflationTrace trace;
    Decomposition decomposition;
    /// sum_k <T, Y_k>^2 over the unit terms.
    double objective = 0.0;
    double residual = 0.0;
};

/**
 * Greedy deflation: each step takes the best rank-one approximation of the
 * current residual and subtracts it. In constrained mode the step only sees
 * factors orthogonal to all earlier factors of the same mode, so the terms
 * are completely orthogonal.
 */
DeflationResult deflate(const Tensor& tensor, std::size_t rank, bool constrained,
                        const SolverConfig& config);

struct DeflationGap {
    Notion notion;
    std::size_t rank = 0;
    double deflation_objective = 0.0;
    double direct_objective = 0.0;
    /// direct_objective - deflation_objective; nonnegative up to solver tolerance.
    double gap = 0.0;
    double deflation_residual = 0.0;
    double direct_residual = 0.0;
    /// |<T, sum Y_k / ||sum Y_k||>| for the deflation terms.
    double deflation_alignment = 0.0;
    /// Best |<T, Y>| over unit-norm Y of the class, i.e. sqrt(direct_objective).
    double class_norm = 0.0;
    DeflationResult deflation;
    ApproxResult direct;
};

/**
 * Compares constrained deflation with a direct solve of the given notion.
 * Completely orthogonal terms belong to every class, so the direct value can
 * only be larger.
 */
DeflationGap deflation_gap(const Tensor& tensor, std::size_t rank, const Notion& notion,
                           const SolverConfig& config);

} // namespace symortho
