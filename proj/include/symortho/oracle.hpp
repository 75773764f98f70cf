#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "symortho/solvers.hpp"

namespace symortho {

struct OracleOptions {
    /// Required width of the value bracket, relative to ||T||^2.
    double certification_tol = 1e-9;
    /// Initial grid spacing in radians; widened when the grid would exceed grid_budget cells.
    double grid_step = 3.14159265358979323846 / 180.0;
    std::size_t grid_budget = 20'000;
    /// Branch-and-bound stops after this many cell evaluations per search space.
    std::size_t max_cells = 4'000'000;
    int max_depth = 60;
};

struct OracleReport {
    /// Objective bracket: lo is attained, hi bounds the global maximum.
    double lo = 0.0;
    double hi = 0.0;
    bool certified = false;
    double certification_tol = 0.0;
    /// Grid spacing actually used, in radians.
    double grid_step = 0.0;
    /// Deepest bisection level reached.
    int depth = 0;
    std::size_t cells = 0;
    /// Number of angle-parametrized search spaces whose maxima were combined.
    std::size_t spaces = 0;
    std::string best_space;
    std::vector<double> best_angles;
    /// Terms at the best evaluated point (sigma by inner products).
    Decomposition decomposition;
};

/**
 * Exhaustive angle search for the global maximum of the objective.
 *
 * Supported: every mode of dimension 2 (each frame block is a rotation by one
 * angle in [0, pi)) for CON, PCON (plain or structured), SON and ON up to rank
 * 3, and rank one; cubical dimension 3 with symmetric terms for CON (and the
 * symmetric SON/ON reduction), parametrized by ZYZ Euler angles. Each search
 * space may use at most four angles. Anything else throws UnsupportedError.
 *
 * A coarse grid and local ascent give the lower bound; a branch-and-bound over
 * angle boxes gives the upper bound. Each box is bounded by the exact quadratic
 * Taylor model at its center plus a third-derivative remainder estimated
 * through the unfolding spectral bound of T. For a symmetric T and layouts
 * whose modes read separate blocks, only sorted angle tuples are searched.
 */
OracleReport grid_oracle(const ApproxProblem& problem, const OracleOptions& options = {});

/// True when grid_oracle() accepts the problem.
bool oracle_supports(const ApproxProblem& problem);

} // namespace symortho
