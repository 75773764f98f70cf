#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symortho/oracle.hpp"
#include "symortho/solvers.hpp"

namespace symortho {

struct NormOptions {
    /// Run the grid oracle whenever it supports the shape.
    bool certify = true;
    OracleOptions oracle;
};

/// One norm value ||T||_{A_r}: max |<T, Y>| over unit-norm Y in the class.
struct NormEntry {
    Notion notion;
    std::size_t rank = 0;
    double value = 0.0;
    /// Optimizer terms from the solver.
    Decomposition optimizer;
    /// The grid oracle brackets the value; otherwise it is a multi-start lower bound.
    bool certified = false;
    /// Oracle upper bound on the value, when the oracle ran.
    std::optional<double> upper;
};

struct SpectralNorm {
    double value = 0.0;
    /// Maximizing unit rank-one term (sigma = <T, term>); absent for T = 0.
    std::optional<RankOneTerm> term;
    bool certified = false;
};

/// Best rank-one inner product |<T, x_1 (x) ... (x) x_d>| over unit x_j.
SpectralNorm spectral_norm(const Tensor& tensor, const SolverConfig& config,
                           const NormOptions& options = {});

/// sqrt of the optimal objective of the matching approximation problem.
NormEntry a_norm(const Tensor& tensor, const Notion& notion, std::size_t rank,
                 const SolverConfig& config, const NormOptions& options = {});

struct NormReport {
    double frobenius = 0.0;
    SpectralNorm spectral;
    std::vector<NormEntry> entries;
    /// The nuclear norm closes the chain from above; it is not computed.
    std::optional<double> nuclear;
};

struct ChainViolation {
    std::string relation;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct ChainReport {
    NormReport norms;
    /// Absolute slack allowed on each inequality.
    double slack = 0.0;
    /// (notion, rank) pairs skipped because the class is empty beyond the smallest dimension.
    std::vector<std::string> skipped;
    std::vector<ChainViolation> violations;
    bool holds = true;
};

/**
 * Computes ON, SON and CON norms for ranks 1..r_max and checks
 * spectral = A_1 <= A_2 <= ... <= A_rmax <= ||T|| per notion and
 * CON_r <= SON_r <= ON_r per rank. Each inequality may be violated by at most
 * `slack` times max(1, ||T||) before it is reported.
 */
ChainReport chain_check(const Tensor& tensor, std::size_t r_max, const SolverConfig& config,
                        const NormOptions& options = {}, double slack = 1e-6);

} // namespace symortho
