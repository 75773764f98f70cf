#include "symortho/deflation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace symortho {

namespace {

/// Orthonormal basis of the complement of the span of `used` (columns assumed orthonormal).
Mat complement(const std::vector<Vec>& used, std::size_t n) {
    if (used.empty()) {
        return Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }
    Mat v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(used.size()));
    for (std::size_t k = 0; k < used.size(); ++k) {
        v.col(static_cast<Eigen::Index>(k)) = used[k];
    }
    Eigen::HouseholderQR<Mat> qr(v);
    const Mat q = qr.householderQ();
    return q.rightCols(static_cast<Eigen::Index>(n - used.size()));
}

/// Unit vector orthogonal to `used`, or e_1 when nothing is used.
Vec padding_factor(const std::vector<Vec>& used, std::size_t n, bool constrained) {
    if (constrained && used.size() < n) {
        return complement(used, n).col(0);
    }
    return Vec::Unit(static_cast<Eigen::Index>(n), 0);
}

} // namespace

DeflationResult deflate(const Tensor& tensor, std::size_t rank, bool constrained,
                        const SolverConfig& config) {
    if (rank == 0) {
        throw ArgumentError("deflation needs rank >= 1");
    }
    config.validate();
    const auto& dims = tensor.dims();
    const std::size_t d = tensor.order();
    const double norm = frobenius_norm(tensor);
    const double zero_tol = 1e-12 * std::max(norm, 1.0);

    // Errors in early factors leak into every later step, so each step is solved more tightly.
    SolverConfig step_config = config;
    step_config.grad_tol = std::min(config.grad_tol, 1e-12);

    DeflationResult out;
    out.trace.constrained = constrained;
    out.trace.symmetric = tensor.is_cubical() && d > 1 && is_symmetric(tensor);
    out.decomposition.dims = dims;

    Tensor residual = tensor;
    // used[j] lists the factors of mode j chosen so far.
    std::vector<std::vector<Vec>> used(d);
    for (std::size_t step = 0; step < rank; ++step) {
        bool exhausted = false;
        for (std::size_t j = 0; j < d; ++j) {
            exhausted = exhausted || (constrained && used[j].size() >= dims[j]);
        }
        if (exhausted) {
            out.trace.truncated = true;
            break;
        }
        RankOneTerm term;
        if (!out.trace.stopped_early) {
            // Restrict to the complement in every mode, solve there, and lift back.
            std::vector<Mat> basis(d);
            Tensor reduced = residual;
            if (constrained) {
                for (std::size_t j = 0; j < d; ++j) {
                    basis[j] = out.trace.symmetric && j > 0 ? basis[0] : complement(used[j], dims[j]);
                    reduced = multiply_mode<double>(reduced, j, basis[j].transpose());
                }
            }
            const ApproxResult best = rank_one_hopm(reduced, out.trace.symmetric, step_config);
            if (!best.decomposition.terms.empty()) {
                for (std::size_t j = 0; j < d; ++j) {
                    const Vec& y = best.decomposition.terms.front().factors[j];
                    term.factors.push_back(constrained ? Vec(basis[j] * y) : y);
                }
                term.sigma = inner_rank_one<double>(residual, term.factors);
            }
            if (term.factors.empty() || std::abs(term.sigma) <= zero_tol) {
                out.trace.stopped_early = true;
            }
        }
        if (out.trace.stopped_early) {
            term.sigma = 0.0;
            term.factors.clear();
            for (std::size_t j = 0; j < d; ++j) {
                term.factors.push_back(padding_factor(used[j], dims[j], constrained));
            }
        } else {
            residual -= term.sigma * outer<double>(term.factors);
        }
        term = term.canonical();
        for (std::size_t j = 0; j < d; ++j) {
            used[j].push_back(term.factors[j]);
        }
        out.trace.steps.push_back({term, frobenius_norm(residual), out.trace.stopped_early});
        out.decomposition.terms.push_back(std::move(term));
    }
    for (const auto& term : out.decomposition.terms) {
        const double p = inner_rank_one<double>(tensor, term.factors);
        out.objective += p * p;
    }
    out.residual = frobenius_norm(residual);
    return out;
}

DeflationGap deflation_gap(const Tensor& tensor, std::size_t rank, const Notion& notion,
                           const SolverConfig& config) {
    DeflationGap out;
    out.notion = notion;
    out.rank = rank;
    out.deflation = deflate(tensor, rank, true, config);
    ApproxProblem problem{tensor, notion, rank, false, false, config};
    out.direct = solve(problem);
    out.deflation_objective = out.deflation.objective;
    out.direct_objective = out.direct.objective;
    out.gap = out.direct_objective - out.deflation_objective;
    out.deflation_residual = out.deflation.residual;
    out.direct_residual = out.direct.residual;
    Decomposition unit = out.deflation.decomposition;
    for (auto& term : unit.terms) {
        term.sigma = term.sigma == 0.0 ? 0.0 : std::copysign(1.0, term.sigma);
    }
    const Tensor sum = assemble(unit);
    const double sum_norm = frobenius_norm(sum);
    out.deflation_alignment = sum_norm == 0.0 ? 0.0 : std::abs(inner(tensor, sum)) / sum_norm;
    out.class_norm = std::sqrt(std::max(out.direct_objective, 0.0));
    return out;
}

} // namespace symortho
