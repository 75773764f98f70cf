#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "symortho/tensor.hpp"

namespace symortho {

/// A block of the search space: a dim x cols matrix with orthonormal columns.
struct FrameBlock {
    std::size_t dim = 0;
    std::size_t cols = 1;
};

/**
 * Where the factor of one (term, mode) slot comes from.
 *
 * Plain sources read one column of a frame block. With `coefficient` set, the
 * factor is block[:, column : column + width] * c, where c is the single
 * column of the coefficient block (a unit vector of length `width`).
 */
struct FactorSource {
    std::size_t block = 0;
    std::size_t column = 0;
    std::size_t width = 1;
    std::optional<std::size_t> coefficient;
};

/// Parametrization of a family of rank-one term lists by a product of Stiefel manifolds.
struct FrameLayout {
    std::vector<FrameBlock> blocks;
    std::vector<std::vector<FactorSource>> factors; // [term][mode]
    std::string label;

    std::size_t rank() const { return factors.size(); }
    /// Throws ShapeError when the layout cannot produce factors of these dims.
    void validate(const std::vector<std::size_t>& dims) const;
};

using FramePoint = std::vector<Mat>;
using FactorLists = std::vector<std::vector<Vec>>; // [term][mode]

/// Smooth function on a product of Stiefel manifolds, maximized by ascend().
class SmoothObjective {
public:
    virtual ~SmoothObjective() = default;
    virtual const std::vector<FrameBlock>& blocks() const = 0;
    virtual double value(const FramePoint& x) const = 0;
    /// Returns the value and writes the Euclidean gradient (same shapes as x).
    virtual double value_and_gradient(const FramePoint& x, FramePoint& gradient) const = 0;
    /// Magnitude used to make the gradient tolerance scale-free.
    virtual double scale() const = 0;
};

/// sum_k <T, (x)_j v_kj>^2 with factors read through a FrameLayout.
class LayoutObjective final : public SmoothObjective {
public:
    LayoutObjective(const Tensor& tensor, FrameLayout layout);

    const std::vector<FrameBlock>& blocks() const override { return layout_.blocks; }
    double value(const FramePoint& x) const override;
    double value_and_gradient(const FramePoint& x, FramePoint& gradient) const override;
    double scale() const override { return scale_; }

    const FrameLayout& layout() const { return layout_; }
    FactorLists factors(const FramePoint& x) const;

private:
    const Tensor& tensor_;
    FrameLayout layout_;
    double scale_;
};

struct AscentOptions {
    int max_iters = 2000;
    /// Stop once the Riemannian gradient norm is below grad_tol * objective.scale().
    double grad_tol = 1e-9;
    bool record_history = true;
};

struct AscentResult {
    FramePoint point;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool monotone = true;
    std::vector<double> history;
};

/// Closest matrix with orthonormal columns (U V^T from the thin SVD).
Mat polar(const Mat& a);
/// Projection of an ambient direction onto the tangent space of the Stiefel manifold at x.
Mat project_tangent(const Mat& x, const Mat& g);
/// Haar-distributed point of every block.
FramePoint random_point(const std::vector<FrameBlock>& blocks, std::mt19937_64& rng);

/**
 * Riemannian gradient ascent with Barzilai-Borwein step proposals, Armijo
 * backtracking and polar retraction. Every accepted step strictly increases
 * the objective, so the recorded history is nondecreasing.
 */
AscentResult ascend(const SmoothObjective& objective, FramePoint start,
                    const AscentOptions& options);

/// Generator for start `index` of a multi-start run; independent of thread scheduling.
std::mt19937_64 start_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/**
 * Worker count: `requested` when positive, otherwise hardware concurrency;
 * always capped by the SYMORTHO_THREADS environment variable when set.
 */
unsigned resolve_threads(unsigned requested);

/// Runs `count` independent starts of ascend() from random points, results ordered by index.
std::vector<AscentResult> multi_start(const SmoothObjective& objective, std::size_t count,
                                      std::uint64_t seed, std::uint64_t stream,
                                      const AscentOptions& options, unsigned threads);

} // namespace symortho
