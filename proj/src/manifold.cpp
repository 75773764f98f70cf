#include "symortho/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/SVD>

#include "symortho/parallel.hpp"

namespace symortho {

void FrameLayout::validate(const std::vector<std::size_t>& dims) const {
    for (const auto& b : blocks) {
        if (b.cols == 0 || b.cols > b.dim) {
            throw ShapeError("frame block " + std::to_string(b.dim) + "x" + std::to_string(b.cols) +
                             " cannot hold orthonormal columns");
        }
    }
    for (const auto& term : factors) {
        if (term.size() != dims.size()) {
            throw ShapeError("layout term order does not match tensor order");
        }
        for (std::size_t j = 0; j < term.size(); ++j) {
            const auto& src = term[j];
            if (src.block >= blocks.size() || src.column + src.width > blocks[src.block].cols) {
                throw ShapeError("layout factor source out of range");
            }
            if (blocks[src.block].dim != dims[j]) {
                throw ShapeError("layout block dimension does not match mode " + std::to_string(j));
            }
            if (src.coefficient) {
                const auto& c = blocks.at(*src.coefficient);
                if (c.cols != 1 || c.dim != src.width) {
                    throw ShapeError("coefficient block must be a unit vector of the source width");
                }
            } else if (src.width != 1) {
                throw ShapeError("multi-column factor source requires a coefficient block");
            }
        }
    }
}

LayoutObjective::LayoutObjective(const Tensor& tensor, FrameLayout layout)
    : tensor_(tensor), layout_(std::move(layout)) {
    layout_.validate(tensor.dims());
    const double norm = frobenius_norm(tensor);
    scale_ = norm * norm;
}

FactorLists LayoutObjective::factors(const FramePoint& x) const {
    FactorLists out(layout_.factors.size());
    for (std::size_t k = 0; k < layout_.factors.size(); ++k) {
        out[k].reserve(layout_.factors[k].size());
        for (const auto& src : layout_.factors[k]) {
            const Mat& b = x[src.block];
            if (src.coefficient) {
                out[k].push_back(b.middleCols(static_cast<Eigen::Index>(src.column),
                                              static_cast<Eigen::Index>(src.width)) *
                                 x[*src.coefficient].col(0));
            } else {
                out[k].push_back(b.col(static_cast<Eigen::Index>(src.column)));
            }
        }
    }
    return out;
}

double LayoutObjective::value(const FramePoint& x) const {
    double total = 0.0;
    for (const auto& term : factors(x)) {
        const double p = contract_all<double>(tensor_, term);
        total += p * p;
    }
    return total;
}

double LayoutObjective::value_and_gradient(const FramePoint& x, FramePoint& gradient) const {
    gradient.resize(x.size());
    for (std::size_t b = 0; b < x.size(); ++b) {
        gradient[b] = Mat::Zero(x[b].rows(), x[b].cols());
    }
    const auto fac = factors(x);
    double total = 0.0;
    const std::size_t d = tensor_.order();
    std::vector<Vec> partial(d);
    for (std::size_t k = 0; k < fac.size(); ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            partial[j] = contract_except<double>(tensor_, fac[k], j);
        }
        const double p = partial[0].dot(fac[k][0]);
        total += p * p;
        for (std::size_t j = 0; j < d; ++j) {
            const Vec g = 2.0 * p * partial[j];
            const auto& src = layout_.factors[k][j];
            if (src.coefficient) {
                const auto col = static_cast<Eigen::Index>(src.column);
                const auto width = static_cast<Eigen::Index>(src.width);
                const Vec& c = x[*src.coefficient].col(0);
                gradient[src.block].middleCols(col, width) += g * c.transpose();
                gradient[*src.coefficient].col(0) += x[src.block].middleCols(col, width).transpose() * g;
            } else {
                gradient[src.block].col(static_cast<Eigen::Index>(src.column)) += g;
            }
        }
    }
    return total;
}

Mat polar(const Mat& a) {
    if (a.cols() == 1) {
        const double n = a.norm();
        return n > 0.0 ? Mat(a / n) : a;
    }
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().transpose();
}

Mat project_tangent(const Mat& x, const Mat& g) {
    const Mat xtg = x.transpose() * g;
    return g - x * (0.5 * (xtg + xtg.transpose()));
}

FramePoint random_point(const std::vector<FrameBlock>& blocks, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    FramePoint x;
    x.reserve(blocks.size());
    for (const auto& b : blocks) {
        Mat m(static_cast<Eigen::Index>(b.dim), static_cast<Eigen::Index>(b.cols));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                m(r, c) = normal(rng);
            }
        }
        x.push_back(polar(m));
    }
    return x;
}

namespace {

double squared_norm(const FramePoint& x) {
    double s = 0.0;
    for (const auto& m : x) {
        s += m.squaredNorm();
    }
    return s;
}

double dot(const FramePoint& a, const FramePoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i].array() * b[i].array()).sum();
    }
    return s;
}

FramePoint riemannian_gradient(const FramePoint& x, const FramePoint& euclidean) {
    FramePoint out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = project_tangent(x[i], euclidean[i]);
    }
    return out;
}

FramePoint retract(const FramePoint& x, const FramePoint& direction, double step) {
    FramePoint out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = polar(x[i] + step * direction[i]);
    }
    return out;
}

} // namespace

AscentResult ascend(const SmoothObjective& objective, FramePoint start,
                    const AscentOptions& options) {
    AscentResult result;
    FramePoint x = std::move(start);
    FramePoint euclid;
    double f = objective.value_and_gradient(x, euclid);
    FramePoint xi = riemannian_gradient(x, euclid);
    double gnorm = std::sqrt(squared_norm(xi));
    const double scale = std::max(objective.scale(), std::numeric_limits<double>::min());
    const double tol = options.grad_tol * scale;
    if (options.record_history) {
        result.history.push_back(f);
    }
    double step = 1.0 / scale;
    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
        if (gnorm <= tol) {
            result.converged = true;
            break;
        }
        // Keep the trial move within about one radian so the retraction stays meaningful.
        step = std::min(step, 1.0 / gnorm);
        bool accepted = false;
        FramePoint y;
        double fy = f;
        for (int ls = 0; ls < 60; ++ls) {
            y = retract(x, xi, step);
            fy = objective.value(y);
            if (fy >= f + 1e-4 * step * gnorm * gnorm && fy > f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No representable ascent left along the gradient; the iterate is stationary to
            // working precision.
            result.converged = gnorm <= 1e3 * tol;
            break;
        }
        FramePoint euclid_y;
        fy = objective.value_and_gradient(y, euclid_y);
        if (fy <= f) {
            // The gain was below the rounding difference between the two evaluation paths.
            result.converged = gnorm <= 1e3 * tol;
            break;
        }
        FramePoint xi_y = riemannian_gradient(y, euclid_y);
        // Barzilai-Borwein proposal from ambient differences.
        FramePoint s(x.size()), dg(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            s[i] = y[i] - x[i];
            dg[i] = xi_y[i] - xi[i];
        }
        const double ss = squared_norm(s);
        const double sy = dot(s, dg);
        if (fy < f) {
            result.monotone = false;
        }
        x = std::move(y);
        f = fy;
        xi = std::move(xi_y);
        gnorm = std::sqrt(squared_norm(xi));
        if (options.record_history) {
            result.history.push_back(f);
        }
        step = std::abs(sy) > 0.0 ? ss / std::abs(sy) : 2.0 * step;
        step = std::clamp(step, 1e-12 / scale, 1e12 / scale);
    }
    result.point = std::move(x);
    result.value = f;
    result.gradient_norm = gnorm;
    result.iterations = iter;
    if (!result.converged && gnorm <= tol) {
        result.converged = true;
    }
    return result;
}

std::mt19937_64 start_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

unsigned resolve_threads(unsigned requested) {
    unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SYMORTHO_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) {
            n = std::min<unsigned>(n, static_cast<unsigned>(cap));
        }
    }
    return std::max(1u, n);
}

std::vector<AscentResult> multi_start(const SmoothObjective& objective, std::size_t count,
                                      std::uint64_t seed, std::uint64_t stream,
                                      const AscentOptions& options, unsigned threads) {
    std::vector<AscentResult> results(count);
    parallel_for(count, threads, [&](std::size_t i) {
        auto rng = start_rng(seed, stream, i);
        results[i] = ascend(objective, random_point(objective.blocks(), rng), options);
    });
    return results;
}

} // namespace symortho
