#include "symortho/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "symortho/layouts.hpp"

namespace symortho {

namespace {

constexpr double kPi = std::numbers::pi;

/// Rotation about z by t, or its first or second derivative in t.
Mat rot_z(double t, int derivative) {
    const double c = std::cos(t), s = std::sin(t);
    Mat m = Mat::Zero(3, 3);
    switch (derivative) {
    case 0:
        m << c, -s, 0, s, c, 0, 0, 0, 1;
        break;
    case 1:
        m << -s, -c, 0, c, -s, 0, 0, 0, 0;
        break;
    default:
        m << -c, s, 0, -s, -c, 0, 0, 0, 0;
        break;
    }
    return m;
}

/// Rotation about y by t, or its first or second derivative in t.
Mat rot_y(double t, int derivative) {
    const double c = std::cos(t), s = std::sin(t);
    Mat m = Mat::Zero(3, 3);
    switch (derivative) {
    case 0:
        m << c, 0, s, 0, 1, 0, -s, 0, c;
        break;
    case 1:
        m << -s, 0, c, 0, 0, 0, -c, 0, -s;
        break;
    default:
        m << -c, 0, -s, 0, 0, 0, s, 0, -c;
        break;
    }
    return m;
}

/// Full contraction of T with one vector per mode, without temporaries.
double contract_full(const Tensor& t, const std::vector<const Vec*>& v) {
    const std::size_t d = t.order();
    const auto& dims = t.dims();
    std::vector<std::size_t> idx(d, 0);
    double total = 0.0;
    const auto data = t.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        double prod = data[flat];
        for (std::size_t j = 0; j < d && prod != 0.0; ++j) {
            prod *= (*v[j])(static_cast<Eigen::Index>(idx[j]));
        }
        total += prod;
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < dims[j]) {
                break;
            }
            idx[j] = 0;
        }
    }
    return total;
}

/// A factor and its first and second derivatives in the angles it depends on.
struct FactorJet {
    Vec v;
    std::vector<std::pair<std::size_t, Vec>> first;
    std::vector<std::tuple<std::size_t, std::size_t, Vec>> second;
};

/// Value, gradient and Hessian of the objective in angle coordinates.
struct Taylor {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
};

/**
 * A layout whose blocks are driven by angles: one per 2-dimensional block
 * (the block is the leading columns of a plane rotation), or ZYZ Euler angles
 * of a 3-dimensional rotation (two angles when only one column is used).
 */
class AngleSpace {
public:
    AngleSpace(const Tensor& tensor, FrameLayout layout, bool euler)
        : tensor_(tensor), objective_(tensor, std::move(layout)), euler_(euler) {
        const auto& blocks = objective_.blocks();
        if (euler_) {
            const std::size_t cols = blocks.front().cols;
            if (cols == 1) {
                // The third column of Rz(a) Ry(b) does not depend on the last angle; v and -v
                // give the same objective, so the upper hemisphere suffices.
                columns_ = {2};
                ranges_ = {{0.0, 2.0 * kPi}, {0.0, 0.5 * kPi}};
            } else {
                for (std::size_t c = 0; c < cols; ++c) {
                    columns_.push_back(c);
                }
                ranges_ = {{0.0, 2.0 * kPi}, {0.0, kPi}, {0.0, kPi}};
            }
            const double k = static_cast<double>(ranges_.size());
            l1_ = std::sqrt(k);
            l2_ = k;
            l3_ = k * std::sqrt(k);
        } else {
            ranges_.assign(blocks.size(), {0.0, kPi});
        }
    }

    std::size_t count() const { return ranges_.size(); }
    const std::vector<std::pair<double, double>>& ranges() const { return ranges_; }
    const LayoutObjective& objective() const { return objective_; }
    const std::string& label() const { return objective_.layout().label; }

    FramePoint point(const std::vector<double>& th) const {
        const auto& blocks = objective_.blocks();
        FramePoint x;
        if (euler_) {
            const Mat r = rotation(th, {0, 0, 0});
            Mat m(3, static_cast<Eigen::Index>(columns_.size()));
            for (std::size_t c = 0; c < columns_.size(); ++c) {
                m.col(static_cast<Eigen::Index>(c)) = r.col(static_cast<Eigen::Index>(columns_[c]));
            }
            x.push_back(std::move(m));
            return x;
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const double c = std::cos(th[b]), s = std::sin(th[b]);
            Mat m(2, 2);
            m << c, -s, s, c;
            x.push_back(m.leftCols(static_cast<Eigen::Index>(blocks[b].cols)));
        }
        return x;
    }

    double value(const std::vector<double>& th) const { return objective_.value(point(th)); }

    double value_and_gradient(const std::vector<double>& th, std::vector<double>& grad) const {
        const Taylor t = taylor(th, false);
        grad.assign(t.gradient.data(), t.gradient.data() + t.gradient.size());
        return t.value;
    }

    Taylor taylor(const std::vector<double>& th, bool with_hessian) const {
        const std::size_t k = count();
        const auto& layout = objective_.layout();
        const std::size_t d = tensor_.order();
        std::vector<Mat> frames, first(k), second(k * k);
        if (euler_) {
            const Mat r = rotation(th, {0, 0, 0});
            for (std::size_t a = 0; a < k; ++a) {
                std::array<int, 3> order{0, 0, 0};
                order[a] = 1;
                first[a] = rotation(th, order);
                for (std::size_t b = 0; b < k; ++b) {
                    std::array<int, 3> o2{0, 0, 0};
                    o2[a] += 1;
                    o2[b] += 1;
                    second[a * k + b] = rotation(th, o2);
                }
            }
            frames.push_back(r);
        }
        std::vector<std::vector<FactorJet>> jets(layout.rank(), std::vector<FactorJet>(d));
        for (std::size_t term = 0; term < layout.rank(); ++term) {
            for (std::size_t j = 0; j < d; ++j) {
                const auto& src = layout.factors[term][j];
                FactorJet& jet = jets[term][j];
                if (euler_) {
                    const auto col = static_cast<Eigen::Index>(columns_[src.column]);
                    jet.v = frames[0].col(col);
                    for (std::size_t a = 0; a < k; ++a) {
                        jet.first.emplace_back(a, first[a].col(col));
                        for (std::size_t b = 0; b < k; ++b) {
                            jet.second.emplace_back(a, b, second[a * k + b].col(col));
                        }
                    }
                } else {
                    const double c = std::cos(th[src.block]), s = std::sin(th[src.block]);
                    jet.v = src.column == 0 ? Vec{{c, s}} : Vec{{-s, c}};
                    jet.first.emplace_back(src.block, Vec{{-jet.v(1), jet.v(0)}});
                    jet.second.emplace_back(src.block, src.block, -jet.v);
                }
            }
        }
        Taylor out;
        out.gradient = Vec::Zero(static_cast<Eigen::Index>(k));
        out.hessian = Mat::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        std::vector<const Vec*> v(d);
        for (const auto& term : jets) {
            for (std::size_t j = 0; j < d; ++j) {
                v[j] = &term[j].v;
            }
            const double p = contract_full(tensor_, v);
            Vec dp = Vec::Zero(static_cast<Eigen::Index>(k));
            Mat d2p = Mat::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
            for (std::size_t j = 0; j < d; ++j) {
                for (const auto& [a, w] : term[j].first) {
                    v[j] = &w;
                    dp(static_cast<Eigen::Index>(a)) += contract_full(tensor_, v);
                    if (with_hessian) {
                        for (std::size_t jj = 0; jj < d; ++jj) {
                            if (jj == j) {
                                continue;
                            }
                            for (const auto& [b, ww] : term[jj].first) {
                                v[jj] = &ww;
                                d2p(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                                    contract_full(tensor_, v);
                            }
                            v[jj] = &term[jj].v;
                        }
                    }
                    v[j] = &term[j].v;
                }
                if (with_hessian) {
                    for (const auto& [a, b, w] : term[j].second) {
                        v[j] = &w;
                        d2p(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                            contract_full(tensor_, v);
                    }
                    v[j] = &term[j].v;
                }
            }
            out.value += p * p;
            out.gradient += 2.0 * p * dp;
            if (with_hessian) {
                out.hessian += 2.0 * (dp * dp.transpose() + p * d2p);
            }
        }
        return out;
    }

    /// Bound on |third directional derivative| of the objective along unit angle directions.
    double third_derivative_bound() const {
        const double sigma = unfolding_spectral_bound(tensor_);
        const double r = static_cast<double>(objective_.layout().rank());
        const double d = static_cast<double>(tensor_.order());
        // The terms of every supported layout are mutually orthogonal, so sum p_k^2 <= ||T||^2.
        const double p_sum = std::min(std::sqrt(r) * frobenius_norm(tensor_), r * sigma);
        const double a1 = d * sigma * l1_;
        const double a2 = sigma * (d * l2_ + d * (d - 1.0) * l1_ * l1_);
        const double a3 = sigma * (d * l3_ + 3.0 * d * (d - 1.0) * l1_ * l2_ +
                                   d * (d - 1.0) * (d - 2.0) * l1_ * l1_ * l1_);
        return 2.0 * (3.0 * r * a1 * a2 + p_sum * a3);
    }

private:
    /// Rz(a) Ry(b) Rz(c) with each factor differentiated order[i] times (c = 0 with two angles).
    Mat rotation(const std::vector<double>& th, std::array<int, 3> order) const {
        const double c = th.size() > 2 ? th[2] : 0.0;
        return rot_z(th[0], order[0]) * rot_y(th[1], order[1]) * rot_z(c, order[2]);
    }

    const Tensor& tensor_;
    LayoutObjective objective_;
    bool euler_;
    std::vector<std::size_t> columns_;
    std::vector<std::pair<double, double>> ranges_;
    // Bounds on the first three directional derivatives of a factor along unit directions.
    double l1_ = 1.0;
    double l2_ = 1.0;
    double l3_ = 1.0;
};

struct Cell {
    std::vector<double> center;
    std::vector<double> half;
    int depth = 0;
};

struct Spaces {
    std::vector<FrameLayout> layouts;
    bool euler = false;
    /// The objective is invariant under permuting the angles, so sorted angles suffice.
    bool sorted = false;
};

/// Whether some point of the box has nondecreasing coordinates.
bool meets_sorted_region(const Cell& c) {
    double floor = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.center.size(); ++i) {
        floor = std::max(floor, c.center[i] - c.half[i]);
        if (floor > c.center[i] + c.half[i]) {
            return false;
        }
    }
    return true;
}

bool all_equal(const std::vector<std::size_t>& dims, std::size_t n) {
    return std::all_of(dims.begin(), dims.end(), [&](std::size_t m) { return m == n; });
}

Spaces spaces_for(const ApproxProblem& problem) {
    problem.config.validate();
    const Tensor& t = problem.tensor;
    const auto& dims = t.dims();
    problem.notion.validate(t.order());
    if (problem.rank == 0) {
        throw ArgumentError("rank must be positive");
    }
    if (problem.symmetric_constraint) {
        if (!t.is_cubical() || !is_symmetric(t)) {
            throw ArgumentError("symmetric constraint requires a symmetric tensor");
        }
    }
    const NotionKind kind = problem.notion.kind;
    const std::size_t r = problem.rank;
    Spaces out;
    auto symmetric_rank = [&](std::size_t n) {
        if (kind == NotionKind::CON || kind == NotionKind::PCON) {
            if (r > n) {
                throw InfeasibleError("rank exceeds the dimension");
            }
            return r;
        }
        return std::min(r, n);
    };
    if (all_equal(dims, 3) && problem.symmetric_constraint) {
        out.euler = true;
        out.layouts.push_back(con_layout(dims, symmetric_rank(3), true));
        return out;
    }
    if (!all_equal(dims, 2)) {
        throw UnsupportedError("grid oracle supports dimension 2 in every mode, or symmetric terms in "
                               "dimension 3");
    }
    if (problem.symmetric_constraint) {
        out.layouts.push_back(con_layout(dims, symmetric_rank(2), true));
    } else if (r == 1) {
        out.layouts.push_back(free_layout(dims, 1));
        out.sorted = is_symmetric(t);
    } else if (kind == NotionKind::CON) {
        if (r > 2) {
            throw InfeasibleError("CON needs rank <= 2 in dimension 2");
        }
        out.layouts.push_back(con_layout(dims, r, false));
        // Mode j of every term reads block j, so permuting modes of a symmetric T permutes blocks.
        out.sorted = is_symmetric(t);
    } else if (kind == NotionKind::PCON) {
        if (r > 2) {
            throw InfeasibleError("PCON needs rank <= 2 in dimension 2");
        }
        out.layouts.push_back(pcon_layout(dims, r, problem.notion.modes, problem.structured));
    } else {
        if (r > 3) {
            throw UnsupportedError("grid oracle enumerates SON/ON configurations only up to rank 3");
        }
        for (std::size_t rr = 1; rr <= r; ++rr) {
            if (kind == NotionKind::SON) {
                for (const auto& p : son_patterns(dims, rr, is_symmetric(t), nullptr)) {
                    out.layouts.push_back(son_layout(dims, p));
                }
            } else {
                for (const auto& p : on_patterns(dims, rr, is_symmetric(t))) {
                    if (auto layout = on_layout(dims, p)) {
                        out.layouts.push_back(std::move(*layout));
                    }
                }
            }
        }
    }
    for (const auto& layout : out.layouts) {
        if (layout.blocks.size() > 4) {
            throw UnsupportedError("search space '" + layout.label + "' needs " +
                                   std::to_string(layout.blocks.size()) +
                                   " angles; the grid oracle handles at most 4");
        }
        for (const auto& row : layout.factors) {
            for (const auto& src : row) {
                if (src.coefficient) {
                    throw UnsupportedError("search space '" + layout.label +
                                           "' is not angle-parametrizable");
                }
            }
        }
    }
    return out;
}

/// Gradient ascent in angle coordinates with backtracking; returns the final angles.
std::vector<double> angle_ascent(const AngleSpace& space, std::vector<double> th, double scale,
                                 double& value) {
    // Newton steps where the model is concave, gradient steps elsewhere, both safeguarded by
    // backtracking. A fixed gradient step can bounce between mirror points of a round maximum.
    std::vector<double> trial(th.size());
    Taylor tay = space.taylor(th, true);
    value = tay.value;
    double step = 0.5 / std::max(scale, 1e-300);
    for (int it = 0; it < 200; ++it) {
        if (tay.gradient.norm() <= 1e-13 * scale) {
            break;
        }
        Eigen::SelfAdjointEigenSolver<Mat> eig(tay.hessian);
        const bool concave = eig.eigenvalues().maxCoeff() < 0.0;
        Vec dir;
        double t = 1.0;
        if (concave) {
            const Vec proj = eig.eigenvectors().transpose() * tay.gradient;
            dir = eig.eigenvectors() * (proj.array() / (-eig.eigenvalues().array())).matrix();
        } else {
            dir = tay.gradient;
            t = step;
        }
        const double slope = tay.gradient.dot(dir);
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t i = 0; i < th.size(); ++i) {
                trial[i] = th[i] + t * dir(static_cast<Eigen::Index>(i));
            }
            if (space.value(trial) > value + 1e-4 * t * slope) {
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) {
            break;
        }
        if (!concave) {
            step = 2.0 * t;
        }
        th = trial;
        tay = space.taylor(th, true);
        value = tay.value;
    }
    return th;
}

} // namespace

bool oracle_supports(const ApproxProblem& problem) {
    try {
        spaces_for(problem);
        return true;
    } catch (const UnsupportedError&) {
        return false;
    } catch (const InfeasibleError&) {
        return false;
    }
}

OracleReport grid_oracle(const ApproxProblem& problem, const OracleOptions& options) {
    const Spaces spaces = spaces_for(problem);
    const Tensor& t = problem.tensor;
    const double norm = frobenius_norm(t);
    const double scale = norm * norm;
    OracleReport report;
    report.certification_tol = options.certification_tol;
    report.spaces = spaces.layouts.size();
    report.decomposition.dims = t.dims();
    if (scale == 0.0) {
        report.certified = true;
        return report;
    }
    const double tol = options.certification_tol * scale;

    std::vector<AngleSpace> search;
    for (const auto& layout : spaces.layouts) {
        search.emplace_back(t, layout, spaces.euler);
    }

    // Grid spacing: requested step, widened until every space fits the budget.
    double step = options.grid_step;
    auto grid_count = [&](const AngleSpace& s, double h) {
        double total = 1.0;
        for (const auto& [a, b] : s.ranges()) {
            total *= std::ceil((b - a) / h);
        }
        return total;
    };
    for (const auto& s : search) {
        while (grid_count(s, step) > static_cast<double>(options.grid_budget)) {
            step *= 1.25;
        }
    }
    report.grid_step = step;

    double lo = -1.0;
    std::size_t best_space = 0;
    std::vector<double> best_angles;
    auto offer = [&](double f, std::size_t s, const std::vector<double>& th) {
        if (f > lo) {
            lo = f;
            best_space = s;
            best_angles = th;
        }
    };

    std::vector<std::vector<Cell>> grids(search.size());
    for (std::size_t s = 0; s < search.size(); ++s) {
        const auto& ranges = search[s].ranges();
        const std::size_t k = ranges.size();
        std::vector<std::size_t> counts(k), idx(k, 0);
        std::vector<double> widths(k);
        for (std::size_t i = 0; i < k; ++i) {
            const double span = ranges[i].second - ranges[i].first;
            counts[i] = static_cast<std::size_t>(std::ceil(span / step));
            widths[i] = span / static_cast<double>(counts[i]);
        }
        std::vector<std::pair<double, std::size_t>> ranked;
        while (true) {
            Cell c{std::vector<double>(k), std::vector<double>(k), 0};
            for (std::size_t i = 0; i < k; ++i) {
                c.center[i] = ranges[i].first + (static_cast<double>(idx[i]) + 0.5) * widths[i];
                c.half[i] = 0.5 * widths[i];
            }
            if (!spaces.sorted || meets_sorted_region(c)) {
                const double f = search[s].value(c.center);
                offer(f, s, c.center);
                ranked.emplace_back(f, grids[s].size());
                grids[s].push_back(std::move(c));
            }
            std::size_t i = 0;
            while (i < k && ++idx[i] == counts[i]) {
                idx[i] = 0;
                ++i;
            }
            if (i == k) {
                break;
            }
        }
        report.cells += grids[s].size();
        // Polish the most promising grid points to tighten the lower bound early.
        const std::size_t top = std::min<std::size_t>(16, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top),
                          ranked.end(), [](const auto& a, const auto& b) {
                              return a.first > b.first ||
                                     (a.first == b.first && a.second < b.second);
                          });
        for (std::size_t i = 0; i < top; ++i) {
            double f = 0.0;
            auto th = angle_ascent(search[s], grids[s][ranked[i].second].center, scale, f);
            offer(f, s, th);
        }
    }

    double discarded = -1.0, unresolved = -1.0;
    bool complete = true;
    for (std::size_t s = 0; s < search.size(); ++s) {
        const double m3 = search[s].third_derivative_bound();
        std::vector<Cell> stack = std::move(grids[s]);
        std::size_t evaluated = 0;
        while (!stack.empty()) {
            Cell c = std::move(stack.back());
            stack.pop_back();
            const Taylor tay = search[s].taylor(c.center, true);
            const double f = tay.value;
            ++evaluated;
            offer(f, s, c.center);
            double h2 = 0.0, linear = 0.0;
            for (std::size_t i = 0; i < c.half.size(); ++i) {
                linear += std::abs(tay.gradient(static_cast<Eigen::Index>(i))) * c.half[i];
                h2 += c.half[i] * c.half[i];
            }
            // Quadratic part: bounded box-wise, and separately per Hessian eigendirection over
            // the ball of radius |half|, where each coordinate is maximized exactly.
            Eigen::SelfAdjointEigenSolver<Mat> eig(tay.hessian);
            const Vec& lambda = eig.eigenvalues();
            const Vec proj = eig.eigenvectors().transpose() * tay.gradient;
            const double radius = std::sqrt(h2);
            double per_axis = 0.0;
            for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                const double p = std::abs(proj(i)), l = lambda(i);
                per_axis += l < 0.0 && p <= -l * radius ? 0.5 * p * p / -l : p * radius + 0.5 * l * h2;
            }
            const double quad = std::min(linear + 0.5 * std::max(lambda.maxCoeff(), 0.0) * h2, per_axis);
            const double ub = f + quad + m3 / 6.0 * h2 * std::sqrt(h2);
            report.depth = std::max(report.depth, c.depth);
            if (ub <= lo + tol) {
                discarded = std::max(discarded, ub);
                continue;
            }
            if (c.depth >= options.max_depth || evaluated >= options.max_cells) {
                unresolved = std::max(unresolved, ub);
                complete = false;
                continue;
            }
            const std::size_t k = c.center.size();
            for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
                Cell child{c.center, c.half, c.depth + 1};
                for (std::size_t i = 0; i < k; ++i) {
                    child.half[i] = 0.5 * c.half[i];
                    child.center[i] += ((mask >> i) & 1U ? 1.0 : -1.0) * child.half[i];
                }
                if (!spaces.sorted || meets_sorted_region(child)) {
                    stack.push_back(std::move(child));
                }
            }
        }
        report.cells += evaluated;
    }

    report.lo = lo;
    report.hi = std::max({lo, discarded, unresolved});
    report.certified = complete && report.hi - report.lo <= tol;
    report.best_space = search[best_space].label();
    report.best_angles = best_angles;
    report.decomposition = sigma_from_factors(
        t, search[best_space].objective().factors(search[best_space].point(best_angles)));
    return report;
}

} // namespace symortho
