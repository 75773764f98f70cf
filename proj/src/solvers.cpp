#include "symortho/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "symortho/layouts.hpp"
#include "symortho/parallel.hpp"

namespace symortho {

namespace {

// Stream ids keep the random starts of different searches independent.
constexpr std::uint64_t kHopmStream = 1;
constexpr std::uint64_t kFrameStream = 100;
constexpr std::uint64_t kPenaltyStream = 50'000;
constexpr std::uint64_t kPolishStream = 60'000;

struct Candidate {
    FactorLists factors;
    double value = -1.0;
    std::string pattern;
    std::string phase;
    std::size_t start = 0;
    std::vector<double> history;
    bool heuristic = false;
};

Vec canonical_sign(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            return v(i) < 0.0 ? Vec(-v) : v;
        }
    }
    return v;
}

bool factors_less(const FactorLists& a, const FactorLists& b) {
    if (a.size() != b.size()) {
        return a.size() < b.size();
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t j = 0; j < a[k].size(); ++j) {
            const Vec x = canonical_sign(a[k][j]);
            const Vec y = canonical_sign(b[k][j]);
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (x(i) != y(i)) {
                    return x(i) < y(i);
                }
            }
        }
    }
    return false;
}

/// True when `a` should replace the incumbent `b`: higher value, ties by canonical factor order.
bool better(const Candidate& a, const Candidate& b, double scale) {
    if (b.value < 0.0) {
        return true;
    }
    const double tie = 1e-12 * std::max(scale, 1e-300);
    if (a.value > b.value + tie) {
        return true;
    }
    if (a.value < b.value - tie) {
        return false;
    }
    return factors_less(a.factors, b.factors);
}

AscentOptions ascent_options(const SolverConfig& config) {
    AscentOptions o;
    o.max_iters = config.max_iters;
    o.grad_tol = config.grad_tol;
    o.record_history = true;
    return o;
}

double squared_norm(const Tensor& t) {
    const double n = frobenius_norm(t);
    return n * n;
}

void check_symmetric_input(const Tensor& t) {
    if (!t.is_cubical()) {
        throw ShapeError("symmetric terms need a cubical tensor");
    }
    if (!is_symmetric(t)) {
        throw ArgumentError("symmetric constraint requires a symmetric tensor");
    }
}

void check_problem(const ApproxProblem& problem) {
    problem.config.validate();
    problem.notion.validate(problem.tensor.order());
    if (problem.rank == 0) {
        throw ArgumentError("rank must be positive");
    }
    if (problem.symmetric_constraint) {
        check_symmetric_input(problem.tensor);
    }
    if (problem.structured && problem.notion.kind != NotionKind::PCON) {
        throw ArgumentError("structured mode only applies to PCON");
    }
}

std::size_t min_dim(const std::vector<std::size_t>& dims) {
    return *std::min_element(dims.begin(), dims.end());
}

ApproxResult finalize(const Tensor& tensor, const Notion& notion, const Candidate& best,
                      std::vector<StartTrace> traces) {
    ApproxResult result;
    result.notion = notion;
    result.decomposition = sigma_from_factors(tensor, best.factors);
    result.objective = 0.0;
    for (const auto& term : result.decomposition.terms) {
        result.objective += term.sigma * term.sigma;
    }
    const double norm = frobenius_norm(tensor);
    result.residual = frobenius_norm(tensor - assemble(result.decomposition));
    result.relative_residual = norm > 0.0 ? result.residual / norm : 0.0;
    result.certificate = decomposition_check(result.decomposition, notion);
    result.starts = std::move(traces);
    result.best_history = best.history;
    result.best_start = best.start;
    result.phase = best.phase;
    result.pattern = best.pattern;
    result.heuristic = best.heuristic;
    return result;
}

ApproxResult zero_result(const Tensor& tensor, const Notion& notion) {
    ApproxResult result;
    result.notion = notion;
    result.decomposition.dims = tensor.dims();
    result.certificate = decomposition_check(result.decomposition, notion);
    result.phase = "zero";
    result.degenerate = true;
    return result;
}

struct SearchState {
    Candidate best;
    std::vector<StartTrace> traces;
    double scale = 0.0;

    void offer(Candidate c) {
        if (better(c, best, scale)) {
            best = std::move(c);
        }
    }
};

/// Multi-start ascent over one layout; traces are appended in start order.
void search_layout(const Tensor& tensor, const FrameLayout& layout, const SolverConfig& config,
                   std::uint64_t stream, const std::string& phase, SearchState& state) {
    LayoutObjective objective(tensor, layout);
    auto runs = multi_start(objective, static_cast<std::size_t>(config.starts), config.seed, stream,
                            ascent_options(config), resolve_threads(config.threads));
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto& run = runs[i];
        state.traces.push_back(
            {layout.label, i, run.value, run.iterations, run.converged, run.monotone});
        Candidate c{objective.factors(run.point), run.value, layout.label, phase, i,
                    std::move(run.history), false};
        state.offer(std::move(c));
    }
}

FactorLists factors_of_free_point(const FramePoint& x, std::size_t rank, std::size_t order) {
    FactorLists f(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t j = 0; j < order; ++j) {
            f[k].push_back(x[k * order + j].col(0));
        }
    }
    return f;
}

/**
 * sum_k <T, v_k>^2 minus weight * (sum over pairs of prod_j a_j^2, plus for
 * strong orthogonality sum_j a_j^2 (1 - a_j^2)), a_j = <v_kj, v_lj>.
 */
class PenaltyObjective final : public SmoothObjective {
public:
    PenaltyObjective(const Tensor& tensor, std::size_t rank, bool strong, double weight)
        : base_(tensor, free_layout(tensor.dims(), rank)), rank_(rank), order_(tensor.order()),
          strong_(strong), weight_(weight) {}

    const std::vector<FrameBlock>& blocks() const override { return base_.blocks(); }
    double scale() const override { return base_.scale(); }

    double value(const FramePoint& x) const override {
        return evaluate(x, nullptr);
    }

    double value_and_gradient(const FramePoint& x, FramePoint& gradient) const override {
        return evaluate(x, &gradient);
    }

private:
    double evaluate(const FramePoint& x, FramePoint* gradient) const {
        double f = gradient ? base_.value_and_gradient(x, *gradient) : base_.value(x);
        double penalty = 0.0;
        std::vector<double> a(order_);
        for (std::size_t k = 0; k < rank_; ++k) {
            for (std::size_t l = k + 1; l < rank_; ++l) {
                double prod = 1.0;
                for (std::size_t j = 0; j < order_; ++j) {
                    a[j] = x[k * order_ + j].col(0).dot(x[l * order_ + j].col(0));
                    prod *= a[j] * a[j];
                }
                penalty += prod;
                for (std::size_t j = 0; j < order_; ++j) {
                    if (strong_) {
                        penalty += a[j] * a[j] * (1.0 - a[j] * a[j]);
                    }
                    if (!gradient) {
                        continue;
                    }
                    double others = 1.0;
                    for (std::size_t i = 0; i < order_; ++i) {
                        others *= i == j ? 1.0 : a[i] * a[i];
                    }
                    double da = 2.0 * a[j] * others;
                    if (strong_) {
                        da += 2.0 * a[j] - 4.0 * a[j] * a[j] * a[j];
                    }
                    const Vec vk = x[k * order_ + j].col(0);
                    const Vec vl = x[l * order_ + j].col(0);
                    (*gradient)[k * order_ + j].col(0) -= weight_ * da * vl;
                    (*gradient)[l * order_ + j].col(0) -= weight_ * da * vk;
                }
            }
        }
        return f - weight_ * penalty;
    }

    LayoutObjective base_;
    std::size_t rank_;
    std::size_t order_;
    bool strong_;
    double weight_;
};

/// Per-mode classes of (nearly) parallel factors; nullopt when they do not form a strong pattern.
std::optional<SonPattern> classify_strong(const FactorLists& f, const std::vector<std::size_t>& dims) {
    const std::size_t r = f.size();
    SonPattern pattern;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        SetPartition labels(r);
        std::iota(labels.begin(), labels.end(), 0);
        for (std::size_t k = 0; k < r; ++k) {
            for (std::size_t l = k + 1; l < r; ++l) {
                if (std::abs(f[k][j].dot(f[l][j])) >= 0.5) {
                    const std::size_t from = labels[l], to = labels[k];
                    for (auto& lab : labels) {
                        lab = lab == from ? to : lab;
                    }
                }
            }
        }
        // Canonical relabel by first occurrence.
        std::vector<std::size_t> seen;
        for (auto& lab : labels) {
            auto it = std::find(seen.begin(), seen.end(), lab);
            if (it == seen.end()) {
                seen.push_back(lab);
                lab = seen.size() - 1;
            } else {
                lab = static_cast<std::size_t>(it - seen.begin());
            }
        }
        if (seen.size() > dims[j]) {
            return std::nullopt;
        }
        pattern.modes.push_back(std::move(labels));
    }
    for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t l = k + 1; l < r; ++l) {
            if (std::none_of(pattern.modes.begin(), pattern.modes.end(),
                             [&](const SetPartition& p) { return p[k] != p[l]; })) {
                return std::nullopt;
            }
        }
    }
    return pattern;
}

/// Pair p is assigned the mode with the smallest |<v_kj, v_lj>|.
OnPattern classify_orthogonal(const FactorLists& f) {
    const std::size_t r = f.size();
    OnPattern pattern{r, {}};
    for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t l = k + 1; l < r; ++l) {
            std::size_t best = 0;
            double smallest = 2.0;
            for (std::size_t j = 0; j < f[k].size(); ++j) {
                const double a = std::abs(f[k][j].dot(f[l][j]));
                if (a < smallest) {
                    smallest = a;
                    best = j;
                }
            }
            pattern.pair_mode.push_back(best);
        }
    }
    return pattern;
}

/// Makes every pair exactly orthogonal in its assigned mode by sequential projection.
FactorLists orthogonalize_pairs(FactorLists f, const OnPattern& pattern, std::mt19937_64& rng) {
    const std::size_t r = f.size();
    std::normal_distribution<double> normal;
    for (std::size_t l = 1; l < r; ++l) {
        for (std::size_t j = 0; j < f[l].size(); ++j) {
            std::vector<Vec> against;
            for (std::size_t k = 0; k < l; ++k) {
                if (pattern.pair_mode[pair_index(k, l, r)] == j) {
                    against.push_back(f[k][j]);
                }
            }
            if (against.empty()) {
                continue;
            }
            Mat basis(f[l][j].size(), static_cast<Eigen::Index>(against.size()));
            for (std::size_t i = 0; i < against.size(); ++i) {
                basis.col(static_cast<Eigen::Index>(i)) = against[i];
            }
            Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinU);
            const Eigen::Index span = (svd.singularValues().array() > 1e-10).count();
            const Mat u = svd.matrixU().leftCols(span);
            Vec v = f[l][j] - u * (u.transpose() * f[l][j]);
            while (v.norm() < 1e-8) {
                for (auto& x : v) {
                    x = normal(rng);
                }
                v -= u * (u.transpose() * v);
            }
            f[l][j] = v.normalized();
        }
    }
    return f;
}

Candidate polish(const Tensor& tensor, const FrameLayout& layout, const FactorLists& start,
                 const SolverConfig& config, std::mt19937_64& rng) {
    LayoutObjective objective(tensor, layout);
    auto run = ascend(objective, point_from_factors(layout, start, rng), ascent_options(config));
    return {objective.factors(run.point), run.value, layout.label, "penalty", 0,
            std::move(run.history), false};
}

/// Penalty ascent from random points, then a feasible polish of every start.
void penalty_phase(const Tensor& tensor, std::size_t rank, bool strong, const SolverConfig& config,
                   SearchState& state) {
    const auto& dims = tensor.dims();
    const std::size_t d = tensor.order();
    const double base_weight = config.penalty.initial_weight * squared_norm(tensor);
    std::vector<Candidate> results(static_cast<std::size_t>(config.starts));
    std::vector<StartTrace> traces(results.size());
    const auto options = ascent_options(config);
    parallel_for(results.size(), resolve_threads(config.threads), [&](std::size_t i) {
        auto rng = start_rng(config.seed, kPenaltyStream + (strong ? 1 : 0), i);
        FramePoint x = random_point(free_layout(dims, rank).blocks, rng);
        double weight = base_weight;
        int iterations = 0;
        for (int round = 0; round < config.penalty.rounds; ++round) {
            PenaltyObjective objective(tensor, rank, strong, weight);
            auto run = ascend(objective, std::move(x), options);
            x = std::move(run.point);
            iterations += run.iterations;
            weight *= config.penalty.growth;
        }
        const FactorLists raw = factors_of_free_point(x, rank, d);
        auto polish_rng = start_rng(config.seed, kPolishStream + (strong ? 1 : 0), i);
        Candidate c;
        if (strong) {
            if (auto pattern = classify_strong(raw, dims)) {
                c = polish(tensor, son_layout(dims, *pattern), raw, config, polish_rng);
            }
        } else {
            const OnPattern pattern = classify_orthogonal(raw);
            const FactorLists feasible = orthogonalize_pairs(raw, pattern, polish_rng);
            if (auto layout = on_layout(dims, pattern)) {
                c = polish(tensor, *layout, feasible, config, polish_rng);
            } else {
                c = {feasible, objective(tensor, feasible), pattern.label(), "penalty", 0, {}, true};
            }
        }
        c.start = i;
        c.phase = "penalty";
        if (c.value >= 0.0) {
            c.heuristic = c.heuristic || rank > 3;
        }
        iterations += static_cast<int>(c.history.size());
        traces[i] = {"penalty:" + c.pattern, i, c.value, iterations, c.value >= 0.0, true};
        if (!c.history.empty()) {
            for (std::size_t t = 1; t < c.history.size(); ++t) {
                traces[i].monotone = traces[i].monotone && c.history[t] >= c.history[t - 1];
            }
        }
        results[i] = std::move(c);
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
        state.traces.push_back(traces[i]);
        if (results[i].value >= 0.0) {
            state.offer(std::move(results[i]));
        }
    }
}

ApproxResult symmetric_frame_solve(const ApproxProblem& problem, std::size_t rank) {
    const Tensor& t = problem.tensor;
    if (rank == 1) {
        auto result = rank_one_hopm(t, true, problem.config);
        result.notion = problem.notion;
        result.certificate = decomposition_check(result.decomposition, problem.notion);
        return result;
    }
    SearchState state;
    state.scale = squared_norm(t);
    search_layout(t, con_layout(t.dims(), rank, true), problem.config, kFrameStream, "frame", state);
    return finalize(t, problem.notion, state.best, std::move(state.traces));
}

ApproxResult strong_or_plain(const ApproxProblem& problem, bool strong) {
    check_problem(problem);
    const Tensor& t = problem.tensor;
    if (squared_norm(t) == 0.0) {
        return zero_result(t, problem.notion);
    }
    const auto& dims = t.dims();
    if (problem.symmetric_constraint) {
        // Symmetric terms are (strongly) orthogonal exactly when their vectors are.
        return symmetric_frame_solve(problem, std::min(problem.rank, dims.front()));
    }
    SearchState state;
    state.scale = squared_norm(t);
    std::vector<std::string> infeasible;
    const bool mode_symmetric = t.is_cubical() && is_symmetric(t);
    if (problem.rank <= 3) {
        std::uint64_t stream = kFrameStream;
        for (std::size_t r = 1; r <= problem.rank; ++r) {
            if (strong) {
                for (const auto& pattern : son_patterns(dims, r, mode_symmetric, &infeasible)) {
                    search_layout(t, son_layout(dims, pattern), problem.config, stream++, "pattern",
                                  state);
                }
            } else {
                for (const auto& pattern : on_patterns(dims, r, mode_symmetric)) {
                    if (auto layout = on_layout(dims, pattern)) {
                        search_layout(t, *layout, problem.config, stream++, "pattern", state);
                    } else {
                        infeasible.push_back(pattern.label());
                    }
                }
            }
        }
    }
    penalty_phase(t, problem.rank, strong, problem.config, state);
    if (state.best.value < 0.0) {
        throw InfeasibleError("no feasible configuration of " + std::to_string(problem.rank) +
                              " terms was found");
    }
    auto result = finalize(t, problem.notion, state.best, std::move(state.traces));
    result.infeasible_patterns = std::move(infeasible);
    return result;
}

} // namespace

void SolverConfig::validate() const {
    if (starts < 1) {
        throw ArgumentError("starts must be at least 1");
    }
    if (max_iters < 1) {
        throw ArgumentError("max_iters must be at least 1");
    }
    if (!(grad_tol > 0.0)) {
        throw ArgumentError("grad_tol must be positive");
    }
    if (!(penalty.initial_weight > 0.0) || !(penalty.growth >= 1.0) || penalty.rounds < 1) {
        throw ArgumentError("penalty schedule needs positive weight, growth >= 1 and rounds >= 1");
    }
}

double objective(const Tensor& tensor, const FactorLists& factors) {
    double total = 0.0;
    for (const auto& term : factors) {
        if (term.size() != tensor.order()) {
            throw ShapeError("objective: term order does not match tensor order");
        }
        const double p = contract_all<double>(tensor, term);
        total += p * p;
    }
    return total;
}

Decomposition sigma_from_factors(const Tensor& tensor, const FactorLists& factors) {
    Decomposition out{tensor.dims(), {}};
    for (const auto& term : factors) {
        if (term.size() != tensor.order()) {
            throw ShapeError("sigma_from_factors: term order does not match tensor order");
        }
        out.terms.push_back(RankOneTerm{contract_all<double>(tensor, term), term}.canonical());
    }
    return out;
}

const Tensor& require_real(const AnyTensor& tensor) {
    if (const auto* real = std::get_if<Tensor>(&tensor)) {
        return *real;
    }
    throw FieldError("the solvers work over the reals; complex tensors are not supported");
}

ApproxResult rank_one_hopm(const Tensor& tensor, bool symmetric, const SolverConfig& config) {
    config.validate();
    if (symmetric) {
        check_symmetric_input(tensor);
    }
    const double norm = frobenius_norm(tensor);
    if (norm == 0.0) {
        return zero_result(tensor, Notion::con());
    }
    const std::size_t d = tensor.order();
    const FrameLayout layout = con_layout(tensor.dims(), 1, symmetric);
    LayoutObjective objective(tensor, layout);
    const auto options = ascent_options(config);
    const bool even = d % 2 == 0;
    const double shift = static_cast<double>(std::max<std::size_t>(d, 2) - 1) * norm;
    std::vector<Candidate> results(static_cast<std::size_t>(config.starts));
    std::vector<StartTrace> traces(results.size());
    parallel_for(results.size(), resolve_threads(config.threads), [&](std::size_t i) {
        auto rng = start_rng(config.seed, kHopmStream, i);
        FramePoint x = random_point(layout.blocks, rng);
        int it = 0;
        double previous = -1.0;
        if (symmetric) {
            // Shifted iteration: ascends s * <T, v^d>; even orders also search the negative side.
            const double s = (even && i % 2 == 1) ? -1.0 : 1.0;
            std::vector<Vec> v(d, x[0].col(0));
            for (; it < config.max_iters; ++it) {
                const Vec g = contract_except<double>(tensor, v, 0);
                const double lambda = s * g.dot(v[0]);
                Vec next = s * g + shift * v[0];
                next.normalize();
                std::fill(v.begin(), v.end(), next);
                if (std::abs(lambda - previous) <= 1e-15 * norm) {
                    break;
                }
                previous = lambda;
            }
            x[0].col(0) = v[0];
        } else {
            std::vector<Vec> v(d);
            for (std::size_t j = 0; j < d; ++j) {
                v[j] = x[j].col(0);
            }
            for (; it < config.max_iters; ++it) {
                double sigma = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const Vec g = contract_except<double>(tensor, v, j);
                    sigma = g.norm();
                    if (sigma == 0.0) {
                        break;
                    }
                    v[j] = g / sigma;
                }
                if (std::abs(sigma - previous) <= 1e-15 * norm) {
                    break;
                }
                previous = sigma;
            }
            for (std::size_t j = 0; j < d; ++j) {
                x[j].col(0) = v[j];
            }
        }
        auto run = ascend(objective, std::move(x), options);
        traces[i] = {"hopm", i, run.value, it + run.iterations, run.converged, run.monotone};
        results[i] = {objective.factors(run.point), run.value, "hopm", "hopm", i,
                      std::move(run.history), false};
    });
    SearchState state;
    state.scale = norm * norm;
    for (auto& c : results) {
        state.offer(std::move(c));
    }
    return finalize(tensor, Notion::con(), state.best, std::move(traces));
}

ApproxResult solve_con(const ApproxProblem& problem) {
    check_problem(problem);
    const Tensor& t = problem.tensor;
    const auto& dims = t.dims();
    if (problem.rank > min_dim(dims)) {
        throw InfeasibleError("CON needs rank <= smallest dimension (" +
                              std::to_string(min_dim(dims)) + "), got " +
                              std::to_string(problem.rank));
    }
    if (squared_norm(t) == 0.0) {
        return zero_result(t, problem.notion);
    }
    if (problem.rank == 1) {
        auto result = rank_one_hopm(t, problem.symmetric_constraint, problem.config);
        result.notion = problem.notion;
        return result;
    }
    SearchState state;
    state.scale = squared_norm(t);
    search_layout(t, con_layout(dims, problem.rank, problem.symmetric_constraint), problem.config,
                  kFrameStream, "frame", state);
    return finalize(t, problem.notion, state.best, std::move(state.traces));
}

ApproxResult solve_son(const ApproxProblem& problem) {
    if (problem.notion.kind != NotionKind::SON) {
        throw ArgumentError("solve_son needs the SON notion");
    }
    return strong_or_plain(problem, true);
}

ApproxResult solve_on(const ApproxProblem& problem) {
    if (problem.notion.kind != NotionKind::ON) {
        throw ArgumentError("solve_on needs the ON notion");
    }
    auto result = strong_or_plain(problem, false);
    if (result.degenerate || problem.symmetric_constraint) {
        return result;
    }
    // Strongly orthogonal terms are orthogonal; keep whichever search did better.
    ApproxProblem strong = problem;
    strong.notion = Notion::son();
    auto son = strong_or_plain(strong, true);
    if (son.objective > result.objective + 1e-12 * squared_norm(problem.tensor)) {
        son.notion = problem.notion;
        son.certificate = decomposition_check(son.decomposition, problem.notion);
        son.infeasible_patterns.insert(son.infeasible_patterns.begin(),
                                       result.infeasible_patterns.begin(),
                                       result.infeasible_patterns.end());
        son.starts.insert(son.starts.begin(), result.starts.begin(), result.starts.end());
        return son;
    }
    result.starts.insert(result.starts.end(), son.starts.begin(), son.starts.end());
    return result;
}

ApproxResult solve_pcon(const ApproxProblem& problem) {
    if (problem.notion.kind != NotionKind::PCON) {
        throw ArgumentError("solve_pcon needs the PCON notion");
    }
    check_problem(problem);
    const Tensor& t = problem.tensor;
    const auto& dims = t.dims();
    std::size_t limit = dims[problem.notion.modes.front()];
    for (auto j : problem.notion.modes) {
        limit = std::min(limit, dims[j]);
    }
    if (problem.rank > limit) {
        throw InfeasibleError("PCON needs rank <= smallest dimension in the mode subset (" + std::to_string(limit) +
                              "), got " + std::to_string(problem.rank));
    }
    if (squared_norm(t) == 0.0) {
        return zero_result(t, problem.notion);
    }
    SearchState state;
    state.scale = squared_norm(t);
    const FrameLayout layout = problem.symmetric_constraint
                                   ? con_layout(dims, problem.rank, true)
                                   : pcon_layout(dims, problem.rank, problem.notion.modes,
                                                 problem.structured);
    search_layout(t, layout, problem.config, kFrameStream, "frame", state);
    return finalize(t, problem.notion, state.best, std::move(state.traces));
}

ApproxResult solve_cross(const ApproxProblem& problem) {
    check_problem(problem);
    const Tensor& t = problem.tensor;
    const auto& dims = t.dims();
    if (!t.is_cubical()) {
        throw ShapeError("cross orthogonality needs equal dimensions in every mode");
    }
    if (problem.rank > dims.front()) {
        throw InfeasibleError("cross orthogonality needs rank <= dimension (" +
                              std::to_string(dims.front()) + "), got " +
                              std::to_string(problem.rank));
    }
    ApproxResult result;
    const bool symmetric_input = is_symmetric(t);
    if (squared_norm(t) == 0.0) {
        result = zero_result(t, problem.notion);
    } else if (problem.rank == 1) {
        result = rank_one_hopm(t, problem.symmetric_constraint, problem.config);
        result.notion = problem.notion;
        result.certificate = decomposition_check(result.decomposition, problem.notion);
    } else {
        SearchState state;
        state.scale = squared_norm(t);
        std::uint64_t stream = kFrameStream;
        for (const auto& layout : cross_layouts(dims, problem.rank, problem.symmetric_constraint)) {
            search_layout(t, layout, problem.config, stream++, "frame", state);
        }
        result = finalize(t, problem.notion, state.best, std::move(state.traces));
    }
    result.cross_orthogonal = cross_orthogonality_check(result.decomposition, 1e-9);
    if (symmetric_input) {
        if (problem.symmetric_constraint) {
            result.symmetric_objective = result.objective;
        } else {
            ApproxProblem sym = problem;
            sym.symmetric_constraint = true;
            result.symmetric_objective = solve_cross(sym).objective;
        }
    }
    return result;
}

ApproxResult solve(const ApproxProblem& problem) {
    switch (problem.notion.kind) {
    case NotionKind::CON:
        return solve_con(problem);
    case NotionKind::SON:
        return solve_son(problem);
    case NotionKind::ON:
        return solve_on(problem);
    case NotionKind::PCON:
        return solve_pcon(problem);
    }
    throw ArgumentError("unknown notion");
}

} // namespace symortho
