#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "symortho/solvers.hpp"

using namespace symortho;
using testing_support::power;
using testing_support::random_symmetric;
using testing_support::random_tensor;
using testing_support::random_unit;
using testing_support::unit;

namespace {

SolverConfig quick(int starts = 24) {
    SolverConfig c;
    c.starts = starts;
    c.seed = 1;
    return c;
}

ApproxResult run(const Tensor& t, Notion notion, std::size_t rank, SolverConfig config = quick()) {
    ApproxProblem p;
    p.tensor = t;
    p.notion = std::move(notion);
    p.rank = rank;
    p.config = config;
    return solve(p);
}

/// ||T - sum sigma_k Y_k|| recomputed from the assembled decomposition.
double residual_of(const Tensor& t, const Decomposition& d) {
    const Tensor approx = assemble(d);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        s += (t[i] - approx[i]) * (t[i] - approx[i]);
    }
    return std::sqrt(s);
}

Vec rotate(double angle) { return Vec{{std::cos(angle), std::sin(angle)}}; }

} // namespace

TEST_CASE("rank-one approximation of a rank-one tensor is exact") {
    std::mt19937_64 rng(2);
    const std::vector<Vec> f{random_unit(3, rng), random_unit(2, rng), random_unit(4, rng)};
    Tensor t = outer<double>(f);
    for (auto& x : t.data()) {
        x *= -2.5;
    }
    const ApproxResult r = rank_one_hopm(t, false, quick(8));
    CHECK(r.objective == doctest::Approx(6.25));
    CHECK(r.residual < 1e-7);
    CHECK(std::abs(r.decomposition.terms[0].sigma) == doctest::Approx(2.5));
}

TEST_CASE("symmetric power method on odd and even orders") {
    std::mt19937_64 rng(4);
    const Vec v = random_unit(3, rng);
    for (std::size_t d : {3u, 4u}) {
        Tensor t = power(v, d);
        for (auto& x : t.data()) {
            x *= -3.0;
        }
        const ApproxResult r = rank_one_hopm(t, true, quick(8));
        CHECK(r.objective == doctest::Approx(9.0));
        const auto& factors = r.decomposition.terms[0].factors;
        for (const auto& f : factors) {
            CHECK((f - factors[0]).norm() < 1e-9);
        }
    }
}

TEST_CASE("orthogonally decomposable tensors are recovered by every notion") {
    std::mt19937_64 rng(6);
    const Mat q = polar(Mat::Random(3, 3));
    Tensor t({3, 3, 3});
    const double weights[] = {3.0, -2.0, 1.0};
    for (int k = 0; k < 3; ++k) {
        const Tensor term = power(q.col(k), 3);
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] += weights[k] * term[i];
        }
    }
    for (const Notion& n : {Notion::con(), Notion::son(), Notion::on()}) {
        const ApproxResult r = run(t, n, 3);
        CHECK(r.objective == doctest::Approx(14.0));
        CHECK(r.residual < 1e-6);
        CHECK(r.certificate.valid);
    }
    const ApproxResult r2 = run(t, Notion::con(), 2);
    CHECK(r2.objective == doctest::Approx(13.0));
}

TEST_CASE("two-by-two tensor with a closed-form optimum") {
    // T = e1 (x) e1 + e2 (x) e2 rotated: every rank-one term reaches <T, u (x) u>^2 = 1.
    const Vec e1 = unit(2, 0), e2 = unit(2, 1);
    Tensor t = outer<double>(std::vector<Vec>{e1, e1});
    const Tensor b = outer<double>(std::vector<Vec>{e2, e2});
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] += b[i];
    }
    const ApproxResult r = run(t, Notion::con(), 1);
    CHECK(r.objective == doctest::Approx(1.0));
    const ApproxResult r2 = run(t, Notion::con(), 2);
    CHECK(r2.objective == doctest::Approx(2.0));
    CHECK(r2.residual < 1e-7);
}

TEST_CASE("property: solver invariants on random small tensors") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const Tensor t = random_tensor({2, 2, 2}, rng);
        const double norm2 = std::pow(frobenius_norm(t), 2);
        double previous = 0.0;
        for (std::size_t rank = 1; rank <= 2; ++rank) {
            const ApproxResult con = run(t, Notion::con(), rank);
            const ApproxResult son = run(t, Notion::son(), rank);
            const ApproxResult on = run(t, Notion::on(), rank);
            // Nested classes: CON within SON within ON, and more terms never hurt.
            CHECK(con.objective <= son.objective + 1e-8 * norm2);
            CHECK(son.objective <= on.objective + 1e-8 * norm2);
            CHECK(con.objective >= previous - 1e-8 * norm2);
            previous = con.objective;
            for (const ApproxResult* r : {&con, &son, &on}) {
                CHECK(r->certificate.valid);
                double sum = 0.0;
                for (const auto& term : r->decomposition.terms) {
                    sum += term.sigma * term.sigma;
                }
                CHECK(sum == doctest::Approx(r->objective).epsilon(1e-9));
                // Pythagoras for orthogonal terms with optimal weights.
                const double res = residual_of(t, r->decomposition);
                CHECK(res == doctest::Approx(r->residual).epsilon(1e-6));
                CHECK(res * res == doctest::Approx(norm2 - r->objective).epsilon(1e-6));
                CHECK(r->objective <= norm2 + 1e-9);
            }
        }
    }
}

TEST_CASE("results are reproducible for a fixed seed") {
    std::mt19937_64 rng(12);
    const Tensor t = random_tensor({3, 2, 2}, rng);
    SolverConfig one = quick(16);
    one.threads = 1;
    SolverConfig many = quick(16);
    many.threads = 4;
    const ApproxResult a = run(t, Notion::son(), 2, one);
    const ApproxResult b = run(t, Notion::son(), 2, many);
    const ApproxResult c = run(t, Notion::son(), 2, one);
    CHECK(a.objective == b.objective);
    CHECK(a.objective == c.objective);
    REQUIRE(a.decomposition.rank() == b.decomposition.rank());
    for (std::size_t k = 0; k < a.decomposition.rank(); ++k) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(a.decomposition.terms[k].factors[j] == b.decomposition.terms[k].factors[j]);
        }
    }
}

TEST_CASE("winning start history is monotone") {
    std::mt19937_64 rng(13);
    const Tensor t = random_tensor({3, 3, 3}, rng);
    const ApproxResult r = run(t, Notion::con(), 2);
    REQUIRE(!r.best_history.empty());
    for (std::size_t i = 1; i < r.best_history.size(); ++i) {
        CHECK(r.best_history[i] >= r.best_history[i - 1]);
    }
    for (const auto& s : r.starts) {
        CHECK(s.monotone);
    }
}

TEST_CASE("infeasible and invalid problems") {
    std::mt19937_64 rng(14);
    const Tensor t = random_tensor({2, 3, 3}, rng);
    CHECK_THROWS_AS(run(t, Notion::con(), 3), InfeasibleError);
    CHECK_THROWS_AS(run(t, Notion::pcon({0}), 3), InfeasibleError);
    CHECK_THROWS_AS(run(t, Notion::pcon({5}), 1), ArgumentError);
    SolverConfig bad = quick();
    bad.starts = 0;
    CHECK_THROWS_AS(run(t, Notion::con(), 1, bad), ArgumentError);
    ApproxProblem p;
    p.tensor = t;
    p.symmetric_constraint = true;
    p.config = quick();
    CHECK_THROWS(solve(p));
    CHECK_THROWS_AS(require_real(AnyTensor(ComplexTensor({2, 2}))), FieldError);
}

TEST_CASE("zero tensor gives a zero decomposition") {
    const Tensor t({2, 2, 2});
    const ApproxResult r = run(t, Notion::son(), 2);
    CHECK(r.objective == 0.0);
    CHECK(r.residual == 0.0);
}

TEST_CASE("symmetric constraint keeps factors equal across modes") {
    std::mt19937_64 rng(15);
    const Tensor t = random_symmetric(3, 3, rng);
    ApproxProblem p;
    p.tensor = t;
    p.rank = 2;
    p.symmetric_constraint = true;
    p.config = quick();
    const ApproxResult r = solve(p);
    CHECK(r.certificate.valid);
    for (const auto& term : r.decomposition.terms) {
        for (const auto& f : term.factors) {
            CHECK((f - term.factors[0]).norm() < 1e-12);
        }
    }
    p.symmetric_constraint = false;
    CHECK(solve(p).objective >= r.objective - 1e-9);
}

TEST_CASE("structured PCON on a rotated product") {
    // sum over two orthonormal pairs of u (x) u (x) w: structured terms reach it exactly.
    const Vec u1 = rotate(0.3), u2 = rotate(0.3 + M_PI / 2);
    const Vec w1 = rotate(1.1), w2 = rotate(-0.4);
    Tensor t = outer<double>(std::vector<Vec>{u1, u1, w1});
    const Tensor b = outer<double>(std::vector<Vec>{u2, u2, w2});
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = 2.0 * t[i] + b[i];
    }
    ApproxProblem p;
    p.tensor = t;
    p.notion = Notion::pcon({0, 1});
    p.rank = 2;
    p.structured = true;
    p.config = quick();
    const ApproxResult r = solve(p);
    CHECK(r.objective == doctest::Approx(5.0));
    CHECK(r.certificate.valid);
}
