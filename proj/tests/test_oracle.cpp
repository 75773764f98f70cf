#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "symortho/oracle.hpp"

using namespace symortho;
using testing_support::random_symmetric;
using testing_support::random_tensor;

namespace {

ApproxProblem problem(const Tensor& t, Notion notion, std::size_t rank) {
    ApproxProblem p;
    p.tensor = t;
    p.notion = std::move(notion);
    p.rank = rank;
    p.config.starts = 16;
    return p;
}

double rank_one_value(const Tensor& t, double a, double b, double c) {
    const Vec u{{std::cos(a), std::sin(a)}}, v{{std::cos(b), std::sin(b)}}, w{{std::cos(c), std::sin(c)}};
    const std::vector<Vec> f{u, v, w};
    const double x = contract_all<double>(t, f);
    return x * x;
}

} // namespace

TEST_CASE("rank-one bracket contains an independent brute-force maximum") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 4; ++trial) {
        const Tensor t = random_tensor({2, 2, 2}, rng);
        const OracleReport report = grid_oracle(problem(t, Notion::con(), 1));
        CHECK(report.certified);
        CHECK(report.lo <= report.hi);
        double brute = 0.0;
        const int steps = 90;
        for (int i = 0; i < steps; ++i) {
            for (int j = 0; j < steps; ++j) {
                for (int k = 0; k < steps; ++k) {
                    brute = std::max(brute, rank_one_value(t, M_PI * i / steps, M_PI * j / steps, M_PI * k / steps));
                }
            }
        }
        const double norm2 = std::pow(frobenius_norm(t), 2);
        CHECK(brute <= report.hi + 1e-12);
        // A 2-degree grid misses the peak by a second-order amount.
        CHECK(brute >= report.lo - 1e-2 * norm2);
        CHECK(report.hi - report.lo <= 1e-9 * norm2 + 1e-15);
    }
}

TEST_CASE("solver objective lies inside the oracle bracket") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 4; ++trial) {
        const Tensor t = random_tensor({2, 2, 2}, rng);
        for (const Notion& n : {Notion::con(), Notion::son()}) {
            const ApproxProblem p = problem(t, n, 2);
            const OracleReport report = grid_oracle(p);
            const double norm2 = std::pow(frobenius_norm(t), 2);
            CHECK(report.certified);
            const double value = solve(p).objective;
            CHECK(value <= report.hi + 1e-9 * norm2);
            CHECK(value >= report.lo - 1e-6 * norm2);
        }
    }
}

TEST_CASE("symmetric three-dimensional rank one is supported") {
    std::mt19937_64 rng(33);
    const Tensor t = random_symmetric(3, 3, rng);
    ApproxProblem p = problem(t, Notion::con(), 1);
    p.symmetric_constraint = true;
    REQUIRE(oracle_supports(p));
    const OracleReport report = grid_oracle(p);
    CHECK(report.certified);
    CHECK(solve(p).objective == doctest::Approx(report.lo).epsilon(1e-6));
}

TEST_CASE("unsupported shapes are rejected") {
    std::mt19937_64 rng(34);
    const ApproxProblem p = problem(random_tensor({3, 3, 3}, rng), Notion::con(), 2);
    CHECK_FALSE(oracle_supports(p));
    CHECK_THROWS_AS(grid_oracle(p), UnsupportedError);
    const ApproxProblem wide = problem(random_tensor({2, 2, 2, 2, 2}, rng), Notion::con(), 2);
    CHECK_THROWS_AS(grid_oracle(wide), UnsupportedError);
}

TEST_CASE("zero tensor has a zero bracket") {
    const OracleReport report = grid_oracle(problem(Tensor({2, 2, 2}), Notion::son(), 2));
    CHECK(report.lo == 0.0);
    CHECK(report.hi == 0.0);
    CHECK(report.certified);
}
