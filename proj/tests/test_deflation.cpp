#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "symortho/deflation.hpp"
#include "symortho/orthogonality.hpp"

using namespace symortho;
using testing_support::power;
using testing_support::random_tensor;

namespace {

SolverConfig quick() {
    SolverConfig c;
    c.starts = 16;
    c.seed = 2;
    return c;
}

} // namespace

TEST_CASE("odeco tensors deflate in order of weight magnitude") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5; ++trial) {
        Mat a(4, 4);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a.data()[i] = normal(rng);
        }
        const Mat q = polar(a);
        std::vector<double> weights{1.0, -4.0, 2.5, -0.5};
        Tensor t({4, 4, 4});
        for (int k = 0; k < 4; ++k) {
            const Tensor term = power(q.col(k), 3);
            for (std::size_t i = 0; i < t.size(); ++i) {
                t[i] += weights[k] * term[i];
            }
        }
        const DeflationResult r = deflate(t, 4, false, quick());
        REQUIRE(r.trace.steps.size() == 4);
        std::vector<double> expected;
        for (double w : weights) {
            expected.push_back(std::abs(w));
        }
        std::sort(expected.rbegin(), expected.rend());
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(std::abs(r.trace.steps[k].term.sigma) == doctest::Approx(expected[k]).epsilon(1e-6));
        }
        CHECK(r.residual < 1e-6);
        CHECK(r.trace.symmetric);
    }
}

TEST_CASE("property: plain deflation residuals never increase") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor t = random_tensor({3, 2, 3}, rng);
        const DeflationResult r = deflate(t, 4, false, quick());
        double previous = frobenius_norm(t);
        for (const auto& s : r.trace.steps) {
            CHECK(s.residual_norm <= previous + 1e-12);
            // Each step removes exactly sigma^2 from the squared residual.
            CHECK(s.residual_norm * s.residual_norm ==
                  doctest::Approx(previous * previous - s.term.sigma * s.term.sigma).epsilon(1e-8));
            previous = s.residual_norm;
        }
    }
}

TEST_CASE("constrained deflation produces completely orthogonal terms") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 6; ++trial) {
        const Tensor t = random_tensor({3, 3, 4}, rng);
        const DeflationResult r = deflate(t, 3, true, quick());
        CHECK(r.trace.constrained);
        CHECK(r.decomposition.rank() == 3);
        CHECK(decomposition_check(r.decomposition, Notion::con()).valid);
        double sum = 0.0;
        for (const auto& term : r.decomposition.terms) {
            sum += term.sigma * term.sigma;
        }
        CHECK(r.objective == doctest::Approx(sum));
    }
}

TEST_CASE("constrained deflation stops when the complement is exhausted") {
    std::mt19937_64 rng(44);
    const Tensor t = random_tensor({2, 3, 3}, rng);
    const DeflationResult r = deflate(t, 3, true, quick());
    CHECK(r.trace.truncated);
    CHECK(r.decomposition.rank() == 2);
}

TEST_CASE("constrained deflation never beats the direct solve") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 4; ++trial) {
        const Tensor t = random_tensor({2, 2, 2}, rng);
        const DeflationGap g = deflation_gap(t, 2, Notion::con(), quick());
        CHECK(g.gap >= -1e-9);
        CHECK(g.deflation_objective <= g.direct_objective + 1e-9);
        CHECK(g.deflation_alignment <= g.class_norm + 1e-9);
    }
}

TEST_CASE("deflating the zero tensor pads with zero terms") {
    const DeflationResult r = deflate(Tensor({2, 2, 2}), 2, true, quick());
    CHECK(r.trace.stopped_early);
    CHECK(r.objective == 0.0);
    for (const auto& s : r.trace.steps) {
        CHECK(s.zero);
    }
}
