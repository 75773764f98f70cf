#include "doctest.h"

#include <random>

#include "helpers.hpp"
#include "symortho/layouts.hpp"
#include "symortho/orthogonality.hpp"
#include "symortho/solvers.hpp"

using namespace symortho;
using testing_support::random_symmetric;
using testing_support::random_tensor;

namespace {

std::size_t bell(std::size_t r) {
    // Bell triangle.
    std::vector<std::size_t> row{1};
    for (std::size_t i = 1; i < r; ++i) {
        std::vector<std::size_t> next{row.back()};
        for (auto x : row) {
            next.push_back(next.back() + x);
        }
        row = next;
    }
    return row.back();
}

Decomposition as_terms(const FactorLists& factors) {
    Decomposition d;
    for (const auto& f : factors) {
        for (const auto& v : f) {
            d.dims.push_back(static_cast<std::size_t>(v.size()));
        }
        break;
    }
    for (const auto& f : factors) {
        d.terms.push_back({1.0, f});
    }
    return d;
}

Decomposition at_random_point(const Tensor& t, const FrameLayout& layout, std::mt19937_64& rng) {
    LayoutObjective objective(t, layout);
    return as_terms(objective.factors(random_point(layout.blocks, rng)));
}

} // namespace

TEST_CASE("set partitions are counted by the Bell numbers") {
    for (std::size_t r = 1; r <= 5; ++r) {
        CHECK(set_partitions(r).size() == bell(r));
    }
    // Canonical labelling: the first term is always in class 0.
    for (const auto& p : set_partitions(4)) {
        CHECK(p.front() == 0);
    }
}

TEST_CASE("polar retraction and tangent projection") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        Mat a(5, 3), g(5, 3);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a.data()[i] = normal(rng);
            g.data()[i] = normal(rng);
        }
        const Mat x = polar(a);
        CHECK((x.transpose() * x - Mat::Identity(3, 3)).norm() < 1e-12);
        const Mat t = project_tangent(x, g);
        const Mat s = x.transpose() * t;
        CHECK((s + s.transpose()).norm() < 1e-12);
    }
}

TEST_CASE("layout points satisfy their orthogonality notion") {
    std::mt19937_64 rng(11);
    const std::vector<std::size_t> dims{3, 3, 3};
    const Tensor t = random_tensor(dims, rng);
    for (int trial = 0; trial < 10; ++trial) {
        CHECK(decomposition_check(at_random_point(t, con_layout(dims, 3, false), rng), Notion::con()).valid);
        CHECK(decomposition_check(at_random_point(t, con_layout(dims, 2, true), rng), Notion::con()).valid);
        CHECK(decomposition_check(at_random_point(t, pcon_layout(dims, 3, {1}, false), rng), Notion::pcon({1}))
                  .valid);
        for (const auto& pattern : son_patterns(dims, 3, false, nullptr)) {
            CHECK(decomposition_check(at_random_point(t, son_layout(dims, pattern), rng), Notion::son()).valid);
        }
        for (const auto& pattern : on_patterns(dims, 3, false)) {
            if (auto layout = on_layout(dims, pattern)) {
                CHECK(decomposition_check(at_random_point(t, *layout, rng), Notion::on()).valid);
            }
        }
    }
}

TEST_CASE("layout gradient matches finite differences") {
    std::mt19937_64 rng(5);
    const std::vector<std::size_t> dims{3, 2, 4};
    const Tensor t = random_tensor(dims, rng);
    const FrameLayout layout = pcon_layout(dims, 2, {0}, false);
    LayoutObjective objective(t, layout);
    for (int trial = 0; trial < 5; ++trial) {
        const FramePoint x = random_point(layout.blocks, rng);
        FramePoint gradient;
        objective.value_and_gradient(x, gradient);
        FramePoint direction = random_point(layout.blocks, rng);
        double predicted = 0.0;
        for (std::size_t b = 0; b < x.size(); ++b) {
            direction[b] = project_tangent(x[b], direction[b]);
            predicted += (gradient[b].array() * direction[b].array()).sum();
        }
        const double h = 1e-6;
        FramePoint plus = x, minus = x;
        for (std::size_t b = 0; b < x.size(); ++b) {
            plus[b] = polar(x[b] + h * direction[b]);
            minus[b] = polar(x[b] - h * direction[b]);
        }
        const double numeric = (objective.value(plus) - objective.value(minus)) / (2 * h);
        CHECK(numeric == doctest::Approx(predicted).epsilon(1e-5));
    }
}

TEST_CASE("ascent never decreases the objective") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 15; ++trial) {
        const Tensor t = random_tensor({3, 3, 2}, rng);
        const FrameLayout layout = con_layout(t.dims(), 2, false);
        LayoutObjective objective(t, layout);
        AscentOptions options;
        const AscentResult result = ascend(objective, random_point(layout.blocks, rng), options);
        CHECK(result.monotone);
        REQUIRE(!result.history.empty());
        for (std::size_t i = 1; i < result.history.size(); ++i) {
            CHECK(result.history[i] >= result.history[i - 1]);
        }
        CHECK(result.value == doctest::Approx(result.history.back()));
    }
}

TEST_CASE("multi-start results do not depend on the thread count") {
    std::mt19937_64 rng(8);
    const Tensor t = random_symmetric(3, 3, rng);
    const FrameLayout layout = con_layout(t.dims(), 2, true);
    LayoutObjective objective(t, layout);
    const auto serial = multi_start(objective, 12, 42, 1, AscentOptions{}, 1);
    const auto parallel = multi_start(objective, 12, 42, 1, AscentOptions{}, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].value == parallel[i].value);
        CHECK(serial[i].iterations == parallel[i].iterations);
    }
    const auto reseeded = multi_start(objective, 12, 43, 1, AscentOptions{}, 1);
    bool differs = false;
    for (std::size_t i = 0; i < serial.size(); ++i) {
        differs = differs || serial[i].point[0] != reseeded[i].point[0];
    }
    CHECK(differs);
}

TEST_CASE("pattern enumeration reports patterns that do not fit") {
    std::vector<std::string> infeasible;
    const auto patterns = son_patterns({2, 2, 2}, 3, false, &infeasible);
    CHECK_FALSE(patterns.empty());
    CHECK_FALSE(infeasible.empty());
    for (const auto& p : patterns) {
        for (const auto& mode : p.modes) {
            CHECK(*std::max_element(mode.begin(), mode.end()) < 2);
        }
    }
}
