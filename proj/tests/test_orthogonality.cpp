#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "symortho/orthogonality.hpp"

using namespace symortho;
using testing_support::random_unit;
using testing_support::unit;

namespace {

Vec perp(const Vec& v) { return Vec{{-v(1), v(0)}}; }

} // namespace

TEST_CASE("notion parsing and formatting") {
    CHECK(parse_notion("CON") == Notion::con());
    CHECK(parse_notion("son") == Notion::son());
    CHECK(to_string(parse_notion("pcon", {2, 0, 2})) == "PCON{1,3}");
    CHECK_THROWS_AS(parse_notion("pcon"), ArgumentError);
    CHECK_THROWS_AS(parse_notion("on", {1}), ArgumentError);
    CHECK_THROWS_AS(parse_notion("xon"), ArgumentError);
    CHECK_THROWS_AS(Notion::pcon({3}).validate(3), ArgumentError);
}

TEST_CASE("pair_check examples") {
    const Vec e1 = unit(2, 0), e2 = unit(2, 1);
    RankOneTerm x{1.0, {e1, e1}};
    RankOneTerm y{1.0, {e2, e2}};
    auto c = pair_check(x, y, Notion::con());
    CHECK(c.con);
    CHECK(c.son);
    CHECK(c.on);
    CHECK(c.holds);

    RankOneTerm z{1.0, {e1, e2}};
    c = pair_check(x, z, Notion::son());
    CHECK(c.on);
    CHECK(c.son);
    CHECK_FALSE(c.con);
    CHECK(c.holds);
    CHECK_FALSE(pair_check(x, z, Notion::con()).holds);
    CHECK(pair_check(x, z, Notion::pcon({1})).holds);
    CHECK_FALSE(pair_check(x, z, Notion::pcon({0})).holds);

    const Vec a = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    const Vec b = Vec{{0.8321, 0.5547}}.normalized();
    RankOneTerm abc{1.0, {a, b, a}};
    RankOneTerm perps{1.0, {perp(a), perp(b), perp(a)}};
    RankOneTerm mixed{1.0, {a, perp(b), a}};
    CHECK(pair_check(abc, perps, Notion::son()).holds);
    CHECK(pair_check(abc, mixed, Notion::son()).holds);
    CHECK(pair_check(perps, mixed, Notion::son()).holds);
    CHECK_FALSE(pair_check(abc, mixed, Notion::con()).holds);

    RankOneTerm longer{1.0, {e1, e1, e1}};
    CHECK_THROWS_AS(pair_check(x, longer, Notion::on()), ShapeError);
}

TEST_CASE("ON without SON") {
    const Vec e1 = unit(2, 0), e2 = unit(2, 1);
    const Vec a = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    RankOneTerm x{1.0, {e1, e1}};
    RankOneTerm y{1.0, {e2, a}};
    const auto c = pair_check(x, y, Notion::on());
    CHECK(c.on);
    CHECK_FALSE(c.son);
}

TEST_CASE("decomposition_check examples") {
    const Vec e1 = unit(2, 0);
    Decomposition single{{2, 2}, {{3.0, {e1, e1}}}};
    for (auto n : {Notion::on(), Notion::son(), Notion::con(), Notion::pcon({0})}) {
        CHECK(decomposition_check(single, n).valid);
    }

    const Vec y1 = Vec{{1.0, -1.0}} / std::sqrt(2.0);
    const Vec y2 = Vec{{-1.0, -1.0}} / std::sqrt(2.0);
    Decomposition ys{{2, 2, 2, 2}, {{-1.0, {y1, y1, y1, y1}}, {1.0, {y2, y2, y2, y2}}}};
    const auto cert = decomposition_check(ys, Notion::con());
    CHECK(cert.valid);
    REQUIRE(cert.pairs.size() == 1);
    CHECK(cert.pairs[0].mode_inner.size() == 4);
    CHECK(cross_orthogonality_check(ys));

    Decomposition odeco{{3, 3, 3}, {}};
    for (std::size_t k = 0; k < 3; ++k) {
        odeco.terms.push_back({1.0, {unit(3, k), unit(3, k), unit(3, k)}});
    }
    const auto three = decomposition_check(odeco, Notion::con());
    CHECK(three.valid);
    CHECK(three.pairs.size() == 3);
}

TEST_CASE("cross orthogonality examples") {
    Decomposition blocks{{4, 4}, {{1.0, {unit(4, 0), unit(4, 1)}}, {1.0, {unit(4, 2), unit(4, 3)}}}};
    CHECK(cross_orthogonality_check(blocks));
    Decomposition shared{{4, 4}, {{1.0, {unit(4, 0), unit(4, 1)}}, {1.0, {unit(4, 2), unit(4, 0)}}}};
    CHECK_FALSE(cross_orthogonality_check(shared));
    CHECK(decomposition_check(shared, Notion::con()).valid);
}

TEST_CASE("implication chain on random pairs") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::size_t> pick(2, 4);
    std::bernoulli_distribution coin(0.5);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = pick(rng);
        RankOneTerm x{1.0, {}}, y{1.0, {}};
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t n = pick(rng);
            const Vec u = random_unit(n, rng);
            x.factors.push_back(u);
            // Mix in exact orthogonal and parallel modes so every verdict occurs.
            const int kind = static_cast<int>(rng() % 3);
            if (kind == 0) {
                Vec w = random_unit(n, rng);
                w -= u.dot(w) * u;
                y.factors.push_back(w.normalized());
            } else if (kind == 1) {
                y.factors.push_back(coin(rng) ? u : Vec(-u));
            } else {
                y.factors.push_back(random_unit(n, rng));
            }
        }
        const auto c = pair_check(x, y, Notion::on());
        const auto r = pair_check(y, x, Notion::on());
        if ((c.con && !c.son) || (c.son && !c.on)) {
            ++violations;
        }
        if (c.on != r.on || c.son != r.son || c.con != r.con) {
            ++violations;
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (c.con && !pair_check(x, y, Notion::pcon({j})).holds) {
                ++violations;
            }
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("complex parallel factors count as parallel up to phase") {
    ComplexRankOneTerm x{Complex{1.0}, {Vector<Complex>::Zero(2), Vector<Complex>::Zero(2)}};
    x.factors[0](0) = 1.0;
    x.factors[1](0) = 1.0;
    ComplexRankOneTerm y = x;
    y.factors[0] *= Complex(0.0, 1.0);
    y.factors[1] = Vector<Complex>::Zero(2);
    y.factors[1](1) = 1.0;
    const auto c = pair_check(x, y, Notion::son());
    CHECK(c.son);
    CHECK_FALSE(c.con);
    CHECK(std::abs(c.mode_inner[0] - Complex(0.0, -1.0)) < 1e-15);
}

TEST_CASE("Pythagoras for orthogonal decompositions") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3;
        const Vec u = random_unit(n, rng);
        Vec w = random_unit(n, rng);
        w = (w - u.dot(w) * u).normalized();
        const Vec a = random_unit(n, rng), b = random_unit(n, rng);
        // ON but not CON: orthogonal only in the first mode.
        Decomposition d{{n, n, n}, {{1.5, {u, a, b}}, {-0.7, {w, b, a}}, {}}};
        Vec z = random_unit(n, rng);
        z = z - u.dot(z) * u - w.dot(z) * w;
        d.terms[2] = {2.0, {z.normalized(), a, a}};
        REQUIRE(decomposition_check(d, Notion::on()).valid);
        const double norm = frobenius_norm(assemble(d));
        CHECK(norm * norm == doctest::Approx(1.5 * 1.5 + 0.7 * 0.7 + 4.0).epsilon(1e-10));
    }
}
