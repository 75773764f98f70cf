#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "symortho/tensor.hpp"

using namespace symortho;
using testing_support::max_abs_diff;
using testing_support::power;
using testing_support::random_symmetric;
using testing_support::random_tensor;
using testing_support::random_unit;
using testing_support::unit;

namespace {

Tensor two_by_two_by_two() {
    Tensor t({2, 2, 2});
    t.at({0, 0, 1}) = 1.0;
    t.at({0, 1, 0}) = 1.0;
    t.at({1, 0, 0}) = 1.0;
    t.at({1, 1, 1}) = 2.0;
    return t;
}

Tensor e123_symmetrized() {
    std::vector<Vec> f{unit(3, 0), unit(3, 1), unit(3, 2)};
    return symmetrize(outer<double>(f));
}

} // namespace

TEST_CASE("construction validates data length") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
    Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.order() == 2);
    CHECK_FALSE(t.is_cubical());
}

TEST_CASE("offset is row-major with last index fastest") {
    Tensor t({2, 3, 4});
    std::array<std::size_t, 3> idx{1, 2, 3};
    CHECK(t.offset(idx) == 1 * 12 + 2 * 4 + 3);
    std::array<std::size_t, 3> back{};
    t.unravel(23, back);
    CHECK(back == idx);
}

TEST_CASE("inner product examples") {
    std::vector<Vec> f{unit(2, 0), unit(2, 1)};
    const Tensor t = outer<double>(f);
    CHECK(inner(t, t) == doctest::Approx(1.0));
    CHECK(inner(power(unit(2, 0), 2), power(unit(2, 1), 2)) == 0.0);
    const Tensor s = two_by_two_by_two();
    CHECK(inner(s, s) == doctest::Approx(7.0));
    CHECK(frobenius_norm(s) == doctest::Approx(std::sqrt(7.0)));
    CHECK(frobenius_norm(Tensor({3, 3})) == 0.0);
    CHECK_THROWS_AS(inner(Tensor({2, 2}), Tensor({2, 3})), ShapeError);
}

TEST_CASE("runtime-field inner product rejects mixed fields") {
    AnyTensor a = Tensor({2});
    AnyTensor b = ComplexTensor({2});
    CHECK_THROWS_AS(inner(a, b), FieldError);
}

TEST_CASE("complex inner product is conjugate symmetric") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    ComplexTensor a({2, 3}), b({2, 3});
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = {normal(rng), normal(rng)};
        b[i] = {normal(rng), normal(rng)};
    }
    const Complex ab = inner(a, b);
    const Complex ba = inner(b, a);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-12);
    const Complex alpha{0.3, -1.2};
    CHECK(std::abs(inner(alpha * a, b) - alpha * ab) < 1e-12);
    CHECK(std::abs(inner(a, alpha * b) - std::conj(alpha) * ab) < 1e-12);
    CHECK(std::abs(inner(a, a).real() - std::pow(frobenius_norm(a), 2)) < 1e-12);
}

TEST_CASE("norm of a scaled unit power is the scale") {
    const Vec v = Vec::Constant(3, 1.0 / std::sqrt(3.0));
    CHECK(frobenius_norm(-2.5 * power(v, 4)) == doctest::Approx(2.5));
}

TEST_CASE("contract_mode examples") {
    std::vector<Vec> f{unit(2, 0), unit(2, 1)};
    const Tensor c = contract_mode(outer<double>(f), 0, unit(2, 0));
    REQUIRE(c.dims() == std::vector<std::size_t>{2});
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 1.0);

    const Vec v = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    const Tensor twice = contract_mode(contract_mode(two_by_two_by_two(), 2, v), 1, v);
    CHECK(twice[0] == doctest::Approx(1.0));
    CHECK(twice[1] == doctest::Approx(1.5));

    CHECK_THROWS_AS(contract_mode(two_by_two_by_two(), 3, v), ShapeError);
    CHECK_THROWS_AS(contract_mode(two_by_two_by_two(), 0, Vec(Vec::Ones(3))), ShapeError);
}

TEST_CASE("contract_mode commutes across distinct modes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor t = random_tensor({2, 3, 4, 2}, rng);
        for (std::size_t j = 0; j < 4; ++j) {
            for (std::size_t k = j + 1; k < 4; ++k) {
                const Vec a = random_unit(t.dim(j), rng);
                const Vec b = random_unit(t.dim(k), rng);
                const Tensor jk = contract_mode(contract_mode(t, j, a), k - 1, b);
                const Tensor kj = contract_mode(contract_mode(t, k, b), j, a);
                CHECK(max_abs_diff(jk, kj) < 1e-12);
            }
        }
    }
}

TEST_CASE("contract_except and contract_all agree with mode contractions") {
    std::mt19937_64 rng(5);
    const Tensor t = random_tensor({3, 2, 4}, rng);
    std::vector<Vec> f{random_unit(3, rng), random_unit(2, rng), random_unit(4, rng)};
    const Vec middle = contract_except<double>(t, f, 1);
    const Tensor direct = contract_mode(contract_mode(t, 2, f[2]), 0, f[0]);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(middle(static_cast<Eigen::Index>(i)) == doctest::Approx(direct[i]));
    }
    CHECK(contract_all<double>(t, f) == doctest::Approx(inner(t, outer<double>(f))));
    CHECK(inner_rank_one<double>(t, f) == doctest::Approx(middle.dot(f[1])));
}

TEST_CASE("multiply_mode with the identity is a no-op") {
    std::mt19937_64 rng(9);
    const Tensor t = random_tensor({3, 2, 2}, rng);
    CHECK(max_abs_diff(multiply_mode(t, 0, Mat(Mat::Identity(3, 3))), t) < 1e-15);
    const Mat row = unit(2, 1).transpose();
    const Tensor picked = multiply_mode(t, 1, row);
    CHECK(picked.dims() == std::vector<std::size_t>{3, 1, 2});
    CHECK(picked.at({2, 0, 1}) == t.at({2, 1, 1}));
}

TEST_CASE("outer examples") {
    std::vector<Vec> f{unit(2, 0), unit(2, 1)};
    const Tensor m = outer<double>(f);
    CHECK(m.at({0, 1}) == 1.0);
    CHECK(m.at({0, 0}) + m.at({1, 0}) + m.at({1, 1}) == 0.0);
    const Vec v = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    const Tensor cube = power(v, 3);
    for (double x : cube.data()) {
        CHECK(x == doctest::Approx(std::pow(2.0, -1.5)));
    }
    std::mt19937_64 rng(2);
    std::vector<Vec> g{2.0 * random_unit(3, rng), 0.5 * random_unit(2, rng), 3.0 * random_unit(2, rng)};
    CHECK(frobenius_norm(outer<double>(g)) == doctest::Approx(3.0));
}

TEST_CASE("symmetry examples") {
    const Tensor main = e123_symmetrized();
    CHECK(is_symmetric(main));
    int sixth = 0;
    for (double x : main.data()) {
        if (std::abs(x - 1.0 / 6.0) < 1e-15) {
            ++sixth;
        } else {
            CHECK(x == 0.0);
        }
    }
    CHECK(sixth == 6);

    std::vector<Vec> f{unit(2, 0), unit(2, 1)};
    CHECK_FALSE(is_symmetric(outer<double>(f)));
    const Tensor half = symmetrize(outer<double>(f));
    CHECK(half.at({0, 1}) == 0.5);
    CHECK(half.at({1, 0}) == 0.5);
    CHECK(half.at({0, 0}) == 0.0);

    // Three cyclic terms alone do not make a symmetric tensor.
    const Vec e1 = unit(3, 0), e2 = unit(3, 1), e3 = unit(3, 2);
    std::vector<Vec> a{e1, e2, e3}, b{e2, e3, e1}, c{e3, e1, e2};
    const Tensor cyclic = outer<double>(a) + outer<double>(b) + outer<double>(c);
    CHECK_FALSE(is_symmetric(cyclic));

    CHECK_THROWS_AS(is_symmetric(Tensor({2, 3})), ShapeError);
    CHECK_THROWS_AS(symmetrize(Tensor({2, 3})), ShapeError);
}

TEST_CASE("generator-transposition symmetry check for high order") {
    std::mt19937_64 rng(17);
    const Tensor t = random_symmetric(2, 5, rng);
    CHECK(is_symmetric(t));
    Tensor broken = t;
    broken.at({0, 0, 0, 0, 1}) += 1e-6;
    CHECK_FALSE(is_symmetric(broken));
}

TEST_CASE("symmetrize is a self-adjoint projection") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor t = random_tensor({3, 3, 3}, rng);
        const Tensor s = random_tensor({3, 3, 3}, rng);
        const Tensor st = symmetrize(t);
        CHECK(max_abs_diff(symmetrize(st), st) < 1e-14);
        CHECK(inner(t, symmetrize(s)) == doctest::Approx(inner(st, s)).epsilon(1e-12));
    }
}

TEST_CASE("contraction of a symmetric tensor is symmetric and mode independent") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<std::size_t> pick_n(2, 4), pick_d(2, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = pick_n(rng), d = pick_d(rng);
        const Tensor t = random_symmetric(n, d, rng);
        const Vec v = random_unit(n, rng);
        const Tensor first = contract_mode(t, 0, v);
        if (d > 2) {
            CHECK(is_symmetric(first));
        }
        for (std::size_t j = 1; j < d; ++j) {
            CHECK(max_abs_diff(contract_mode(t, j, v), first) < 1e-12);
        }
    }
}

TEST_CASE("permute reorders modes") {
    std::mt19937_64 rng(31);
    const Tensor t = random_tensor({2, 3, 4}, rng);
    std::array<std::size_t, 3> perm{2, 0, 1};
    const Tensor p = permute<double>(t, perm);
    CHECK(p.dims() == std::vector<std::size_t>{4, 2, 3});
    CHECK(p.at({3, 1, 2}) == t.at({1, 2, 3}));
}

TEST_CASE("assemble examples") {
    Decomposition empty{{2, 2}, {}};
    CHECK(frobenius_norm(assemble(empty)) == 0.0);

    const Vec e1 = unit(2, 0), e2 = unit(2, 1);
    Decomposition three{{2, 2, 2},
                        {{1.0, {e2, e1, e1}}, {1.0, {e1, e2, e1}}, {1.0, {e1, e1, e2}}}};
    const Tensor s = assemble(three);
    CHECK(s.at({1, 0, 0}) == 1.0);
    CHECK(s.at({0, 1, 0}) == 1.0);
    CHECK(s.at({0, 0, 1}) == 1.0);
    CHECK(frobenius_norm(s) == doctest::Approx(std::sqrt(3.0)));

    Tensor t({2, 2, 2, 2});
    t.at({0, 0, 0, 1}) = 1.0;
    t.at({0, 0, 1, 0}) = 1.0;
    t.at({0, 1, 0, 0}) = 1.0;
    t.at({1, 0, 0, 0}) = 1.0;
    const Vec y1 = Vec{{1.0, -1.0}} / std::sqrt(2.0);
    const Vec y2 = Vec{{-1.0, -1.0}} / std::sqrt(2.0);
    Decomposition ys{{2, 2, 2, 2}, {{-1.0, {y1, y1, y1, y1}}, {1.0, {y2, y2, y2, y2}}}};
    CHECK(frobenius_norm(t - assemble(ys)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("assemble is linear in sigma and invariant under canonicalization") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        Decomposition d{{3, 2, 2}, {}};
        for (int k = 0; k < 3; ++k) {
            d.terms.push_back({std::normal_distribution<double>()(rng),
                               {-random_unit(3, rng), random_unit(2, rng), -random_unit(2, rng)}});
        }
        const Tensor base = assemble(d);
        CHECK(max_abs_diff(assemble(d.canonical()), base) < 1e-12);
        for (const auto& f : d.canonical().terms) {
            for (const auto& v : f.factors) {
                Eigen::Index i = 0;
                while (std::abs(v(i)) <= 1e-12) {
                    ++i;
                }
                CHECK(v(i) > 0.0);
            }
        }
        Decomposition doubled = d;
        for (auto& term : doubled.terms) {
            term.sigma *= 2.0;
        }
        CHECK(max_abs_diff(assemble(doubled), 2.0 * base) < 1e-12);
    }
}

TEST_CASE("unfolding spectral bound dominates rank-one values") {
    const Tensor main = e123_symmetrized();
    CHECK(unfolding_spectral_bound(main) == doctest::Approx(std::sqrt(2.0) / 6.0));
    const Vec v = Vec::Constant(3, 1.0 / std::sqrt(3.0));
    CHECK(unfolding_spectral_bound(4.0 * power(v, 3)) == doctest::Approx(4.0));
}

TEST_CASE("order-one tensors behave as vectors") {
    Tensor v({3}, {3.0, 0.0, 4.0});
    CHECK(frobenius_norm(v) == doctest::Approx(5.0));
    CHECK(is_symmetric(v));
    std::vector<Vec> f{unit(3, 2)};
    CHECK(contract_all<double>(v, f) == 4.0);
}
