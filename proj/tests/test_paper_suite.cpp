#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "symortho/paper_suite.hpp"

using namespace symortho;
using testing_support::random_tensor;
using testing_support::random_unit;
using testing_support::unit;

namespace {

Decomposition symmetric_terms(const std::vector<Vec>& vectors, const std::vector<double>& weights, std::size_t d) {
    Decomposition out;
    out.dims.assign(d, static_cast<std::size_t>(vectors[0].size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        out.terms.push_back({weights[k], std::vector<Vec>(d, vectors[k])});
    }
    return out;
}

} // namespace

TEST_CASE("case catalogue") {
    const auto& ids = case_ids();
    CHECK(ids.size() == 13);
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
    for (const auto& id : ids) {
        const NamedCase c = build_case(id);
        CHECK(c.id == id);
        CHECK_FALSE(c.summary.empty());
        CHECK_FALSE(c.tensors.empty());
    }
    CHECK_THROWS_AS(build_case("no-such-case"), ArgumentError);
}

TEST_CASE("named tensors have the expected norms") {
    // The symmetrized e1 e2 e3 has six entries of 1/6.
    const Tensor t = build_case("thm-main").tensors[0].tensor;
    CHECK(frobenius_norm(t) == doctest::Approx(std::sqrt(6.0) / 6.0));
    CHECK(is_symmetric(t));
    for (const auto& id : {"thm-no-son", "thm-no-on", "ex-coincide"}) {
        CHECK(is_symmetric(build_case(id).tensors[0].tensor));
    }
}

TEST_CASE("block embedding places copies on the diagonal") {
    std::mt19937_64 rng(61);
    const Tensor t = random_tensor({2, 3, 2}, rng);
    const Tensor b = block_embed(t, 3);
    CHECK(b.dims() == std::vector<std::size_t>{6, 9, 6});
    CHECK(frobenius_norm(b) == doctest::Approx(std::sqrt(3.0) * frobenius_norm(t)));
    // Contractions with block vectors see exactly one copy.
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<Vec> f{random_unit(2, rng), random_unit(3, rng), random_unit(2, rng)};
        const double direct = contract_all<double>(t, f);
        for (std::size_t l = 0; l < 3; ++l) {
            std::vector<Vec> lifted;
            for (const auto& v : f) {
                lifted.push_back(block_vector(v, 3, l));
            }
            CHECK(contract_all<double>(b, lifted) == doctest::Approx(direct));
        }
        std::vector<Vec> mixed{block_vector(f[0], 3, 0), block_vector(f[1], 3, 1), block_vector(f[2], 3, 0)};
        CHECK(std::abs(contract_all<double>(b, mixed)) < 1e-15);
    }
}

TEST_CASE("structure verdicts") {
    const Vec e1 = unit(3, 0), e2 = unit(3, 1), e3 = unit(3, 2);
    const auto two = symmetric_terms({e1, e2}, {2.0, -1.0}, 3);
    CHECK(check_symmetric_structure(two, StructureKind::SymRank2).holds);
    CHECK(check_symmetric_structure(two, StructureKind::SymDecomp).holds);
    const auto three = symmetric_terms({e1, e2, e3}, {1.0, 2.0, 3.0}, 3);
    const auto verdict = check_symmetric_structure(three, StructureKind::SymRank3);
    CHECK(verdict.holds);
    CHECK(verdict.family == "symmetric");

    // s (v w w + w v w + w w v) is symmetric with three non-symmetric terms.
    Decomposition cyclic;
    cyclic.dims = {3, 3, 3};
    cyclic.terms = {{0.8, {e1, e2, e2}}, {0.8, {e2, e1, e2}}, {0.8, {e2, e2, e1}}};
    const auto c = check_symmetric_structure(cyclic, StructureKind::SymRank3);
    CHECK(c.holds);
    CHECK(c.family == "cyclic");

    Decomposition lopsided;
    lopsided.dims = {3, 3, 3};
    lopsided.terms = {{1.0, {e1, e2, e2}}, {1.0, {e2, e1, e1}}};
    const auto bad = check_symmetric_structure(lopsided, StructureKind::SymRank2);
    CHECK_FALSE(bad.holds);
    CHECK_FALSE(bad.reason.empty());
    CHECK(parse_structure_kind("symrank3") == StructureKind::SymRank3);
    CHECK_THROWS_AS(parse_structure_kind("bogus"), ArgumentError);
}

TEST_CASE("fast cases verify") {
    SolverConfig config;
    for (const auto& id : {"ex-singular", "ex-coincide", "ex-deflation", "struct-symrank2", "struct-symrank3",
                           "struct-symdecomp"}) {
        const CaseReport report = verify_case(id, config);
        INFO(id);
        CHECK(report.pass);
        CHECK_FALSE(report.checks.empty());
    }
}
