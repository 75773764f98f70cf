#include "doctest.h"

#include <random>

#include "helpers.hpp"
#include "symortho/io.hpp"

using namespace symortho;
using testing_support::random_tensor;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_tensor(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("real tensors round-trip exactly") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor t = random_tensor({2, 3, 2}, rng);
        const std::string text = tensor_to_json(t).dump();
        const AnyTensor back = parse_tensor(text);
        REQUIRE(std::holds_alternative<Tensor>(back));
        const Tensor& b = std::get<Tensor>(back);
        CHECK(b.dims() == t.dims());
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(b[i] == t[i]);
        }
    }
}

TEST_CASE("complex tensors accept pairs and interleaved data") {
    const auto pairs = parse_tensor(R"({"field":"complex","dims":[2],"data":[[1,2],[3,-4]]})");
    const auto flat = parse_tensor(R"({"field":"complex","dims":[2],"data":[1,2,3,-4]})");
    REQUIRE(std::holds_alternative<ComplexTensor>(pairs));
    const auto& a = std::get<ComplexTensor>(pairs);
    const auto& b = std::get<ComplexTensor>(flat);
    CHECK(a[1] == Complex(3, -4));
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    const std::string text = tensor_to_json(a).dump();
    CHECK(std::get<ComplexTensor>(parse_tensor(text))[1] == Complex(3, -4));
}

TEST_CASE("malformed input names the problem") {
    CHECK(error_of("{\n  \"dims\": [2,\n  ]\n}").find("line 3") != std::string::npos);
    CHECK(error_of(R"({"data":[1,2]})").find("dims") != std::string::npos);
    CHECK(error_of(R"({"dims":[2],"data":[1,"x"]})").find("data[1]") != std::string::npos);
    CHECK(error_of(R"({"dims":[2,2],"data":[1,2,3]})").find("expected 4 entries") != std::string::npos);
    CHECK(error_of(R"({"field":"quaternion","dims":[1],"data":[1]})").find("field") != std::string::npos);
    CHECK(error_of(R"({"dims":[0],"data":[]})").find("dims[0]") != std::string::npos);
    CHECK(error_of("[1,2]").find("object") != std::string::npos);
}

TEST_CASE("property: reported decompositions re-validate after a round trip") {
    std::mt19937_64 rng(72);
    for (int trial = 0; trial < 8; ++trial) {
        const Tensor t = random_tensor({2, 3, 3}, rng);
        ApproxProblem p;
        p.tensor = t;
        p.notion = trial % 2 ? Notion::son() : Notion::con();
        p.rank = 2;
        p.config.starts = 8;
        const ApproxResult r = solve(p);
        const Json report = result_to_json(r);
        const Decomposition back = decomposition_from_json(parse_json(report.dump())["decomposition"]);
        CHECK(back.dims == r.decomposition.dims);
        REQUIRE(back.rank() == r.decomposition.rank());
        for (std::size_t k = 0; k < back.rank(); ++k) {
            CHECK(back.terms[k].sigma == r.decomposition.terms[k].sigma);
            for (std::size_t j = 0; j < back.dims.size(); ++j) {
                CHECK(back.terms[k].factors[j] == r.decomposition.terms[k].factors[j]);
            }
        }
        CHECK(decomposition_check(back, p.notion).valid);
        CHECK(report["certificate"]["valid"].get<bool>());
    }
}

TEST_CASE("decomposition parsing checks factor shapes") {
    const Json wrong = parse_json(R"({"dims":[2,2],"terms":[{"sigma":1,"factors":[[1,0],[1,0,0]]}]})");
    try {
        decomposition_from_json(wrong);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("terms[0].factors[1]") != std::string::npos);
    }
}
