#include <doctest.h>

#include "helpers.hpp"
#include "valp/combinators.hpp"
#include "valp/models.hpp"

using namespace valp;

namespace {

// Independent reading of the lattice: rank by dominance, result is the max.
int rank(DataType t) {
    switch (t) {
        case DataType::Discrete: return 0;
        case DataType::Numeric: return 1;
        case DataType::Samples: return 2;
    }
    return -1;
}

constexpr DataType kAll[] = {DataType::Numeric, DataType::Discrete, DataType::Samples};

}  // namespace

TEST_CASE("combine_type follows the dominance lattice on all nine pairs") {
    for (DataType a : kAll) {
        for (DataType b : kAll) {
            const DataType r = combine_type(a, b);
            CHECK(r == combine_type(b, a));
            CHECK(rank(r) == std::max(rank(a), rank(b)));
            // Each biconditional spelled out.
            CHECK((r == DataType::Samples) == (a == DataType::Samples || b == DataType::Samples));
            CHECK((r == DataType::Discrete) == (a == DataType::Discrete && b == DataType::Discrete));
            CHECK((r == DataType::Numeric) ==
                  ((a == DataType::Numeric || b == DataType::Numeric) && a != DataType::Samples &&
                   b != DataType::Samples));
        }
        CHECK(combine_type(a, a) == a);
    }
    CHECK(combine_type(DataType::Samples, DataType::Numeric) == DataType::Samples);
    CHECK(combine_type(DataType::Discrete, DataType::Discrete) == DataType::Discrete);
    CHECK(combine_type(DataType::Numeric, DataType::Numeric) == DataType::Numeric);
}

TEST_CASE("concat") {
    const DataBatch a{test::mat({{1, 2}}), DataType::Numeric};
    const DataBatch r = concat(a, {test::mat({{3}}), DataType::Numeric});
    CHECK(r.values == test::mat({{1, 2, 3}}));
    CHECK(r.dtype == DataType::Numeric);
    const DataBatch s = concat(a, {test::mat({{0.5}}), DataType::Samples});
    CHECK(s.values == test::mat({{1, 2, 0.5}}));
    CHECK(s.dtype == DataType::Samples);
    try {
        concat({Matrix::Zero(2, 1), DataType::Numeric}, {Matrix::Zero(3, 1), DataType::Numeric});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RowMismatch);
    }
}

TEST_CASE("add truncates to the narrower operand") {
    const DataBatch r = add({test::mat({{1, 2, 3}}), DataType::Numeric}, {test::mat({{10, 20}}), DataType::Numeric});
    CHECK(r.values == test::mat({{11, 22}}));
    const DataBatch s = add({test::mat({{0, 0}}), DataType::Numeric}, {test::mat({{5, 7}}), DataType::Samples});
    CHECK(s.values == test::mat({{5, 7}}));
    CHECK(s.dtype == DataType::Samples);
    CHECK_THROWS_AS(add({Matrix::Zero(1, 2), DataType::Numeric}, {Matrix::Zero(4, 2), DataType::Numeric}), Error);
}

TEST_CASE("combine folds left in the given order") {
    const DataBatch x{test::mat({{4, 5}}), DataType::Discrete};
    const std::vector<DataBatch> one{x};
    const DataBatch same = combine(CombinerKind::Concat, one);
    CHECK(same.values == x.values);
    CHECK(same.dtype == DataType::Discrete);

    const std::vector<DataBatch> three{{test::mat({{1}}), DataType::Numeric},
                                       {test::mat({{2}}), DataType::Numeric},
                                       {test::mat({{3}}), DataType::Numeric}};
    CHECK(combine(CombinerKind::Add, three).values == test::mat({{6}}));
    CHECK(combine(CombinerKind::Concat, three).values == test::mat({{1, 2, 3}}));
    try {
        combine(CombinerKind::Concat, std::vector<DataBatch>{});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyInput);
    }
    const std::vector<int> widths{3, 5, 4};
    CHECK(combined_width(CombinerKind::Concat, widths) == 12);
    CHECK(combined_width(CombinerKind::Add, widths) == 3);
}

TEST_CASE("type inference on the worked example") {
    const TypeReport t = infer_types(worked_example_model());
    CHECK(t.at("i0") == DataType::Numeric);
    CHECK(t.at("n0") == DataType::Numeric);
    CHECK(t.at("n1") == DataType::Numeric);
    CHECK(t.at("n3") == DataType::Numeric);
    CHECK(t.at("n2") == DataType::Discrete);
    CHECK(t.at("n4") == DataType::Samples);
    CHECK(t.size() == 6);
}

TEST_CASE("a GenericMLP fed only by a decoder produces Samples") {
    ModelGraph g;
    g.inputs = {{"i0", DataUnitSpec(4, DataType::Numeric)}};
    g.networks = {test::net("n0", NetworkType::GenericMLP, {}, 4, DataType::Numeric),
                  test::net("n1", NetworkType::Decoder, {}, 3, DataType::Samples),
                  test::net("n2", NetworkType::GenericMLP, {}, 2, DataType::Samples)};
    g.connections = {Connection(0, "i0", "n0", {0, 1, 2, 3}), Connection(1, "n0", "n1", {0, 1}),
                     Connection(2, "n1", "n2", {0, 1, 2})};
    CHECK(infer_types(g).at("n2") == DataType::Samples);

    // Network order in storage does not matter.
    ModelGraph h = g;
    std::reverse(h.networks.begin(), h.networks.end());
    CHECK(infer_types(h) == infer_types(g));

    g.connections.pop_back();
    try {
        infer_types(g);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingInput);
        CHECK(std::string(e.what()).find("n2") != std::string::npos);
    }
    CHECK(infer_types_partial(g).at("n2") == DataType::Numeric);
}
