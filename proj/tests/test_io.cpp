#include <stdexcept>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "rcc/clique_matrix.hpp"

using namespace rcc;

TEST_CASE("clique matrix basics") {
    CliqueMatrix z(5, {Clique{0, 2, 4}, Clique{}, Clique{1, 2}});
    CHECK(z.n_cliques() == 3);
    CHECK(z.vertex_count() == 5);
    CHECK(z.ones() == 5);
    CHECK(z.contains(0, 2));
    CHECK_FALSE(z.contains(1, 2));
    CHECK(z.row(2) == Clique{1, 2});

    const auto counts = z.column_counts(true);
    const std::vector<std::uint32_t> want = {1, 1, 2, 0, 1};
    CHECK(counts == want);
    CHECK_THROWS_AS(z.column_counts(), std::invalid_argument);  // vertex 3 uncovered

    CliqueMatrix grown;
    grown.add_row({0, 7});
    CHECK(grown.vertex_count() == 8);
    grown.add_row({2});
    CHECK(grown.vertex_count() == 8);

    CHECK_THROWS_AS(CliqueMatrix(3, {Clique{0, 0}}), std::invalid_argument);  // duplicate
    CHECK_THROWS_AS(CliqueMatrix(3, {Clique{2, 1}}), std::invalid_argument);  // not increasing
    CHECK_THROWS_AS(CliqueMatrix(3, {Clique{0, 3}}), std::out_of_range);  // out of range
}

TEST_CASE("clique matrix json round-trip") {
    CliqueMatrix z(4, {Clique{0, 1}, Clique{}, Clique{1, 2, 3}});
    const CliqueMatrix back = CliqueMatrix::from_json(z.to_json());
    CHECK(back == z);

    // Shape survives even with trailing isolated columns.
    CliqueMatrix wide(9, {Clique{0, 1}});
    CHECK(CliqueMatrix::from_json(wide.to_json()).vertex_count() == 9);
}

TEST_CASE("clique matrix json accepts unsorted rows, rejects junk") {
    const CliqueMatrix z =
        CliqueMatrix::from_json(R"({"vertices": 4, "cliques": [[3, 1, 0], [2]]})");
    CHECK(z.row(0) == Clique{0, 1, 3});

    CHECK_THROWS(CliqueMatrix::from_json("not json"));
    CHECK_THROWS(CliqueMatrix::from_json(R"({"vertices": 2})"));
    CHECK_THROWS_AS(CliqueMatrix::from_json(R"({"vertices": 2, "cliques": [[0, 5]]})"),
                    std::out_of_range);
    CHECK_THROWS_AS(CliqueMatrix::from_json(R"({"vertices": 2, "cliques": [[1, 1]]})"),
                    std::invalid_argument);
}
