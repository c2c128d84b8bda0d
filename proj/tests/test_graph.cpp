#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "rcc/graph.hpp"

using namespace rcc;

namespace {

std::string temp_path(const std::string& stem) {
    return std::string("/tmp/rcc_test_") + stem + "_" + std::to_string(::getpid());
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST_CASE("pair keys pack and unpack") {
    CHECK(pair_key(3, 7) == pair_key(7, 3));
    auto [u, v] = key_pair(pair_key(7, 3));
    CHECK(u == 3);
    CHECK(v == 7);
}

TEST_CASE("graph construction cleans its input") {
    // Duplicates, reversed copies and a self-loop all collapse away.
    Graph g(5, {{1, 0}, {0, 1}, {2, 2}, {3, 4}, {0, 1}, {1, 3}});
    CHECK(g.vertex_count() == 5);
    CHECK(g.edge_count() == 3);
    const std::vector<std::pair<Vertex, Vertex>> want = {{0, 1}, {1, 3}, {3, 4}};
    CHECK(g.edges() == want);

    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK_FALSE(g.has_edge(0, 3));
    CHECK_FALSE(g.has_edge(2, 2));

    CHECK(g.degree(1) == 2);
    CHECK(g.degree(2) == 0);
    const std::vector<Vertex> nbr1 = {0, 3};
    CHECK(g.neighbors(1) == nbr1);

    CHECK_THROWS_AS(Graph(2, {{0, 2}}), std::out_of_range);
}

TEST_CASE("multigraph bookkeeping and collapse") {
    Multigraph m(4, {{pair_key(0, 1), 3}, {pair_key(1, 2), 1}, {pair_key(2, 3), 0}});
    CHECK(m.vertex_count() == 4);
    CHECK(m.support_size() == 2);  // zero-multiplicity entries are dropped
    CHECK(m.edge_count() == 4);    // 3 + 1, counted with multiplicity
    CHECK(m.multiplicity(1, 0) == 3);
    CHECK(m.multiplicity(2, 3) == 0);

    const Graph g = m.collapse();
    CHECK(g.edge_count() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
}

TEST_CASE("edge list files round-trip") {
    const std::string path = temp_path("edges");
    Graph g(6, {{0, 1}, {1, 2}, {4, 5}});
    save_edge_list(g, path);
    const Graph back = load_edge_list(path);
    CHECK(back == g);
    CHECK(back.vertex_count() == 6);  // isolated vertex 3 survives via the header hint
    std::remove(path.c_str());
}

TEST_CASE("edge list parsing: comments, hints, malformed lines") {
    const std::string path = temp_path("parse");

    write_file(path, "# a comment\n0 1\n2 0 # trailing note\n\n1 2\n");
    Graph g = load_edge_list(path);
    CHECK(g.vertex_count() == 3);
    CHECK(g.edge_count() == 3);

    // The hint only ever widens the vertex range.
    write_file(path, "# vertices 10\n0 1\n");
    CHECK(load_edge_list(path).vertex_count() == 10);
    write_file(path, "# vertices 2\n0 5\n");
    CHECK(load_edge_list(path).vertex_count() == 6);

    write_file(path, "0 x\n");
    CHECK_THROWS_AS(load_edge_list(path), std::runtime_error);
    write_file(path, "3\n");
    CHECK_THROWS_AS(load_edge_list(path), std::runtime_error);
    CHECK_THROWS_AS(load_edge_list("/nonexistent/rcc"), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("multigraph files round-trip") {
    const std::string path = temp_path("multi");
    Multigraph m(3, {{pair_key(0, 1), 2}, {pair_key(1, 2), 5}});
    save_multigraph(m, path);
    const Multigraph back = load_multigraph(path);
    CHECK(back.vertex_count() == 3);
    CHECK(back.edge_count() == 7);
    CHECK(back.multiplicity(0, 1) == 2);
    CHECK(back.multiplicity(1, 2) == 5);

    write_file(path, "0 1\n");  // missing multiplicity column
    CHECK_THROWS_AS(load_multigraph(path), std::runtime_error);
    std::remove(path.c_str());
}
