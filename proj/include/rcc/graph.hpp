// Simple undirected graph and multigraph values. Vertices are 0-based and
// contiguous; edges are stored once with u < v. No self-loops.
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rcc/clique_matrix.hpp"

namespace rcc {

inline std::uint64_t pair_key(Vertex u, Vertex v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
}
inline std::pair<Vertex, Vertex> key_pair(std::uint64_t k) {
    return {static_cast<Vertex>(k >> 32), static_cast<Vertex>(k & 0xffffffffu)};
}

class Graph {
  public:
    Graph() = default;
    // Deduplicates, symmetrizes and drops self-loops.
    Graph(std::uint32_t vertex_count, const std::vector<std::pair<Vertex, Vertex>>& edges);

    std::uint32_t vertex_count() const { return vertex_count_; }
    std::uint64_t edge_count() const { return edges_.size(); }
    const std::vector<std::pair<Vertex, Vertex>>& edges() const { return edges_; }
    const std::vector<Vertex>& neighbors(Vertex v) const { return adj_[v]; }
    std::uint32_t degree(Vertex v) const { return static_cast<std::uint32_t>(adj_[v].size()); }
    bool has_edge(Vertex u, Vertex v) const;

    bool operator==(const Graph& o) const {
        return vertex_count_ == o.vertex_count_ && edges_ == o.edges_;
    }

  private:
    std::uint32_t vertex_count_ = 0;
    std::vector<std::pair<Vertex, Vertex>> edges_;  // sorted, u < v
    std::vector<std::vector<Vertex>> adj_;          // sorted neighbor lists
};

class Multigraph {
  public:
    Multigraph() = default;
    Multigraph(std::uint32_t vertex_count, std::unordered_map<std::uint64_t, std::uint32_t> mult);

    std::uint32_t vertex_count() const { return vertex_count_; }
    // Number of edges counted with multiplicity.
    std::uint64_t edge_count() const { return total_; }
    // Number of distinct vertex pairs with multiplicity >= 1.
    std::uint64_t support_size() const { return mult_.size(); }
    std::uint32_t multiplicity(Vertex u, Vertex v) const;
    const std::unordered_map<std::uint64_t, std::uint32_t>& multiplicities() const { return mult_; }

    Graph collapse() const;

  private:
    std::uint32_t vertex_count_ = 0;
    std::unordered_map<std::uint64_t, std::uint32_t> mult_;
    std::uint64_t total_ = 0;
};

// Whitespace-separated "u v" lines, '#' starts a comment, ids 0-based.
// Duplicates and reversed copies collapse to one edge. vertex_count is
// max id + 1 (or the header hint "# vertices N" when larger).
Graph load_edge_list(const std::string& path);
void save_edge_list(const Graph& g, const std::string& path);

// Same format with a third multiplicity column.
Multigraph load_multigraph(const std::string& path);
void save_multigraph(const Multigraph& g, const std::string& path);

}  // namespace rcc
