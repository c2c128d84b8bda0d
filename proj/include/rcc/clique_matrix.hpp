// Binary clique-membership matrix, stored row-wise as sorted vertex lists.
// Row n is the n-th clique; column i is vertex i. Rows may be empty while a
// sampler is mid-inference, all-zero columns are never valid.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rcc {

using Vertex = std::uint32_t;
using Clique = std::vector<Vertex>;  // strictly increasing vertex ids

class CliqueMatrix {
  public:
    CliqueMatrix() = default;
    CliqueMatrix(std::uint32_t n_vertices, std::vector<Clique> rows);

    std::uint32_t n_cliques() const { return static_cast<std::uint32_t>(rows_.size()); }
    std::uint32_t vertex_count() const { return n_vertices_; }
    const std::vector<Clique>& rows() const { return rows_; }
    const Clique& row(std::size_t n) const { return rows_[n]; }

    // Appends a clique; vertex ids beyond the current width grow the matrix.
    void add_row(Clique members);

    // Membership count per column. Throws if some column is all-zero, unless
    // allow_empty_columns is set (used transiently while building).
    std::vector<std::uint32_t> column_counts(bool allow_empty_columns = false) const;

    bool contains(std::size_t n, Vertex v) const;

    // Total number of ones.
    std::uint64_t ones() const;

    bool operator==(const CliqueMatrix& o) const {
        return n_vertices_ == o.n_vertices_ && rows_ == o.rows_;
    }

    std::string to_json() const;
    static CliqueMatrix from_json(const std::string& text);

  private:
    std::uint32_t n_vertices_ = 0;
    std::vector<Clique> rows_;

    static void check_row(const Clique& row, std::uint32_t n_vertices);
};

}  // namespace rcc
