#include "rcc/clique_matrix.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace rcc {

void CliqueMatrix::check_row(const Clique& row, std::uint32_t n_vertices) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] >= n_vertices)
            throw std::out_of_range("CliqueMatrix: vertex id " + std::to_string(row[k]) +
                                    " outside [0, " + std::to_string(n_vertices) + ")");
        if (k > 0 && row[k] <= row[k - 1])
            throw std::invalid_argument("CliqueMatrix: row must be strictly increasing");
    }
}

CliqueMatrix::CliqueMatrix(std::uint32_t n_vertices, std::vector<Clique> rows)
    : n_vertices_(n_vertices), rows_(std::move(rows)) {
    for (const auto& r : rows_) check_row(r, n_vertices_);
}

void CliqueMatrix::add_row(Clique members) {
    for (std::size_t k = 1; k < members.size(); ++k)
        if (members[k] <= members[k - 1])
            throw std::invalid_argument("CliqueMatrix: row must be strictly increasing");
    if (!members.empty()) n_vertices_ = std::max(n_vertices_, members.back() + 1);
    rows_.push_back(std::move(members));
}

std::vector<std::uint32_t> CliqueMatrix::column_counts(bool allow_empty_columns) const {
    std::vector<std::uint32_t> counts(n_vertices_, 0);
    for (const auto& r : rows_)
        for (Vertex v : r) ++counts[v];
    if (!allow_empty_columns)
        for (std::uint32_t v = 0; v < n_vertices_; ++v)
            if (counts[v] == 0)
                throw std::invalid_argument("CliqueMatrix: vertex " + std::to_string(v) +
                                            " belongs to no clique");
    return counts;
}

bool CliqueMatrix::contains(std::size_t n, Vertex v) const {
    const Clique& r = rows_.at(n);
    return std::binary_search(r.begin(), r.end(), v);
}

std::uint64_t CliqueMatrix::ones() const {
    std::uint64_t total = 0;
    for (const auto& r : rows_) total += r.size();
    return total;
}

std::string CliqueMatrix::to_json() const {
    nlohmann::json j;
    j["vertices"] = n_vertices_;
    j["cliques"] = rows_;
    return j.dump(2);
}

CliqueMatrix CliqueMatrix::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("vertices") || !j.contains("cliques"))
        throw std::invalid_argument("CliqueMatrix: json needs 'vertices' and 'cliques'");
    auto rows = j.at("cliques").get<std::vector<Clique>>();
    for (auto& r : rows) std::sort(r.begin(), r.end());
    return CliqueMatrix(j.at("vertices").get<std::uint32_t>(), std::move(rows));
}

}  // namespace rcc
