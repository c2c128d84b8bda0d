#include "rcc/graph_build.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace rcc {

Graph cover_to_graph(const CliqueMatrix& z) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (const auto& row : z.rows())
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b)
                if (seen.insert(pair_key(row[a], row[b])).second)
                    edges.emplace_back(row[a], row[b]);
    return Graph(z.vertex_count(), edges);
}

Multigraph cover_to_multigraph(const CliqueMatrix& z) {
    std::unordered_map<std::uint64_t, std::uint32_t> mult;
    for (const auto& row : z.rows())
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b) ++mult[pair_key(row[a], row[b])];
    return Multigraph(z.vertex_count(), std::move(mult));
}

void NoisyOrParams::validate(std::uint32_t n_cliques) const {
    if (is_shared()) {
        if (!(shared > 0.0) || !(shared <= 1.0))
            throw std::invalid_argument("NoisyOrParams: shared pi must lie in (0, 1]");
        return;
    }
    if (per_clique.size() != n_cliques)
        throw std::invalid_argument("NoisyOrParams: need one pi per clique, got " +
                                    std::to_string(per_clique.size()) + " for " +
                                    std::to_string(n_cliques));
    for (double p : per_clique)
        if (!(p > 0.0) || !(p <= 1.0))
            throw std::invalid_argument("NoisyOrParams: every pi must lie in (0, 1]");
}

double noisy_or_edge_prob(const std::vector<double>& pis) {
    double log_q = 0.0;
    for (double p : pis) {
        if (!(p >= 0.0) || !(p <= 1.0))
            throw std::invalid_argument("noisy_or_edge_prob: pi outside [0, 1]");
        log_q += std::log1p(-p);
    }
    return -std::expm1(log_q);
}

double noisy_or_edge_prob(double shared_pi, std::uint32_t multiplicity) {
    if (!(shared_pi >= 0.0) || !(shared_pi <= 1.0))
        throw std::invalid_argument("noisy_or_edge_prob: pi outside [0, 1]");
    return -std::expm1(double(multiplicity) * std::log1p(-shared_pi));
}

Graph sample_observed_graph(const CliqueMatrix& z, const NoisyOrParams& pi, Rng& rng) {
    pi.validate(z.n_cliques());
    // Per covered pair, accumulate log prod (1 - pi_k) over covering cliques
    // and flip once.
    std::unordered_map<std::uint64_t, double> log_q;
    for (std::size_t r = 0; r < z.n_cliques(); ++r) {
        const auto& row = z.row(r);
        double lq = std::log1p(-pi.value(r));
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b)
                log_q[pair_key(row[a], row[b])] += lq;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (const auto& [k, lq] : log_q)
        if (std::log(unif(rng)) >= lq) edges.push_back(key_pair(k));
    return Graph(z.vertex_count(), edges);
}

Graph sample_observed_graph_superposition(const CliqueMatrix& z, const NoisyOrParams& pi,
                                          Rng& rng) {
    pi.validate(z.n_cliques());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::unordered_set<std::uint64_t> active;
    for (std::size_t r = 0; r < z.n_cliques(); ++r) {
        const auto& row = z.row(r);
        double p = pi.value(r);
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b)
                if (unif(rng) < p) active.insert(pair_key(row[a], row[b]));
    }
    std::vector<std::pair<Vertex, Vertex>> edges;
    edges.reserve(active.size());
    for (auto k : active) edges.push_back(key_pair(k));
    return Graph(z.vertex_count(), edges);
}

Graph generating_clique_intersection_graph(const CliqueMatrix& z) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    std::vector<std::vector<std::uint32_t>> vertex_rows(z.vertex_count());
    for (std::uint32_t r = 0; r < z.n_cliques(); ++r)
        for (Vertex v : z.row(r)) vertex_rows[v].push_back(r);
    std::unordered_set<std::uint64_t> seen;
    for (const auto& rows : vertex_rows)
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = a + 1; b < rows.size(); ++b)
                if (seen.insert(pair_key(rows[a], rows[b])).second)
                    edges.emplace_back(rows[a], rows[b]);
    return Graph(z.n_cliques(), edges);
}

}  // namespace rcc
