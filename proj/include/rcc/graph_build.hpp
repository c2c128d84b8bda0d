// Turning clique covers into graphs: exact collapse, multiplicity-preserving
// collapse, and the noisy-OR partial-observation model with its two
// equivalent samplers.
#pragma once

#include <cstdint>
#include <vector>

#include "rcc/clique_matrix.hpp"
#include "rcc/graph.hpp"
#include "rcc/hyperparams.hpp"
#include "rcc/rng.hpp"

namespace rcc {

// Adjacency min(Z^T Z - diag, 1): an edge wherever two vertices share at
// least one clique. Vertex set = columns of Z.
Graph cover_to_graph(const CliqueMatrix& z);

// Shared-clique counts kept as multiplicities.
Multigraph cover_to_multigraph(const CliqueMatrix& z);

struct NoisyOrParams {
    // Shared success probability when per_clique is empty; otherwise one
    // probability per row of the cover.
    double shared = 1.0;
    std::vector<double> per_clique;

    bool is_shared() const { return per_clique.empty(); }
    void validate(std::uint32_t n_cliques) const;
    double value(std::size_t row) const { return is_shared() ? shared : per_clique[row]; }
};

// P(edge observed | covered by cliques with probabilities pi_1..pi_m)
//   = 1 - prod (1 - pi_k).
double noisy_or_edge_prob(const std::vector<double>& pis);
double noisy_or_edge_prob(double shared_pi, std::uint32_t multiplicity);

// Observation samplers. Both draw G | Z, pi from the same distribution:
// `pairwise` flips each covered pair once with its noisy-OR probability,
// `superposition` activates each pair independently inside every covering
// clique and takes the union. Activation variables are independent across
// pairs and cliques, so the union construction factorizes over pairs and the
// two joints coincide (exhaustively checked in the tests).
Graph sample_observed_graph(const CliqueMatrix& z, const NoisyOrParams& pi, Rng& rng);
Graph sample_observed_graph_superposition(const CliqueMatrix& z, const NoisyOrParams& pi, Rng& rng);

// Graph on cliques: vertices are rows of Z, edges join rows sharing a vertex.
Graph generating_clique_intersection_graph(const CliqueMatrix& z);

}  // namespace rcc
