// Descriptive graph statistics: degrees, triangles, local clustering,
// maximal cliques (with an enumeration budget), and the log-log sparsity
// regression used to measure growth exponents.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcc/graph.hpp"

namespace rcc {

// Thrown when maximal-clique enumeration exceeds its budget; carries the
// partial count so callers can report how far it got.
class CliqueBudgetExceeded : public std::runtime_error {
  public:
    CliqueBudgetExceeded(std::uint64_t found, std::uint64_t budget)
        : std::runtime_error("maximal clique enumeration exceeded budget of " +
                             std::to_string(budget) + " cliques"),
          found_(found), budget_(budget) {}
    std::uint64_t found() const { return found_; }
    std::uint64_t budget() const { return budget_; }

  private:
    std::uint64_t found_, budget_;
};

// 2|E| / (|V| (|V|-1)); rejects graphs with fewer than two vertices.
double density(const Graph& g);

std::vector<std::uint32_t> degrees(const Graph& g);
double average_degree(const Graph& g);

// Histogram over degree values [0..max]; normalized variant divides by |V|.
std::vector<std::uint64_t> degree_distribution(const Graph& g);
std::vector<double> degree_distribution_normalized(const Graph& g);

// Triangles through each vertex, each triangle counted once per member.
std::vector<std::uint64_t> triangles_per_vertex_counts(const Graph& g);
std::uint64_t triangle_count(const Graph& g);
// Total triangles divided by |V|.
double triangles_per_vertex(const Graph& g);

// Fraction of closed wedges at v: triangles(v) / C(deg v, 2). Vertices of
// degree < 2 have no wedges; local value defined as 0 for them.
std::vector<double> local_clustering(const Graph& g);
// Average over vertices of degree >= 2; include_low_degree averages over all
// vertices instead, counting degree < 2 as zero. Degenerate case (no vertex
// of degree >= 2) returns 0.
double average_local_clustering(const Graph& g, bool include_low_degree = false);

// All maximal cliques via pivoted recursion; throws CliqueBudgetExceeded if
// more than `budget` cliques would be produced. Isolated vertices come back
// as singleton cliques.
std::vector<Clique> maximal_cliques(const Graph& g, std::uint64_t budget = 1000000);

// Size of the largest maximal clique containing each vertex, and its average
// over all vertices.
std::vector<std::uint32_t> max_clique_per_vertex(const Graph& g, std::uint64_t budget = 1000000);
double average_max_clique_per_vertex(const Graph& g, std::uint64_t budget = 1000000);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double slope_ci_low = 0.0;   // 95% normal interval
    double slope_ci_high = 0.0;
    std::uint32_t n_points = 0;
};

// Least squares on (log x, log y). Needs >= 3 points with x, y > 0 and
// non-degenerate spread in x.
RegressionResult sparsity_regression(const std::vector<double>& xs, const std::vector<double>& ys);

struct GraphSummary {
    std::uint32_t vertices = 0;
    std::uint64_t edges = 0;
    double triangles_per_vertex = 0.0;
    double density = 0.0;  // raw; reports scale by 1000
    double average_degree = 0.0;
    std::optional<double> average_max_clique;  // empty when skipped
    double clustering_coefficient = 0.0;
};

GraphSummary summarize(const Graph& g, bool skip_max_clique = false,
                       std::uint64_t clique_budget = 1000000);

// Emission with the report's column names; density scaled by 1000.
std::string summary_to_json(const GraphSummary& s);
std::string summary_to_csv(const GraphSummary& s);

}  // namespace rcc
