#include "rcc/graph_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace rcc {

double density(const Graph& g) {
    if (g.vertex_count() < 2)
        throw std::invalid_argument("density: needs at least two vertices");
    double n = g.vertex_count();
    return 2.0 * double(g.edge_count()) / (n * (n - 1.0));
}

std::vector<std::uint32_t> degrees(const Graph& g) {
    std::vector<std::uint32_t> d(g.vertex_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) d[v] = g.degree(v);
    return d;
}

double average_degree(const Graph& g) {
    if (g.vertex_count() == 0) return 0.0;
    return 2.0 * double(g.edge_count()) / double(g.vertex_count());
}

std::vector<std::uint64_t> degree_distribution(const Graph& g) {
    std::uint32_t max_deg = 0;
    for (Vertex v = 0; v < g.vertex_count(); ++v) max_deg = std::max(max_deg, g.degree(v));
    std::vector<std::uint64_t> hist(std::size_t(max_deg) + 1, 0);
    for (Vertex v = 0; v < g.vertex_count(); ++v) ++hist[g.degree(v)];
    return hist;
}

std::vector<double> degree_distribution_normalized(const Graph& g) {
    auto hist = degree_distribution(g);
    std::vector<double> out(hist.size());
    double n = std::max<std::uint32_t>(g.vertex_count(), 1);
    for (std::size_t k = 0; k < hist.size(); ++k) out[k] = double(hist[k]) / n;
    return out;
}

std::vector<std::uint64_t> triangles_per_vertex_counts(const Graph& g) {
    const std::uint32_t n = g.vertex_count();
    std::vector<std::uint64_t> tri(n, 0);
    if (n == 0) return tri;

    // Degree ordering keeps the forward lists short on skewed graphs.
    std::vector<std::uint32_t> rank(n);
    {
        std::vector<Vertex> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](Vertex a, Vertex b) {
            return g.degree(a) != g.degree(b) ? g.degree(a) < g.degree(b) : a < b;
        });
        for (std::uint32_t k = 0; k < n; ++k) rank[order[k]] = k;
    }
    std::vector<std::vector<Vertex>> forward(n);
    for (auto [u, v] : g.edges()) (rank[u] < rank[v] ? forward[u] : forward[v]).push_back(rank[u] < rank[v] ? v : u);
    for (auto& f : forward) std::sort(f.begin(), f.end(), [&](Vertex a, Vertex b) { return rank[a] < rank[b]; });

    for (Vertex u = 0; u < n; ++u) {
        const auto& fu = forward[u];
        for (std::size_t i = 0; i < fu.size(); ++i) {
            Vertex v = fu[i];
            // Intersect forward[u] beyond i with forward[v]; both sorted by rank.
            std::size_t a = i + 1, b = 0;
            const auto& fv = forward[v];
            while (a < fu.size() && b < fv.size()) {
                if (rank[fu[a]] < rank[fv[b]])
                    ++a;
                else if (rank[fu[a]] > rank[fv[b]])
                    ++b;
                else {
                    ++tri[u], ++tri[v], ++tri[fu[a]];
                    ++a, ++b;
                }
            }
        }
    }
    return tri;
}

std::uint64_t triangle_count(const Graph& g) {
    auto tri = triangles_per_vertex_counts(g);
    std::uint64_t total = std::accumulate(tri.begin(), tri.end(), std::uint64_t(0));
    return total / 3;
}

double triangles_per_vertex(const Graph& g) {
    if (g.vertex_count() == 0) return 0.0;
    return double(triangle_count(g)) / double(g.vertex_count());
}

std::vector<double> local_clustering(const Graph& g) {
    auto tri = triangles_per_vertex_counts(g);
    std::vector<double> out(g.vertex_count(), 0.0);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        double d = g.degree(v);
        if (d >= 2.0) out[v] = 2.0 * double(tri[v]) / (d * (d - 1.0));
    }
    return out;
}

double average_local_clustering(const Graph& g, bool include_low_degree) {
    auto local = local_clustering(g);
    double sum = 0.0;
    std::uint64_t count = 0;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!include_low_degree && g.degree(v) < 2) continue;
        sum += local[v];
        ++count;
    }
    return count == 0 ? 0.0 : sum / double(count);
}

namespace {

struct BronKerbosch {
    const Graph& g;
    std::uint64_t budget;
    std::uint64_t found = 0;
    std::vector<Clique> out;
    Clique current;

    void report() {
        if (found == budget) throw CliqueBudgetExceeded(found, budget);
        ++found;
        Clique c = current;
        std::sort(c.begin(), c.end());
        out.push_back(std::move(c));
    }

    // P and X are sorted. Pivot on the vertex of P union X with the most
    // neighbors in P, then branch only on P minus N(pivot).
    void expand(std::vector<Vertex> p, std::vector<Vertex> x) {
        if (p.empty() && x.empty()) {
            report();
            return;
        }
        Vertex pivot = 0;
        std::size_t best = 0;
        bool have = false;
        auto consider = [&](Vertex u) {
            const auto& nb = g.neighbors(u);
            std::size_t hits = 0;
            for (Vertex w : p)
                if (std::binary_search(nb.begin(), nb.end(), w)) ++hits;
            if (!have || hits > best) have = true, best = hits, pivot = u;
        };
        for (Vertex u : p) consider(u);
        for (Vertex u : x) consider(u);

        std::vector<Vertex> candidates;
        const auto& pn = g.neighbors(pivot);
        for (Vertex u : p)
            if (!std::binary_search(pn.begin(), pn.end(), u)) candidates.push_back(u);

        for (Vertex u : candidates) {
            const auto& nb = g.neighbors(u);
            std::vector<Vertex> p2, x2;
            for (Vertex w : p)
                if (std::binary_search(nb.begin(), nb.end(), w)) p2.push_back(w);
            for (Vertex w : x)
                if (std::binary_search(nb.begin(), nb.end(), w)) x2.push_back(w);
            current.push_back(u);
            expand(std::move(p2), std::move(x2));
            current.pop_back();
            p.erase(std::find(p.begin(), p.end(), u));
            auto pos = std::lower_bound(x.begin(), x.end(), u);
            x.insert(pos, u);
        }
    }
};

}  // namespace

std::vector<Clique> maximal_cliques(const Graph& g, std::uint64_t budget) {
    BronKerbosch bk{g, budget, 0, {}, {}};
    std::vector<Vertex> all(g.vertex_count());
    std::iota(all.begin(), all.end(), 0);
    bk.expand(std::move(all), {});
    return std::move(bk.out);
}

std::vector<std::uint32_t> max_clique_per_vertex(const Graph& g, std::uint64_t budget) {
    std::vector<std::uint32_t> best(g.vertex_count(), 0);
    for (const auto& c : maximal_cliques(g, budget))
        for (Vertex v : c) best[v] = std::max<std::uint32_t>(best[v], std::uint32_t(c.size()));
    return best;
}

double average_max_clique_per_vertex(const Graph& g, std::uint64_t budget) {
    if (g.vertex_count() == 0) return 0.0;
    auto best = max_clique_per_vertex(g, budget);
    return double(std::accumulate(best.begin(), best.end(), std::uint64_t(0))) /
           double(g.vertex_count());
}

RegressionResult sparsity_regression(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("sparsity_regression: size mismatch");
    if (xs.size() < 3)
        throw std::invalid_argument("sparsity_regression: needs at least 3 points");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] > 0.0) || !(ys[k] > 0.0))
            throw std::invalid_argument("sparsity_regression: points must be positive");
        lx[k] = std::log(xs[k]);
        ly[k] = std::log(ys[k]);
    }
    double n = double(xs.size());
    double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    if (!(sxx > 1e-12))
        throw std::invalid_argument("sparsity_regression: x values are degenerate");

    RegressionResult r;
    r.n_points = std::uint32_t(xs.size());
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double rss = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        double e = ly[k] - (r.intercept + r.slope * lx[k]);
        rss += e * e;
    }
    double s2 = xs.size() > 2 ? rss / (n - 2.0) : 0.0;
    r.slope_stderr = std::sqrt(s2 / sxx);
    r.slope_ci_low = r.slope - 1.96 * r.slope_stderr;
    r.slope_ci_high = r.slope + 1.96 * r.slope_stderr;
    return r;
}

GraphSummary summarize(const Graph& g, bool skip_max_clique, std::uint64_t clique_budget) {
    GraphSummary s;
    s.vertices = g.vertex_count();
    s.edges = g.edge_count();
    s.triangles_per_vertex = triangles_per_vertex(g);
    s.density = g.vertex_count() >= 2 ? density(g) : 0.0;
    s.average_degree = average_degree(g);
    if (!skip_max_clique) s.average_max_clique = average_max_clique_per_vertex(g, clique_budget);
    s.clustering_coefficient = average_local_clustering(g);
    return s;
}

std::string summary_to_json(const GraphSummary& s) {
    nlohmann::json j;
    j["vertices"] = s.vertices;
    j["edges"] = s.edges;
    j["triang./vertex"] = s.triangles_per_vertex;
    j["density (x1k)"] = s.density * 1000.0;
    j["av. degree"] = s.average_degree;
    if (s.average_max_clique)
        j["max. clique"] = *s.average_max_clique;
    else
        j["max. clique"] = nullptr;
    j["cluster. coeff."] = s.clustering_coefficient;
    return j.dump(2);
}

std::string summary_to_csv(const GraphSummary& s) {
    std::ostringstream out;
    out << "vertices,edges,triang./vertex,density (x1k),av. degree,max. clique,cluster. coeff.\n";
    out << s.vertices << "," << s.edges << "," << s.triangles_per_vertex << ","
        << s.density * 1000.0 << "," << s.average_degree << ",";
    if (s.average_max_clique) out << *s.average_max_clique;
    out << "," << s.clustering_coefficient << "\n";
    return out.str();
}

}  // namespace rcc
