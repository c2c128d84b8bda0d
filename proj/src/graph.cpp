#include "rcc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rcc {

Graph::Graph(std::uint32_t vertex_count, const std::vector<std::pair<Vertex, Vertex>>& edges)
    : vertex_count_(vertex_count) {
    edges_.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= vertex_count_ || v >= vertex_count_)
            throw std::out_of_range("Graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                                    ") outside vertex range");
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        edges_.emplace_back(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    adj_.assign(vertex_count_, {});
    for (auto [u, v] : edges_) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

bool Graph::has_edge(Vertex u, Vertex v) const {
    if (u == v || u >= vertex_count_ || v >= vertex_count_) return false;
    const auto& shorter = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
    Vertex other = adj_[u].size() <= adj_[v].size() ? v : u;
    return std::binary_search(shorter.begin(), shorter.end(), other);
}

Multigraph::Multigraph(std::uint32_t vertex_count,
                       std::unordered_map<std::uint64_t, std::uint32_t> mult)
    : vertex_count_(vertex_count), mult_(std::move(mult)) {
    for (auto it = mult_.begin(); it != mult_.end();) {
        auto [u, v] = key_pair(it->first);
        if (u >= vertex_count_ || v >= vertex_count_ || u >= v)
            throw std::invalid_argument("Multigraph: malformed pair key");
        if (it->second == 0) {
            it = mult_.erase(it);
        } else {
            total_ += it->second;
            ++it;
        }
    }
}

std::uint32_t Multigraph::multiplicity(Vertex u, Vertex v) const {
    if (u == v) return 0;
    auto it = mult_.find(pair_key(u, v));
    return it == mult_.end() ? 0 : it->second;
}

Graph Multigraph::collapse() const {
    std::vector<std::pair<Vertex, Vertex>> edges;
    edges.reserve(mult_.size());
    for (const auto& [k, m] : mult_) edges.push_back(key_pair(k));
    return Graph(vertex_count_, edges);
}

namespace {

// Shared line scanner for both formats. Yields the numeric fields of each
// non-comment line and tracks the optional "# vertices N" hint.
struct EdgeFileReader {
    std::ifstream in;
    std::uint32_t hinted_vertices = 0;
    std::string path;

    explicit EdgeFileReader(const std::string& p) : in(p), path(p) {
        if (!in) throw std::runtime_error("cannot open " + p);
    }

    bool next(std::vector<std::uint64_t>& fields) {
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) {
                std::istringstream hint(line.substr(hash + 1));
                std::string word;
                std::uint32_t n;
                if (hint >> word >> n && word == "vertices")
                    hinted_vertices = std::max(hinted_vertices, n);
                line.erase(hash);
            }
            std::istringstream ss(line);
            fields.clear();
            std::uint64_t x;
            while (ss >> x) fields.push_back(x);
            if (!ss.eof())
                throw std::runtime_error(path + ": non-numeric edge data in line '" + line + "'");
            if (!fields.empty()) return true;
        }
        return false;
    }
};

}  // namespace

Graph load_edge_list(const std::string& path) {
    EdgeFileReader reader(path);
    std::vector<std::pair<Vertex, Vertex>> edges;
    std::uint32_t max_id = 0;
    bool any = false;
    std::vector<std::uint64_t> fields;
    while (reader.next(fields)) {
        if (fields.size() != 2)
            throw std::runtime_error(path + ": expected 'u v' per line, got " +
                                     std::to_string(fields.size()) + " fields");
        auto u = Vertex(fields[0]), v = Vertex(fields[1]);
        max_id = std::max({max_id, u, v});
        any = true;
        edges.emplace_back(u, v);
    }
    std::uint32_t n = std::max(reader.hinted_vertices, any ? max_id + 1 : 0);
    return Graph(n, edges);
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# vertices " << g.vertex_count() << "\n";
    for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

Multigraph load_multigraph(const std::string& path) {
    EdgeFileReader reader(path);
    std::unordered_map<std::uint64_t, std::uint32_t> mult;
    std::uint32_t max_id = 0;
    bool any = false;
    std::vector<std::uint64_t> fields;
    while (reader.next(fields)) {
        if (fields.size() != 3)
            throw std::runtime_error(path + ": expected 'u v multiplicity' per line");
        auto u = Vertex(fields[0]), v = Vertex(fields[1]);
        if (u == v) throw std::runtime_error(path + ": self-loop on vertex " + std::to_string(u));
        max_id = std::max({max_id, u, v});
        any = true;
        mult[pair_key(u, v)] += std::uint32_t(fields[2]);
    }
    std::uint32_t n = std::max(reader.hinted_vertices, any ? max_id + 1 : 0);
    return Multigraph(n, std::move(mult));
}

void save_multigraph(const Multigraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# vertices " << g.vertex_count() << "\n";
    std::vector<std::uint64_t> keys;
    keys.reserve(g.multiplicities().size());
    for (const auto& [k, m] : g.multiplicities()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (auto k : keys) {
        auto [u, v] = key_pair(k);
        out << u << " " << v << " " << g.multiplicity(u, v) << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace rcc
