#include "rcc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rcc/graph_build.hpp"
#include "rcc/sbibp.hpp"

namespace rcc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double clamp_prob(double p) { return std::min(std::max(p, 1e-12), 1.0 - 1e-12); }
}  // namespace

void MoveMix::validate() const {
    const double ws[] = {split_merge, gibbs, empty_clique, pi, hyper};
    double total = 0.0;
    for (double w : ws) {
        if (!(w >= 0.0)) throw std::invalid_argument("MoveMix: weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("MoveMix: at least one weight must be positive");
}

McmcConfig McmcConfig::defaults(ObservationMode mode) {
    McmcConfig cfg;
    cfg.mode = mode;
    if (mode == ObservationMode::partial) {
        cfg.init = InitStrategy::greedy_cover;
        cfg.moves = MoveMix{0.35, 0.25, 0.15, 0.25, 0.0};
    }
    return cfg;
}

CliqueMatrix init_cover(const Graph& g, InitStrategy strategy) {
    std::vector<Clique> rows;
    if (strategy == InitStrategy::two_cliques) {
        for (auto [u, v] : g.edges()) rows.push_back({u, v});
    } else {
        // Greedy: seed with an uncovered edge, absorb the common neighbor
        // that closes the most still-uncovered edges, repeat.
        std::vector<bool> covered(g.edge_count(), false);
        std::unordered_map<std::uint64_t, std::size_t> edge_index;
        for (std::size_t e = 0; e < g.edges().size(); ++e)
            edge_index[pair_key(g.edges()[e].first, g.edges()[e].second)] = e;
        auto is_covered = [&](Vertex a, Vertex b) { return covered[edge_index.at(pair_key(a, b))]; };

        for (std::size_t e = 0; e < g.edges().size(); ++e) {
            if (covered[e]) continue;
            auto [u, v] = g.edges()[e];
            Clique c = {u, v};
            std::vector<Vertex> common;
            const auto& nu = g.neighbors(u);
            const auto& nv = g.neighbors(v);
            std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(),
                                  std::back_inserter(common));
            while (!common.empty()) {
                Vertex best = common[0];
                std::uint32_t best_gain = 0;
                for (Vertex w : common) {
                    std::uint32_t gain = 0;
                    for (Vertex m : c)
                        if (!is_covered(m, w)) ++gain;
                    if (gain > best_gain) best_gain = gain, best = w;
                }
                if (best_gain == 0) break;
                c.push_back(best);
                std::vector<Vertex> next;
                const auto& nb = g.neighbors(best);
                std::set_intersection(common.begin(), common.end(), nb.begin(), nb.end(),
                                      std::back_inserter(next));
                next.erase(std::remove(next.begin(), next.end(), best), next.end());
                common = std::move(next);
            }
            std::sort(c.begin(), c.end());
            for (std::size_t a = 0; a < c.size(); ++a)
                for (std::size_t b = a + 1; b < c.size(); ++b)
                    covered[edge_index.at(pair_key(c[a], c[b]))] = true;
            rows.push_back(std::move(c));
        }
    }
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) == 0) rows.push_back({v});
    return CliqueMatrix(g.vertex_count(), std::move(rows));
}

double full_log_likelihood(const CliqueMatrix& z, const Graph& g) {
    return cover_to_graph(z) == g ? 0.0 : kNegInf;
}

double partial_log_likelihood(const CliqueMatrix& z, const Graph& g, const NoisyOrParams& pi) {
    pi.validate(z.n_cliques());
    if (z.vertex_count() != g.vertex_count())
        throw std::invalid_argument("partial_log_likelihood: vertex count mismatch");
    std::unordered_map<std::uint64_t, double> log_q;
    for (std::size_t r = 0; r < z.n_cliques(); ++r) {
        const auto& row = z.row(r);
        double lq = std::log1p(-pi.value(r));
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b)
                log_q[pair_key(row[a], row[b])] += lq;
    }
    double ll = 0.0;
    std::uint64_t covered_edges = 0;
    for (const auto& [k, lq] : log_q) {
        auto [u, v] = key_pair(k);
        if (g.has_edge(u, v)) {
            ll += std::log1p(-std::exp(lq));
            ++covered_edges;
        } else {
            ll += lq;
        }
    }
    if (covered_edges < g.edge_count()) return kNegInf;
    return ll;
}

double latent_only_edge_fraction(const CliqueMatrix& z, const Graph& g) {
    std::unordered_map<std::uint64_t, std::uint32_t> count;
    for (const auto& row : z.rows())
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b) ++count[pair_key(row[a], row[b])];
    if (count.empty()) return 0.0;
    std::uint64_t latent = 0;
    for (const auto& [k, m] : count) {
        auto [u, v] = key_pair(k);
        if (!g.has_edge(u, v)) ++latent;
    }
    return double(latent) / double(count.size());
}

std::size_t McmcState::VecHash::operator()(const std::vector<std::uint32_t>& v) const {
    std::uint64_t h = 0x811c9dc5u ^ (std::uint64_t(v.size()) << 32);
    for (std::uint32_t x : v) h = mix64(h ^ x);
    return std::size_t(h);
}

McmcState::McmcState(const Graph& g, const McmcConfig& cfg, const Hyperparams& hp, std::nullptr_t)
    : g_(&g), cfg_(cfg), hp_(hp), shared_pi_(clamp_prob(cfg.pi_init)) {
    hp_.validate();
    if (cfg_.mode == ObservationMode::partial && cfg_.moves.split_merge == 1.0 &&
        cfg_.moves.gibbs == 0.0 && cfg_.moves.empty_clique == 0.0 && cfg_.moves.pi == 0.0 &&
        cfg_.moves.hyper == 0.0)
        cfg_.moves = McmcConfig::defaults(cfg_.mode).moves;
    cfg_.moves.validate();
    rng_.seed(cfg_.seed);
    vertex_rows_.resize(g.vertex_count());
    uncovered_edges_ = g.edge_count();  // rows added later pay this down
    // All vertices start in the empty pattern class; covers move them out.
    if (g.vertex_count() > 0) {
        pattern_mult_[{}] = g.vertex_count();
        pattern_log_mult_fact_ = std::lgamma(double(g.vertex_count()) + 1.0);
    }
}

McmcState::McmcState(const Graph& g, const McmcConfig& cfg, const Hyperparams& hp)
    : McmcState(g, cfg, hp, nullptr) {
    seed_from_cover(init_cover(g, cfg_.init), nullptr);
}

void McmcState::seed_from_cover(const CliqueMatrix& z, const std::vector<double>* pis) {
    if (z.vertex_count() != g_->vertex_count())
        throw std::invalid_argument("McmcState: cover/graph vertex count mismatch");
    if (pis && pis->size() != z.n_cliques())
        throw std::invalid_argument("McmcState: one pi per clique required");
    for (std::uint32_t r = 0; r < z.n_cliques(); ++r)
        add_row(z.row(r), pis ? clamp_prob((*pis)[r]) : shared_pi_);
    // Every vertex must sit in at least one clique or the joint is undefined.
    for (Vertex v = 0; v < g_->vertex_count(); ++v)
        if (vertex_rows_[v].empty())
            throw std::invalid_argument("McmcState: vertex " + std::to_string(v) +
                                        " is uncovered in the initial cover");
    refresh_caches();
}

std::uint32_t McmcState::add_row(const Clique& verts, double pi) {
    std::uint32_t slot;
    if (!free_slots_.empty()) {
        slot = free_slots_.back();
        free_slots_.pop_back();
    } else {
        slot = std::uint32_t(rows_.size());
        rows_.emplace_back();
    }
    Row& row = rows_[slot];
    row.verts = verts;
    row.pi = pi;
    row.alive = true;
    ++n_alive_;
    if (verts.empty()) ++n_empty_;
    ++row_mult_[verts];

    const bool per_pi = cfg_.per_clique_pi;
    const double lq = std::log1p(-pi);
    for (Vertex v : verts) {
        auto& vr = vertex_rows_[v];
        pattern_detach(v);
        std::uint32_t m = std::uint32_t(vr.size());
        vr.insert(std::lower_bound(vr.begin(), vr.end(), slot), slot);
        pattern_attach(v);
        if (m > 0 && --m_hist_[m] == 0) m_hist_.erase(m);
        ++m_hist_[m + 1];
    }
    for (std::size_t a = 0; a < verts.size(); ++a)
        for (std::size_t b = a + 1; b < verts.size(); ++b) {
            std::uint64_t key = pair_key(verts[a], verts[b]);
            std::uint32_t& count = pair_count_[key];
            const bool is_edge = g_->has_edge(verts[a], verts[b]);
            auto& hist = is_edge ? edge_cov_hist_ : nonedge_cov_hist_;
            double old_lq = 0.0;
            if (count > 0) {
                if (--hist[count] == 0) hist.erase(count);
                if (per_pi) old_lq = pair_logq_[key];
            } else if (is_edge) {
                --uncovered_edges_;
            }
            if (per_pi) {
                double new_lq = old_lq + lq;
                pair_logq_[key] = new_lq;
                if (count > 0) ll_cov_sum_ -= pair_loglik_term(is_edge, count, old_lq, shared_pi_);
                ll_cov_sum_ += pair_loglik_term(is_edge, count + 1, new_lq, shared_pi_);
            }
            ++hist[count + 1];
            if (!is_edge) ++nonedge_cov_weighted_;
            ++count;
        }
    return slot;
}

void McmcState::remove_row(std::uint32_t slot) {
    Row& row = rows_[slot];
    if (!row.alive) throw std::logic_error("remove_row: slot not alive");
    const Clique verts = std::move(row.verts);
    const double lq = std::log1p(-row.pi);
    row.verts.clear();
    row.alive = false;
    --n_alive_;
    if (verts.empty()) --n_empty_;
    auto rit = row_mult_.find(verts);
    if (--rit->second == 0) row_mult_.erase(rit);
    free_slots_.push_back(slot);

    const bool per_pi = cfg_.per_clique_pi;
    for (Vertex v : verts) {
        auto& vr = vertex_rows_[v];
        pattern_detach(v);
        vr.erase(std::lower_bound(vr.begin(), vr.end(), slot));
        pattern_attach(v);
        std::uint32_t m = std::uint32_t(vr.size());
        if (--m_hist_[m + 1] == 0) m_hist_.erase(m + 1);
        if (m > 0) ++m_hist_[m];
    }
    for (std::size_t a = 0; a < verts.size(); ++a)
        for (std::size_t b = a + 1; b < verts.size(); ++b) {
            std::uint64_t key = pair_key(verts[a], verts[b]);
            auto pit = pair_count_.find(key);
            std::uint32_t count = pit->second;
            const bool is_edge = g_->has_edge(verts[a], verts[b]);
            auto& hist = is_edge ? edge_cov_hist_ : nonedge_cov_hist_;
            if (--hist[count] == 0) hist.erase(count);
            if (!is_edge) --nonedge_cov_weighted_;
            if (per_pi) {
                auto qit = pair_logq_.find(key);
                double old_lq = qit->second;
                double new_lq = old_lq - lq;
                ll_cov_sum_ -= pair_loglik_term(is_edge, count, old_lq, shared_pi_);
                if (count > 1) {
                    qit->second = new_lq;
                    ll_cov_sum_ += pair_loglik_term(is_edge, count - 1, new_lq, shared_pi_);
                } else {
                    pair_logq_.erase(qit);
                }
            }
            if (count > 1) {
                ++hist[count - 1];
                pit->second = count - 1;
            } else {
                pair_count_.erase(pit);
                if (is_edge) ++uncovered_edges_;
            }
        }
}

void McmcState::set_entry(std::uint32_t slot, Vertex v, bool present) {
    Row& row = rows_[slot];
    auto pos = std::lower_bound(row.verts.begin(), row.verts.end(), v);
    const bool now = pos != row.verts.end() && *pos == v;
    if (now == present) return;

    auto old_mult = row_mult_.find(row.verts);
    if (--old_mult->second == 0) row_mult_.erase(old_mult);

    const bool per_pi = cfg_.per_clique_pi;
    const double lq = std::log1p(-row.pi);
    // Pair updates against the other members (v excluded either way).
    for (Vertex u : row.verts) {
        if (u == v) continue;
        std::uint64_t key = pair_key(u, v);
        const bool is_edge = g_->has_edge(u, v);
        auto& hist = is_edge ? edge_cov_hist_ : nonedge_cov_hist_;
        if (present) {
            std::uint32_t& count = pair_count_[key];
            double old_lq = 0.0;
            if (count > 0) {
                if (--hist[count] == 0) hist.erase(count);
                if (per_pi) old_lq = pair_logq_[key];
            } else if (is_edge) {
                --uncovered_edges_;
            }
            if (per_pi) {
                double new_lq = old_lq + lq;
                pair_logq_[key] = new_lq;
                if (count > 0) ll_cov_sum_ -= pair_loglik_term(is_edge, count, old_lq, shared_pi_);
                ll_cov_sum_ += pair_loglik_term(is_edge, count + 1, new_lq, shared_pi_);
            }
            ++hist[count + 1];
            if (!is_edge) ++nonedge_cov_weighted_;
            ++count;
        } else {
            auto pit = pair_count_.find(key);
            std::uint32_t count = pit->second;
            if (--hist[count] == 0) hist.erase(count);
            if (!is_edge) --nonedge_cov_weighted_;
            if (per_pi) {
                auto qit = pair_logq_.find(key);
                double old_lq = qit->second;
                ll_cov_sum_ -= pair_loglik_term(is_edge, count, old_lq, shared_pi_);
                if (count > 1) {
                    qit->second = old_lq - lq;
                    ll_cov_sum_ += pair_loglik_term(is_edge, count - 1, qit->second, shared_pi_);
                } else {
                    pair_logq_.erase(qit);
                }
            }
            if (count > 1) {
                ++hist[count - 1];
                pit->second = count - 1;
            } else {
                pair_count_.erase(pit);
                if (is_edge) ++uncovered_edges_;
            }
        }
    }

    auto& vr = vertex_rows_[v];
    pattern_detach(v);
    if (present) {
        std::uint32_t m = std::uint32_t(vr.size());
        vr.insert(std::lower_bound(vr.begin(), vr.end(), slot), slot);
        if (m > 0 && --m_hist_[m] == 0) m_hist_.erase(m);
        ++m_hist_[m + 1];
        if (row.verts.empty()) --n_empty_;
        row.verts.insert(pos, v);
    } else {
        vr.erase(std::lower_bound(vr.begin(), vr.end(), slot));
        std::uint32_t m = std::uint32_t(vr.size());
        if (--m_hist_[m + 1] == 0) m_hist_.erase(m + 1);
        if (m > 0) ++m_hist_[m];
        row.verts.erase(pos);
        if (row.verts.empty()) ++n_empty_;
    }
    pattern_attach(v);
    ++row_mult_[row.verts];
}

// Duplicate-column bookkeeping. Every vertex always belongs to exactly one
// pattern class (the empty pattern included, for vertices transiently
// uncovered mid-move); detach before editing vertex_rows_[v], attach after.
void McmcState::pattern_detach(Vertex v) {
    auto it = pattern_mult_.find(vertex_rows_[v]);
    std::uint32_t mult = it->second;
    pattern_log_mult_fact_ -= std::lgamma(double(mult) + 1.0);
    if (mult > 1) {
        it->second = mult - 1;
        pattern_log_mult_fact_ += std::lgamma(double(mult));
    } else {
        pattern_mult_.erase(it);
    }
}

void McmcState::pattern_attach(Vertex v) {
    std::uint32_t mult = ++pattern_mult_[vertex_rows_[v]];
    pattern_log_mult_fact_ += std::lgamma(double(mult) + 1.0) - std::lgamma(double(mult));
}

double McmcState::rate_prefix_sum(std::uint32_t n) const {
    if (rate_prefix_.size() <= n) rate_prefix_ = new_vertex_rate_prefix(n + 64, hp_);
    return rate_prefix_[n];
}

double McmcState::compute_log_joint_for(const Hyperparams& hp, std::uint32_t n_rows,
                                        double rate_sum) const {
    const double n = double(n_rows);
    const double cs = hp.c + hp.sigma;
    const double per_vertex = std::log(hp.alpha) + std::lgamma(1.0 + hp.c) - std::lgamma(cs) -
                              std::lgamma(1.0 - hp.sigma) - std::lgamma(n + hp.c);
    double lj = -rate_sum - pattern_log_mult_fact_;
    for (const auto& [m, k] : m_hist_)
        lj += double(k) * (per_vertex + std::lgamma(double(m) - hp.sigma) +
                           std::lgamma(n - double(m) + cs));
    lj += n * std::log(hp.tau) - hp.tau - std::lgamma(n + 1.0);
    return lj;
}

double McmcState::compute_log_joint(std::uint32_t n_rows) const {
    return compute_log_joint_for(hp_, n_rows, rate_prefix_sum(n_rows));
}

double McmcState::pair_loglik_term(bool is_edge, std::uint32_t count, double sum_log1mpi,
                                   double shared_pi) const {
    double lq = cfg_.per_clique_pi ? sum_log1mpi : double(count) * std::log1p(-shared_pi);
    if (is_edge) return std::log1p(-std::exp(lq));
    return lq;
}

double McmcState::compute_log_lik_shared(double pi) const {
    if (uncovered_edges_ > 0) return kNegInf;
    const double lq1 = std::log1p(-pi);
    double ll = double(nonedge_cov_weighted_) * lq1;
    for (const auto& [m, k] : edge_cov_hist_)
        ll += double(k) * std::log1p(-std::exp(double(m) * lq1));
    return ll;
}

double McmcState::compute_log_lik() const {
    if (cfg_.mode == ObservationMode::full)
        return uncovered_edges_ == 0 && nonedge_cov_hist_.empty() ? 0.0 : kNegInf;
    if (!cfg_.per_clique_pi) return compute_log_lik_shared(shared_pi_);
    return uncovered_edges_ > 0 ? kNegInf : ll_cov_sum_;
}

void McmcState::refresh_caches() {
    lj_ = compute_log_joint(n_alive_);
    ll_ = compute_log_lik();
}

void McmcState::set_hyperparams(const Hyperparams& hp) {
    hp.validate();
    hp_ = hp;
    rate_prefix_.clear();
    lj_ = compute_log_joint(n_alive_);
}

CliqueMatrix McmcState::cover() const {
    std::vector<Clique> out;
    out.reserve(n_alive_);
    for (const auto& row : rows_)
        if (row.alive) out.push_back(row.verts);
    return CliqueMatrix(g_->vertex_count(), std::move(out));
}

std::vector<double> McmcState::per_clique_pis() const {
    std::vector<double> out;
    out.reserve(n_alive_);
    for (const auto& row : rows_)
        if (row.alive) out.push_back(cfg_.per_clique_pi ? row.pi : shared_pi_);
    return out;
}

bool McmcState::cover_matches_graph() const {
    if (uncovered_edges_ > 0) return false;
    if (cfg_.mode == ObservationMode::full && !nonedge_cov_hist_.empty()) return false;
    return true;
}

std::uint32_t McmcState::find_empty_slot() const {
    for (std::uint32_t s = 0; s < rows_.size(); ++s)
        if (rows_[s].alive && rows_[s].verts.empty()) return s;
    throw std::logic_error("find_empty_slot: no empty clique present");
}

// Recomputes every derived structure from rows_ and free_slots_ as restored
// by a checkpoint. Mirrors the recomputation debug_check() performs, but
// assigns instead of comparing.
void McmcState::rebuild_from_rows() {
    std::vector<bool> is_free(rows_.size(), false);
    for (std::uint32_t slot : free_slots_) {
        if (slot >= rows_.size() || rows_[slot].alive || is_free[slot])
            throw std::invalid_argument("rebuild_from_rows: bad free slot list");
        is_free[slot] = true;
    }
    n_alive_ = n_empty_ = 0;
    uncovered_edges_ = g_->edge_count();
    nonedge_cov_weighted_ = 0;
    ll_cov_sum_ = 0.0;
    pattern_log_mult_fact_ = 0.0;
    vertex_rows_.assign(g_->vertex_count(), {});
    pair_count_.clear();
    pair_logq_.clear();
    m_hist_.clear();
    edge_cov_hist_.clear();
    nonedge_cov_hist_.clear();
    row_mult_.clear();
    pattern_mult_.clear();

    for (std::uint32_t slot = 0; slot < rows_.size(); ++slot) {
        const Row& row = rows_[slot];
        if (!row.alive) {
            if (!is_free[slot])
                throw std::invalid_argument("rebuild_from_rows: dead slot missing from free list");
            continue;
        }
        ++n_alive_;
        if (row.verts.empty()) ++n_empty_;
        ++row_mult_[row.verts];
        if (!std::is_sorted(row.verts.begin(), row.verts.end()))
            throw std::invalid_argument("rebuild_from_rows: clique not sorted");
        const double lq = std::log1p(-row.pi);
        for (Vertex v : row.verts) {
            if (v >= g_->vertex_count())
                throw std::out_of_range("rebuild_from_rows: vertex outside the graph");
            vertex_rows_[v].push_back(slot);
        }
        for (std::size_t a = 0; a < row.verts.size(); ++a)
            for (std::size_t b = a + 1; b < row.verts.size(); ++b) {
                const std::uint64_t key = pair_key(row.verts[a], row.verts[b]);
                ++pair_count_[key];
                if (cfg_.per_clique_pi) pair_logq_[key] += lq;
            }
    }

    for (Vertex v = 0; v < g_->vertex_count(); ++v) {
        const auto& vr = vertex_rows_[v];
        if (vr.empty())
            throw std::invalid_argument("rebuild_from_rows: vertex " + std::to_string(v) +
                                        " is uncovered");
        ++m_hist_[std::uint32_t(vr.size())];
        ++pattern_mult_[vr];
    }
    for (const auto& [pat, mult] : pattern_mult_)
        pattern_log_mult_fact_ += std::lgamma(double(mult) + 1.0);

    for (const auto& [key, count] : pair_count_) {
        auto [u, w] = key_pair(key);
        const bool is_edge = g_->has_edge(u, w);
        if (is_edge) {
            ++edge_cov_hist_[count];
            --uncovered_edges_;
        } else {
            ++nonedge_cov_hist_[count];
            nonedge_cov_weighted_ += count;
        }
        if (cfg_.per_clique_pi)
            ll_cov_sum_ += pair_loglik_term(is_edge, count, pair_logq_[key], shared_pi_);
    }
    refresh_caches();
}

void McmcState::debug_check(double tol) const {
    auto fail = [](const std::string& what) {
        throw std::logic_error("McmcState::debug_check: " + what);
    };
    auto close = [tol](double a, double b) {
        if (std::isinf(a) || std::isinf(b)) return a == b;
        return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
    };

    std::uint32_t alive = 0, empt = 0;
    std::vector<std::vector<std::uint32_t>> vrows(g_->vertex_count());
    std::unordered_map<std::uint64_t, std::uint32_t> pcount;
    std::unordered_map<std::uint64_t, double> plogq;
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> rmult;
    for (std::uint32_t s = 0; s < rows_.size(); ++s) {
        const Row& row = rows_[s];
        if (!row.alive) continue;
        ++alive;
        if (row.verts.empty()) ++empt;
        ++rmult[row.verts];
        for (Vertex v : row.verts) vrows[v].push_back(s);
        for (std::size_t a = 0; a < row.verts.size(); ++a)
            for (std::size_t b = a + 1; b < row.verts.size(); ++b) {
                std::uint64_t key = pair_key(row.verts[a], row.verts[b]);
                ++pcount[key];
                plogq[key] += std::log1p(-row.pi);
            }
    }
    if (alive != n_alive_ || empt != n_empty_) fail("row counts drifted");
    if (rmult != row_mult_) fail("row multiset drifted");
    if (pcount != pair_count_) fail("pair coverage drifted");
    if (vrows != vertex_rows_) fail("vertex index drifted");
    for (Vertex v = 0; v < g_->vertex_count(); ++v)
        if (vrows[v].empty()) fail("vertex " + std::to_string(v) + " uncovered");

    std::map<std::uint32_t, std::uint64_t> mh, eh, neh;
    std::uint64_t new_weighted = 0, uncov = g_->edge_count();
    for (Vertex v = 0; v < g_->vertex_count(); ++v) ++mh[std::uint32_t(vrows[v].size())];
    for (const auto& [key, count] : pcount) {
        auto [u, w] = key_pair(key);
        if (g_->has_edge(u, w)) {
            ++eh[count];
            --uncov;
        } else {
            ++neh[count];
            new_weighted += count;
        }
    }
    if (mh != m_hist_) fail("membership histogram drifted");
    if (eh != edge_cov_hist_ || neh != nonedge_cov_hist_) fail("coverage histograms drifted");
    if (new_weighted != nonedge_cov_weighted_) fail("weighted non-edge coverage drifted");
    if (uncov != uncovered_edges_) fail("uncovered edge count drifted");

    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> pmult;
    double plogfact = 0.0;
    for (Vertex v = 0; v < g_->vertex_count(); ++v) ++pmult[vrows[v]];
    for (const auto& [p, m] : pmult) plogfact += std::lgamma(double(m) + 1.0);
    if (pmult != pattern_mult_) fail("column pattern multiset drifted");
    if (!close(plogfact, pattern_log_mult_fact_)) fail("pattern multiplicity term drifted");

    if (cfg_.per_clique_pi) {
        if (plogq.size() != pair_logq_.size()) fail("pair log-q support drifted");
        double fresh_sum = 0.0;
        for (const auto& [key, lq] : plogq) {
            auto it = pair_logq_.find(key);
            if (it == pair_logq_.end() || !close(lq, it->second)) fail("pair log-q drifted");
            auto [u, w] = key_pair(key);
            fresh_sum += pair_loglik_term(g_->has_edge(u, w), pcount.at(key), lq, shared_pi_);
        }
        if (uncovered_edges_ == 0 && !close(fresh_sum, ll_cov_sum_))
            fail("per-clique likelihood sum drifted");
    }

    if (!close(lj_, compute_log_joint(n_alive_))) fail("log joint cache drifted");
    if (!close(ll_, compute_log_lik())) fail("log likelihood cache drifted");
}

std::string McmcState::checkpoint_to_json() const {
    nlohmann::json j;
    j["iteration"] = iteration_;
    j["mode"] = cfg_.mode == ObservationMode::full ? "full" : "partial";
    j["hyperparams"] = {
        {"alpha", hp_.alpha}, {"sigma", hp_.sigma}, {"c", hp_.c}, {"tau", hp_.tau}};
    j["shared_pi"] = shared_pi_;
    if (cfg_.per_clique_pi) j["per_clique_pi"] = per_clique_pis();
    CliqueMatrix z = cover();
    j["cover"] = {{"vertices", z.vertex_count()}, {"cliques", z.rows()}};
    // Physical slot layout. Resuming from the cover alone would compact the
    // slots and subtly reorder later row insertions; a bit-exact continuation
    // needs the dead slots and the free stack too.
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& row : rows_) {
        slots.push_back({{"alive", row.alive}, {"verts", row.verts}, {"pi", row.pi}});
    }
    j["slots"] = std::move(slots);
    j["free_slots"] = free_slots_;
    std::ostringstream rng_text;
    rng_text << rng_;
    j["rng"] = rng_text.str();
    j["stats"] = {
        {"proposed", std::vector<std::uint64_t>(std::begin(stats_.proposed), std::end(stats_.proposed))},
        {"accepted", std::vector<std::uint64_t>(std::begin(stats_.accepted), std::end(stats_.accepted))}};
    return j.dump(2);
}

McmcState McmcState::from_checkpoint(const Graph& g, const McmcConfig& cfg,
                                     const std::string& checkpoint_json) {
    nlohmann::json j = nlohmann::json::parse(checkpoint_json);
    std::string mode = j.at("mode").get<std::string>();
    if ((mode == "full") != (cfg.mode == ObservationMode::full))
        throw std::invalid_argument("from_checkpoint: observation mode mismatch");
    const auto& h = j.at("hyperparams");
    Hyperparams hp(h.at("alpha").get<double>(), h.at("sigma").get<double>(),
                   h.at("c").get<double>(), h.at("tau").get<double>());

    McmcState s(g, cfg, hp, nullptr);
    s.shared_pi_ = j.at("shared_pi").get<double>();
    if (j.contains("slots")) {
        for (const auto& jr : j.at("slots")) {
            Row row;
            row.alive = jr.at("alive").get<bool>();
            row.verts = jr.at("verts").get<Clique>();
            row.pi = jr.at("pi").get<double>();
            s.rows_.push_back(std::move(row));
        }
        s.free_slots_ = j.at("free_slots").get<std::vector<std::uint32_t>>();
        s.rebuild_from_rows();
    } else {
        // Covers written by hand or by older tools: layout defaults to the
        // row order given.
        auto rows = j.at("cover").at("cliques").get<std::vector<Clique>>();
        CliqueMatrix z(j.at("cover").at("vertices").get<std::uint32_t>(), std::move(rows));
        std::vector<double> pis;
        if (cfg.per_clique_pi) {
            pis = j.at("per_clique_pi").get<std::vector<double>>();
            s.seed_from_cover(z, &pis);
        } else {
            s.seed_from_cover(z, nullptr);
        }
    }
    s.iteration_ = j.at("iteration").get<std::uint64_t>();
    std::istringstream rng_text(j.at("rng").get<std::string>());
    rng_text >> s.rng_;
    if (!rng_text) throw std::invalid_argument("from_checkpoint: bad rng state");
    auto prop = j.at("stats").at("proposed").get<std::vector<std::uint64_t>>();
    auto acc = j.at("stats").at("accepted").get<std::vector<std::uint64_t>>();
    if (prop.size() != 6 || acc.size() != 6)
        throw std::invalid_argument("from_checkpoint: bad stats shape");
    for (std::size_t k = 0; k < 6; ++k) {
        s.stats_.proposed[k] = prop[k];
        s.stats_.accepted[k] = acc[k];
    }
    return s;
}

}  // namespace rcc
