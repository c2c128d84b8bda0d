#include <algorithm>
#include <cmath>
#include <limits>

#include "rcc/inference.hpp"
#include "rcc/sbibp.hpp"

namespace rcc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

double clamp_prob(double p) { return std::min(std::max(p, 1e-12), 1.0 - 1e-12); }
double logit(double p) { return std::log(p) - std::log1p(-p); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

std::uint32_t McmcState::count_rows_equal(const Clique& verts) const {
    auto it = row_mult_.find(verts);
    return it == row_mult_.end() ? 0 : it->second;
}

// Walks the parent's members in ascending vertex order assigning each to the
// first child (1), second child (2) or both (3). Anchors i and j are pinned
// to their own child. With `filter`, an option is dropped when it would
// separate the member from an earlier one whose shared edge has no cover
// outside this row; "both" always survives, so the walk cannot dead-end.
// In sample mode the assignment is drawn uniformly among survivors per
// member and written to c1/c2; otherwise c1/c2 are scored as given. Returns
// the log probability of the assignment under this walk.
double McmcState::split_assignment_log_prob(const Clique& parent, Vertex i, Vertex j, bool filter,
                                            bool sample, Clique& c1, Clique& c2, bool& feasible) {
    feasible = true;
    if (sample) {
        c1.clear();
        c2.clear();
    }
    std::vector<std::uint8_t> assigned(parent.size(), 0);
    double log_q = 0.0;
    for (std::size_t idx = 0; idx < parent.size(); ++idx) {
        Vertex k = parent[idx];
        std::uint8_t base[3];
        int n_base = 0;
        if (k == i) {
            base[n_base++] = 1;
            base[n_base++] = 3;
        } else if (k == j) {
            base[n_base++] = 2;
            base[n_base++] = 3;
        } else {
            base[n_base++] = 1;
            base[n_base++] = 2;
            base[n_base++] = 3;
        }
        std::uint8_t allowed[3];
        int n_allowed = 0;
        for (int t = 0; t < n_base; ++t) {
            std::uint8_t o = base[t];
            bool ok = true;
            if (filter && o != 3) {
                for (std::size_t p = 0; p < idx && ok; ++p) {
                    if (o & assigned[p]) continue;
                    auto it = pair_count_.find(pair_key(k, parent[p]));
                    if (it != pair_count_.end() && it->second == 1 &&
                        g_->has_edge(k, parent[p]))
                        ok = false;
                }
            }
            if (ok) allowed[n_allowed++] = o;
        }
        std::uint8_t pick;
        if (sample) {
            pick = allowed[std::uniform_int_distribution<int>(0, n_allowed - 1)(rng_)];
            if (pick & 1) c1.push_back(k);
            if (pick & 2) c2.push_back(k);
        } else {
            bool in1 = std::binary_search(c1.begin(), c1.end(), k);
            bool in2 = std::binary_search(c2.begin(), c2.end(), k);
            pick = std::uint8_t((in1 ? 1 : 0) | (in2 ? 2 : 0));
            bool found = false;
            for (int t = 0; t < n_allowed; ++t) found = found || allowed[t] == pick;
            if (pick == 0 || !found) {
                feasible = false;
                return kNegInf;
            }
        }
        assigned[idx] = pick;
        log_q -= std::log(double(n_allowed));
    }
    return log_q;
}

bool McmcState::try_split(Vertex i, Vertex j, std::uint32_t slot) {
    const Clique parent = rows_[slot].verts;
    const double parent_pi = rows_[slot].pi;
    const bool filter = cfg_.mode == ObservationMode::full;
    // Per-clique success probabilities make every row distinct, so the
    // content-multiplicity factors in the proposal ratio collapse to one.
    const bool marked = cfg_.per_clique_pi;

    Clique c1, c2;
    bool feasible = true;
    double log_q_assign = split_assignment_log_prob(parent, i, j, filter, true, c1, c2, feasible);
    double log_q_fwd = (marked ? 0.0 : std::log(double(count_rows_equal(parent)))) -
                       std::log(double(vertex_rows_[i].size())) -
                       std::log(double(vertex_rows_[j].size())) + log_q_assign;

    // The second child gets a fresh uniform success probability; its U(0,1)
    // proposal density cancels against the prior, so no ratio term appears.
    double pi2 = parent_pi;
    if (cfg_.per_clique_pi)
        pi2 = clamp_prob(std::uniform_real_distribution<double>(0.0, 1.0)(rng_));

    const double lj0 = lj_, ll0 = ll_;
    remove_row(slot);
    std::uint32_t s1 = add_row(c1, parent_pi);
    std::uint32_t s2 = add_row(c2, pi2);
    double lj1 = compute_log_joint(n_alive_);
    double ll1 = compute_log_lik();

    double mult_c2 = marked ? 1.0 : double(count_rows_equal(c2)) - (c1 == c2 ? 1.0 : 0.0);
    double log_q_rev = (marked ? 0.0 : std::log(double(count_rows_equal(c1)))) +
                       std::log(mult_c2) - std::log(double(vertex_rows_[i].size())) -
                       std::log(double(vertex_rows_[j].size()));

    double log_acc = (lj1 + ll1) - (lj0 + ll0) + log_q_rev - log_q_fwd;
    if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng_)) < log_acc) {
        lj_ = lj1;
        ll_ = ll1;
        return true;
    }
    remove_row(s2);
    remove_row(s1);
    add_row(parent, parent_pi);
    lj_ = lj0;
    ll_ = ll0;
    return false;
}

bool McmcState::try_merge(Vertex i, Vertex j, std::uint32_t slot_a, std::uint32_t slot_b) {
    const Clique a = rows_[slot_a].verts;
    const Clique b = rows_[slot_b].verts;
    const double pi_a = rows_[slot_a].pi, pi_b = rows_[slot_b].pi;
    const bool filter = cfg_.mode == ObservationMode::full;
    const bool marked = cfg_.per_clique_pi;

    if (filter) {
        // The union covers (a \ b) x (b \ a); bail out early if any such pair
        // is not an observed edge, since the exact likelihood would vanish.
        for (Vertex x : a) {
            if (std::binary_search(b.begin(), b.end(), x)) continue;
            for (Vertex y : b) {
                if (std::binary_search(a.begin(), a.end(), y)) continue;
                if (!g_->has_edge(x, y)) return false;
            }
        }
    }

    Clique u;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));

    double mult_b = marked ? 1.0 : double(count_rows_equal(b)) - (a == b ? 1.0 : 0.0);
    double log_q_fwd = (marked ? 0.0 : std::log(double(count_rows_equal(a)))) +
                       std::log(mult_b) - std::log(double(vertex_rows_[i].size())) -
                       std::log(double(vertex_rows_[j].size()));

    const double lj0 = lj_, ll0 = ll_;
    remove_row(slot_a);
    remove_row(slot_b);
    std::uint32_t su = add_row(u, pi_a);
    double lj1 = compute_log_joint(n_alive_);
    double ll1 = compute_log_lik();

    // Reverse move: split the union back into exactly (a, b) with the same
    // oriented edge, scored in the merged state.
    Clique ca = a, cb = b;
    bool feasible = true;
    double log_q_assign = split_assignment_log_prob(u, i, j, filter, false, ca, cb, feasible);
    double log_acc = kNegInf;
    if (feasible) {
        double log_q_rev = (marked ? 0.0 : std::log(double(count_rows_equal(u)))) -
                           std::log(double(vertex_rows_[i].size())) -
                           std::log(double(vertex_rows_[j].size())) + log_q_assign;
        log_acc = (lj1 + ll1) - (lj0 + ll0) + log_q_rev - log_q_fwd;
    }
    if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng_)) < log_acc) {
        lj_ = lj1;
        ll_ = ll1;
        return true;
    }
    remove_row(su);
    add_row(a, pi_a);
    add_row(b, pi_b);
    lj_ = lj0;
    ll_ = ll0;
    return false;
}

bool McmcState::move_split_merge() {
    if (g_->edge_count() == 0) {
        ++stats_.proposed[std::size_t(MoveKind::split)];
        return false;
    }
    std::uniform_int_distribution<std::size_t> pick_edge(0, g_->edge_count() - 1);
    auto [u, v] = g_->edges()[pick_edge(rng_)];
    Vertex i = u, j = v;
    if (std::uniform_int_distribution<int>(0, 1)(rng_)) std::swap(i, j);

    const auto& ri = vertex_rows_[i];
    const auto& rj = vertex_rows_[j];
    std::uint32_t slot_a = ri[std::uniform_int_distribution<std::size_t>(0, ri.size() - 1)(rng_)];
    std::uint32_t slot_b = rj[std::uniform_int_distribution<std::size_t>(0, rj.size() - 1)(rng_)];

    MoveKind kind = slot_a == slot_b ? MoveKind::split : MoveKind::merge;
    ++stats_.proposed[std::size_t(kind)];
    bool accepted = kind == MoveKind::split ? try_split(i, j, slot_a)
                                            : try_merge(i, j, slot_a, slot_b);
    if (accepted) ++stats_.accepted[std::size_t(kind)];
    return accepted;
}

// Log odds of z[slot][v] = 1 against 0 with everything else fixed. Combines
// the urn ratio, the duplicate-column correction, a duplicate-row proposal
// count and the likelihood terms of the pairs inside this row. +inf when
// removal would leave v uncovered.
double McmcState::inclusion_log_odds(std::uint32_t slot, Vertex v) const {
    const Row& row = rows_[slot];
    const bool present = std::binary_search(row.verts.begin(), row.verts.end(), v);
    const auto& vr = vertex_rows_[v];
    const std::uint32_t m_wo = std::uint32_t(vr.size()) - (present ? 1 : 0);
    if (m_wo == 0) return kPosInf;

    const double n = double(n_alive_);
    double odds = std::log(double(m_wo) - hp_.sigma) -
                  std::log(n - 1.0 - double(m_wo) + hp_.c + hp_.sigma);

    {
        // Duplicate-column counts with v itself excluded from its class.
        std::vector<std::uint32_t> without, with;
        if (present) {
            with = vr;
            without = vr;
            without.erase(std::lower_bound(without.begin(), without.end(), slot));
        } else {
            without = vr;
            with = vr;
            with.insert(std::lower_bound(with.begin(), with.end(), slot), slot);
        }
        auto excl_count = [&](const std::vector<std::uint32_t>& pat, bool is_current) {
            auto it = pattern_mult_.find(pat);
            std::uint32_t m = it == pattern_mult_.end() ? 0 : it->second;
            return double(m) - (is_current ? 1.0 : 0.0);
        };
        odds += std::log(excl_count(without, !present) + 1.0) -
                std::log(excl_count(with, present) + 1.0);
    }

    if (!cfg_.per_clique_pi) {
        // The target weighs each distinct cover once, but a flip in any of
        // several identical rows lands on the same cover, so the proposal
        // count carries the content multiplicity of each side. The sign is
        // opposite to the column term above: this is proposal counting, not
        // part of the density. Rows with their own pi are all distinct and
        // need no such factor.
        Clique with_c = row.verts, without_c = row.verts;
        if (present)
            without_c.erase(std::lower_bound(without_c.begin(), without_c.end(), v));
        else
            with_c.insert(std::lower_bound(with_c.begin(), with_c.end(), v), v);
        const double others_with = double(count_rows_equal(with_c)) - (present ? 1.0 : 0.0);
        const double others_without = double(count_rows_equal(without_c)) - (present ? 0.0 : 1.0);
        odds += std::log(others_with + 1.0) - std::log(others_without + 1.0);
    }

    // Likelihood legs accumulated separately so an impossible state on either
    // side resolves to a +-inf odds without generating NaNs.
    double ll_in = 0.0, ll_out = 0.0;
    const double lq_row = std::log1p(-row.pi);
    const bool per_pi = cfg_.per_clique_pi;
    const bool full = cfg_.mode == ObservationMode::full;
    for (Vertex u : row.verts) {
        if (u == v) continue;
        std::uint64_t key = pair_key(u, v);
        auto pit = pair_count_.find(key);
        std::uint32_t count_wo = (pit == pair_count_.end() ? 0 : pit->second) - (present ? 1 : 0);
        const bool is_edge = g_->has_edge(u, v);
        if (full) {
            if (is_edge) {
                if (count_wo == 0) ll_out = kNegInf;
            } else {
                ll_in = kNegInf;
            }
            continue;
        }
        double lq_wo;
        if (per_pi) {
            auto qit = pair_logq_.find(key);
            lq_wo = (qit == pair_logq_.end() ? 0.0 : qit->second) - (present ? lq_row : 0.0);
        } else {
            lq_wo = double(count_wo) * std::log1p(-shared_pi_);
        }
        double lq_with = lq_wo + (per_pi ? lq_row : std::log1p(-shared_pi_));
        if (is_edge) {
            ll_in += std::log1p(-std::exp(lq_with));
            ll_out += count_wo == 0 ? kNegInf : std::log1p(-std::exp(lq_wo));
        } else {
            ll_in += lq_with;
            ll_out += lq_wo;
        }
    }
    if (std::isinf(ll_in) && std::isinf(ll_out))
        throw std::logic_error("inclusion_log_odds: both states impossible");
    return odds + ll_in - ll_out;
}

double McmcState::gibbs_inclusion_probability(std::uint32_t row, Vertex v) const {
    std::uint32_t seen = 0;
    for (std::uint32_t s = 0; s < rows_.size(); ++s) {
        if (!rows_[s].alive) continue;
        if (seen++ == row) {
            double odds = inclusion_log_odds(s, v);
            if (std::isinf(odds)) return odds > 0 ? 1.0 : 0.0;
            return sigmoid(odds);
        }
    }
    throw std::out_of_range("gibbs_inclusion_probability: row index out of range");
}

std::uint64_t McmcState::move_gibbs_sweep() {
    std::uint64_t changed = 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::uint32_t s = 0; s < rows_.size(); ++s) {
        if (!rows_[s].alive) continue;
        for (Vertex v = 0; v < g_->vertex_count(); ++v) {
            const bool present =
                std::binary_search(rows_[s].verts.begin(), rows_[s].verts.end(), v);
            if (present && vertex_rows_[v].size() == 1) continue;  // would empty the column
            ++stats_.proposed[std::size_t(MoveKind::gibbs)];
            double odds = inclusion_log_odds(s, v);
            bool z;
            if (std::isinf(odds))
                z = odds > 0;
            else
                z = unif(rng_) < sigmoid(odds);
            if (z != present) {
                set_entry(s, v, z);
                ++changed;
                ++stats_.accepted[std::size_t(MoveKind::gibbs)];
            }
        }
    }
    refresh_caches();
    return changed;
}

bool McmcState::move_resample_empty() {
    ++stats_.proposed[std::size_t(MoveKind::empty_clique)];
    const bool up = std::uniform_int_distribution<int>(0, 1)(rng_) == 1;
    if (!up && n_empty_ == 0) return false;  // +-1 walk rejects below zero

    std::uint32_t n1 = up ? n_alive_ + 1 : n_alive_ - 1;
    double lj1 = compute_log_joint(n1);
    double log_acc = lj1 - lj_;
    if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng_)) >= log_acc) return false;
    if (up) {
        double pi = shared_pi_;
        if (cfg_.per_clique_pi)
            pi = clamp_prob(std::uniform_real_distribution<double>(0.0, 1.0)(rng_));
        add_row({}, pi);
    } else {
        remove_row(find_empty_slot());
    }
    lj_ = lj1;
    ++stats_.accepted[std::size_t(MoveKind::empty_clique)];
    return true;
}

bool McmcState::move_resample_pi() {
    ++stats_.proposed[std::size_t(MoveKind::pi)];
    std::normal_distribution<double> step(0.0, cfg_.pi_step);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    if (!cfg_.per_clique_pi) {
        double pi1 = clamp_prob(sigmoid(logit(shared_pi_) + step(rng_)));
        double ll1 = cfg_.mode == ObservationMode::partial ? compute_log_lik_shared(pi1) : ll_;
        // Uniform prior; the logit-walk Jacobian is pi (1 - pi).
        double log_acc = (ll1 - ll_) + std::log(pi1 * (1.0 - pi1)) -
                         std::log(shared_pi_ * (1.0 - shared_pi_));
        if (std::log(unif(rng_)) >= log_acc) return false;
        shared_pi_ = pi1;
        ll_ = ll1;
        ++stats_.accepted[std::size_t(MoveKind::pi)];
        return true;
    }

    if (n_alive_ == 0) return false;
    std::uint32_t target = std::uniform_int_distribution<std::uint32_t>(0, n_alive_ - 1)(rng_);
    std::uint32_t slot = 0;
    for (std::uint32_t s = 0, seen = 0; s < rows_.size(); ++s)
        if (rows_[s].alive && seen++ == target) {
            slot = s;
            break;
        }
    Row& row = rows_[slot];
    double pi1 = clamp_prob(sigmoid(logit(row.pi) + step(rng_)));
    double shift = std::log1p(-pi1) - std::log1p(-row.pi);
    double delta_ll = 0.0;
    for (std::size_t x = 0; x < row.verts.size(); ++x)
        for (std::size_t y = x + 1; y < row.verts.size(); ++y) {
            std::uint64_t key = pair_key(row.verts[x], row.verts[y]);
            bool is_edge = g_->has_edge(row.verts[x], row.verts[y]);
            double lq = pair_logq_.at(key);
            delta_ll += pair_loglik_term(is_edge, 0, lq + shift, shared_pi_) -
                        pair_loglik_term(is_edge, 0, lq, shared_pi_);
        }
    double log_acc = delta_ll + std::log(pi1 * (1.0 - pi1)) - std::log(row.pi * (1.0 - row.pi));
    if (std::log(unif(rng_)) >= log_acc) return false;
    for (std::size_t x = 0; x < row.verts.size(); ++x)
        for (std::size_t y = x + 1; y < row.verts.size(); ++y) {
            std::uint64_t key = pair_key(row.verts[x], row.verts[y]);
            bool is_edge = g_->has_edge(row.verts[x], row.verts[y]);
            double& lq = pair_logq_.at(key);
            ll_cov_sum_ -= pair_loglik_term(is_edge, 0, lq, shared_pi_);
            lq += shift;
            ll_cov_sum_ += pair_loglik_term(is_edge, 0, lq, shared_pi_);
        }
    row.pi = pi1;
    ll_ = compute_log_lik();
    ++stats_.accepted[std::size_t(MoveKind::pi)];
    return true;
}

bool McmcState::move_resample_hyperparams() {
    ++stats_.proposed[std::size_t(MoveKind::hyper)];
    std::normal_distribution<double> step(0.0, cfg_.hyper_step);
    auto x = hp_to_unconstrained(hp_);
    for (double& xi : x) {
        xi += step(rng_);
        // The prior mass beyond exp(+-200) is zero to double precision, so
        // rejecting outright keeps the move well defined without overflow.
        if (std::abs(xi) > 200.0) return false;
    }
    Hyperparams hp1 = hp_from_unconstrained(x);
    double rate_sum1 = new_vertex_rate_prefix(n_alive_, hp1)[n_alive_];
    double lj1 = compute_log_joint_for(hp1, n_alive_, rate_sum1);
    double log_acc = (lj1 + hyper_log_prior_unconstrained(hp1)) -
                     (lj_ + hyper_log_prior_unconstrained(hp_));
    if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng_)) >= log_acc) return false;
    hp_ = hp1;
    rate_prefix_.clear();
    lj_ = lj1;
    ++stats_.accepted[std::size_t(MoveKind::hyper)];
    return true;
}

void McmcState::step() {
    const MoveMix& w = cfg_.moves;
    const double total = w.split_merge + w.gibbs + w.empty_clique + w.pi + w.hyper;
    double u = std::uniform_real_distribution<double>(0.0, total)(rng_);
    if ((u -= w.split_merge) < 0.0)
        move_split_merge();
    else if ((u -= w.gibbs) < 0.0)
        move_gibbs_sweep();
    else if ((u -= w.empty_clique) < 0.0)
        move_resample_empty();
    else if ((u -= w.pi) < 0.0)
        move_resample_pi();
    else
        move_resample_hyperparams();
    ++iteration_;
    if (cfg_.check_every != 0 && iteration_ % cfg_.check_every == 0) debug_check();
}

}  // namespace rcc
