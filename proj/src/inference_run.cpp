#include <iomanip>
#include <sstream>

#include "rcc/inference.hpp"

namespace rcc {

std::string trace_csv_header() {
    return "iteration,log_joint,log_lik,n_cliques,n_empty,n_vertices,pi,"
           "accept_split,accept_merge,accept_empty,accept_pi,accept_hyper";
}

std::string trace_csv_row(const TraceRow& r) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << r.iteration << ',' << r.log_joint << ',' << r.log_lik << ',' << r.n_cliques << ','
        << r.n_empty << ',' << r.n_vertices << ',' << r.pi << ',' << r.accept_split << ','
        << r.accept_merge << ',' << r.accept_empty << ',' << r.accept_pi << ','
        << r.accept_hyper;
    return out.str();
}

TraceRow make_trace_row(const McmcState& s) {
    TraceRow r;
    r.iteration = s.iteration();
    r.log_joint = s.log_joint_cached();
    r.log_lik = s.log_lik_cached();
    r.n_cliques = s.n_rows();
    r.n_empty = s.n_empty_rows();
    r.n_vertices = s.graph().vertex_count();
    r.pi = s.shared_pi();
    const MoveStats& st = s.stats();
    r.accept_split = st.rate(MoveKind::split);
    r.accept_merge = st.rate(MoveKind::merge);
    r.accept_empty = st.rate(MoveKind::empty_clique);
    r.accept_pi = st.rate(MoveKind::pi);
    r.accept_hyper = st.rate(MoveKind::hyper);
    return r;
}

McmcResult run_mcmc(McmcState& state, const McmcConfig& cfg,
                    const std::function<void(const TraceRow&)>& observer,
                    std::uint64_t trace_every) {
    if (trace_every == 0) trace_every = 1;
    McmcResult res;
    while (state.iteration() < cfg.iterations) {
        state.step();
        std::uint64_t it = state.iteration();
        if (observer && (it % trace_every == 0 || it == cfg.iterations))
            observer(make_trace_row(state));
        if (it > cfg.burn_in && cfg.thinning != 0 && (it - cfg.burn_in) % cfg.thinning == 0) {
            McmcSample sample;
            sample.iteration = it;
            sample.cover = state.cover();
            sample.pi = state.shared_pi();
            if (cfg.per_clique_pi) sample.per_clique_pi = state.per_clique_pis();
            sample.hp = state.hyperparams();
            sample.log_joint = state.log_joint_cached();
            sample.log_lik = state.log_lik_cached();
            res.samples.push_back(std::move(sample));
        }
    }
    res.stats = state.stats();
    res.final_log_joint = state.log_joint_cached();
    res.final_log_lik = state.log_lik_cached();
    return res;
}

McmcResult run_mcmc(const Graph& g, const McmcConfig& cfg, const Hyperparams& hp,
                    const std::function<void(const TraceRow&)>& observer,
                    std::uint64_t trace_every) {
    McmcState state(g, cfg, hp);
    return run_mcmc(state, cfg, observer, trace_every);
}

}  // namespace rcc
