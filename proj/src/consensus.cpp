#include "dmvf/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dmvf/errors.hpp"

namespace dmvf {

ConsensusMatrix build_consensus_matrix(const CommGraph& graph) {
    const int n = graph.n;
    const double dmax1 = static_cast<double>(graph.max_degree()) + 1.0;
    ConsensusMatrix m;
    m.n = n;
    m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j : graph.adj[i]) m.values[static_cast<std::size_t>(i) * n + j] = 1.0 / dmax1;
        m.values[static_cast<std::size_t>(i) * n + i] =
            (dmax1 - static_cast<double>(graph.degree(i))) / dmax1;
    }
    return m;
}

namespace {

void check_coverage(const std::vector<ScoreEntry>& received, const std::vector<int>& neighborhood,
                    const char* who) {
    std::set<int> seen;
    for (const auto& e : received) {
        if (e.degree < 0) throw ConfigError(std::string(who) + ": negative degree from agent " +
                                            std::to_string(e.from));
        if (!seen.insert(e.from).second)
            throw Error(std::string(who) + ": duplicate entry from agent " +
                        std::to_string(e.from));
    }
    for (int m : neighborhood)
        if (!seen.count(m))
            throw Error(std::string(who) + ": missing entry from agent " + std::to_string(m));
    for (int s : seen)
        if (!std::binary_search(neighborhood.begin(), neighborhood.end(), s))
            throw Error(std::string(who) + ": entry from non-member agent " + std::to_string(s));
}

}  // namespace

double weighted_update(const std::vector<ScoreEntry>& received,
                       const std::vector<int>& neighborhood) {
    check_coverage(received, neighborhood, "weighted_update");
    double num = 0.0, den = 0.0;
    for (const auto& e : received) {
        // An isolated sender has degree 0; its own neighborhood is just
        // itself, weight 1.
        const double w = 1.0 / static_cast<double>(std::max(e.degree, 1));
        num += w * e.value;
        den += w;
    }
    return num / den;
}

double ave_update(const std::vector<ScoreEntry>& received, const std::vector<int>& neighborhood) {
    check_coverage(received, neighborhood, "ave_update");
    double sum = 0.0;
    for (const auto& e : received) sum += e.value;
    return sum / static_cast<double>(received.size());
}

double one_update(double own_score) { return own_score; }

namespace {

// One synchronous neighbor exchange of full score vectors, optionally
// through the network layer. Returns what each agent received.
std::vector<std::vector<const ScoreVector*>> exchange_vectors(
    const std::vector<ScoreVector>& locals, const CommGraph& graph, Network* net,
    std::vector<std::vector<Message>>& inbox_storage) {
    std::vector<std::vector<const ScoreVector*>> received(graph.n);
    if (net != nullptr) {
        for (int i = 0; i < graph.n; ++i)
            for (int j : graph.adj[i]) net->send(Message{i, j, ScoreVecPayload{locals[i]}});
        inbox_storage = net->exchange_round();
        for (int i = 0; i < graph.n; ++i)
            for (const auto& msg : inbox_storage[i])
                received[i].push_back(&std::get<ScoreVecPayload>(msg.payload).values);
    } else {
        for (int i = 0; i < graph.n; ++i)
            for (int j : graph.adj[i]) received[i].push_back(&locals[j]);
    }
    return received;
}

void check_rows(const std::vector<ScoreVector>& rows, const CommGraph& graph, const char* who) {
    if (static_cast<int>(rows.size()) != graph.n)
        throw ConfigError(std::string(who) + ": need one vector per agent");
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != graph.n)
            throw ConfigError(std::string(who) + ": vectors must have length n");
}

}  // namespace

ConsensusReport maximal_consensus(const std::vector<ScoreVector>& locals, const CommGraph& graph,
                                  Network* net, std::vector<ScoreVector>* final_states) {
    graph.require_connected();
    check_rows(locals, graph, "maximal_consensus");
    const int rounds = diameter(graph);
    std::vector<ScoreVector> state = locals;
    for (int r = 0; r < rounds; ++r) {
        std::vector<std::vector<Message>> storage;
        auto received = exchange_vectors(state, graph, net, storage);
        std::vector<ScoreVector> next = state;
        for (int i = 0; i < graph.n; ++i)
            for (const auto* vec : received[i])
                for (int k = 0; k < graph.n; ++k) next[i][k] = std::max(next[i][k], (*vec)[k]);
        state = std::move(next);
    }
    ConsensusReport report;
    report.variant = "max";
    report.final = state[0];
    report.iterations = rounds;
    report.message_rounds = rounds;
    report.residual = 0.0;
    if (final_states != nullptr) *final_states = std::move(state);
    return report;
}

ScoreVector local_gradient(int i, const ScoreVector& x, const std::vector<ScoreVector>& x0_rows,
                           const CommGraph& graph) {
    ScoreVector g(graph.n, 0.0);
    const double ni = static_cast<double>(graph.degree(i));
    if (ni == 0) return g;
    for (int j : graph.adj[i]) g[j] = (2.0 / ni) * (x[j] - x0_rows[i][j]);
    return g;
}

double local_objective(int i, const ScoreVector& x, const std::vector<ScoreVector>& x0_rows,
                       const CommGraph& graph) {
    const double ni = static_cast<double>(graph.degree(i));
    if (ni == 0) return 0.0;
    double sum = 0.0;
    for (int j : graph.adj[i]) {
        const double d = x[j] - x0_rows[i][j];
        sum += d * d;
    }
    return sum / ni;
}

namespace {

struct IterateStats {
    double change = 0.0;        // max_i ||x_i^{t+1} - x_i^t||_inf
    double disagreement = 0.0;  // max_i ||x_i - mean||_inf
};

// Flat n*n iterate storage, row i = agent i's local vector. All scratch is
// preallocated once; the solver loops allocate nothing.
struct SolverState {
    int n = 0;
    std::vector<double> scratch_mean;

    explicit SolverState(int n_agents) : n(n_agents), scratch_mean(n_agents, 0.0) {}

    IterateStats stats(const std::vector<double>& prev, const std::vector<double>& cur) {
        IterateStats s;
        for (int k = 0; k < n; ++k) scratch_mean[k] = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) scratch_mean[k] += cur[i * n + k];
        for (int k = 0; k < n; ++k) scratch_mean[k] /= static_cast<double>(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                s.change = std::max(s.change, std::abs(cur[i * n + k] - prev[i * n + k]));
                s.disagreement =
                    std::max(s.disagreement, std::abs(cur[i * n + k] - scratch_mean[k]));
            }
        return s;
    }

    ScoreVector average(const std::vector<double>& cur) {
        ScoreVector mean(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) mean[k] += cur[i * n + k];
        for (auto& m : mean) m /= static_cast<double>(n);
        return mean;
    }
};

void check_finite_flat(const std::vector<double>& xs, std::int64_t iteration, const char* who) {
    for (double value : xs)
        if (!std::isfinite(value))
            throw DivergenceError(std::string(who) + ": non-finite iterate at iteration " +
                                  std::to_string(iteration));
}

std::vector<double> flatten(const std::vector<ScoreVector>& rows, int n) {
    std::vector<double> flat(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) flat[i * n + k] = rows[i][k];
    return flat;
}

// One synchronous round: every agent sends its current vector to each
// neighbor, then combines the delivered copies with the mixing weights.
// Without a network the neighbor values are read in the same (ascending)
// order, so both paths produce bit-identical results.
void mix_round(const std::vector<double>& x, std::vector<double>& out, const ConsensusMatrix& P,
               const CommGraph& graph, Network* net) {
    const int n = graph.n;
    if (net != nullptr) {
        for (int i = 0; i < n; ++i) {
            ScoreVecPayload payload;
            payload.values.assign(x.begin() + i * n, x.begin() + (i + 1) * n);
            for (int j : graph.adj[i]) net->send(Message{i, j, payload});
        }
        auto inboxes = net->exchange_round();
        for (int i = 0; i < n; ++i) {
            const double pii = P.at(i, i);
            for (int k = 0; k < n; ++k) out[i * n + k] = pii * x[i * n + k];
            for (const auto& msg : inboxes[i]) {
                const auto& xj = std::get<ScoreVecPayload>(msg.payload).values;
                const double pij = P.at(i, msg.src);
                for (int k = 0; k < n; ++k) out[i * n + k] += pij * xj[k];
            }
        }
        return;
    }
    for (int i = 0; i < n; ++i) {
        const double pii = P.at(i, i);
        for (int k = 0; k < n; ++k) out[i * n + k] = pii * x[i * n + k];
        for (int j : graph.adj[i]) {
            const double pij = P.at(i, j);
            for (int k = 0; k < n; ++k) out[i * n + k] += pij * x[j * n + k];
        }
    }
}

// In-place gradient step: out[i*n+j] -= step * d f_i / d x_j evaluated at x.
void apply_gradient(const std::vector<double>& x, std::vector<double>& out, double step,
                    const std::vector<double>& x0_flat, const CommGraph& graph) {
    for (int i = 0; i < graph.n; ++i) {
        const double ni = static_cast<double>(graph.degree(i));
        if (ni == 0) continue;
        for (int j : graph.adj[i])
            out[i * graph.n + j] -=
                step * (2.0 / ni) * (x[i * graph.n + j] - x0_flat[i * graph.n + j]);
    }
}

}  // namespace

ConsensusReport dgd_solve(const std::vector<ScoreVector>& x0_rows, const CommGraph& graph,
                          double gamma0, const StopRule& stop, Network* net) {
    graph.require_connected();
    check_rows(x0_rows, graph, "dgd_solve");
    const ConsensusMatrix P = build_consensus_matrix(graph);
    const int n = graph.n;

    const std::vector<double> x0 = flatten(x0_rows, n);
    std::vector<double> x = x0;  // agent i starts from its own evaluations
    std::vector<double> next(x.size(), 0.0);
    SolverState state(n);

    ConsensusReport report;
    report.variant = to_string(ConsensusVariant::Dgd);
    while (report.iterations < stop.max_iterations) {
        const double gamma = gamma0 / static_cast<double>(report.iterations + 1);
        mix_round(x, next, P, graph, net);
        report.message_rounds += 1;
        apply_gradient(x, next, gamma, x0, graph);
        report.iterations += 1;
        check_finite_flat(next, report.iterations, "dgd_solve");
        const IterateStats s = state.stats(x, next);
        std::swap(x, next);
        report.residual = std::max(s.change, s.disagreement);
        if (s.change < stop.tol && s.disagreement < stop.tol) break;
    }
    report.final = state.average(x);
    return report;
}

ConsensusReport extra_solve(const std::vector<ScoreVector>& x0_rows, const CommGraph& graph,
                            double alpha_step, const StopRule& stop, Network* net) {
    graph.require_connected();
    check_rows(x0_rows, graph, "extra_solve");
    if (!(alpha_step > 0)) throw ConfigError("extra_solve: stepsize must be > 0");
    const ConsensusMatrix P = build_consensus_matrix(graph);
    const int n = graph.n;

    ConsensusReport report;
    report.variant = to_string(ConsensusVariant::Extra);

    const std::vector<double> x0 = flatten(x0_rows, n);
    std::vector<double> x_prev = x0;
    // Each agent remembers the mixed value of the previous iterate, so the
    // corrected recursion costs one exchange per iteration.
    std::vector<double> mixed_prev(x0.size(), 0.0);
    mix_round(x_prev, mixed_prev, P, graph, net);
    report.message_rounds += 1;

    // First step is plain gradient-consensus with the constant stepsize.
    std::vector<double> x_cur = mixed_prev;
    apply_gradient(x_prev, x_cur, alpha_step, x0, graph);
    report.iterations = 1;
    check_finite_flat(x_cur, report.iterations, "extra_solve");
    SolverState state(n);
    {
        const IterateStats s = state.stats(x_prev, x_cur);
        report.residual = std::max(s.change, s.disagreement);
        if (s.change < stop.tol && s.disagreement < stop.tol) {
            report.final = state.average(x_cur);
            return report;
        }
    }

    std::vector<double> mixed_cur(x0.size(), 0.0);
    std::vector<double> next(x0.size(), 0.0);
    while (report.iterations < stop.max_iterations) {
        // M x^{t+1} - (M/2) x^t with M = I + P, i.e.
        // x^{t+1} + P x^{t+1} - x^t/2 - (P x^t)/2.
        mix_round(x_cur, mixed_cur, P, graph, net);
        report.message_rounds += 1;
        for (std::size_t k = 0; k < next.size(); ++k)
            next[k] = x_cur[k] + mixed_cur[k] - 0.5 * (x_prev[k] + mixed_prev[k]);
        apply_gradient(x_cur, next, alpha_step, x0, graph);
        apply_gradient(x_prev, next, -alpha_step, x0, graph);
        report.iterations += 1;
        check_finite_flat(next, report.iterations, "extra_solve");
        const IterateStats s = state.stats(x_cur, next);
        std::swap(x_prev, x_cur);
        std::swap(x_cur, next);
        std::swap(mixed_prev, mixed_cur);
        report.residual = std::max(s.change, s.disagreement);
        if (s.change < stop.tol && s.disagreement < stop.tol) break;
    }
    report.final = state.average(x_cur);
    return report;
}

ScoreVector oracle_solve(const std::vector<ScoreVector>& x0_rows, const CommGraph& graph) {
    check_rows(x0_rows, graph, "oracle_solve");
    ScoreVector out(graph.n, 0.0);
    for (int j = 0; j < graph.n; ++j) {
        double num = 0.0, den = 0.0;
        for (int i : graph.adj[j]) {
            const double w = 1.0 / static_cast<double>(graph.degree(i));
            num += w * x0_rows[i][j];
            den += w;
        }
        // A node nobody evaluates (isolated) keeps its self-evaluation; the
        // objective has no term for it.
        out[j] = den > 0 ? num / den : x0_rows[j][j];
    }
    return out;
}

std::string to_string(ConsensusVariant v) {
    switch (v) {
        case ConsensusVariant::Dmvf: return "dmvf";
        case ConsensusVariant::Ave: return "ave";
        case ConsensusVariant::One: return "one";
        case ConsensusVariant::Dgd: return "dgd";
        case ConsensusVariant::Extra: return "extra";
    }
    throw ConfigError("unknown consensus variant");
}

ConsensusVariant consensus_from_string(const std::string& name) {
    if (name == "dmvf") return ConsensusVariant::Dmvf;
    if (name == "ave") return ConsensusVariant::Ave;
    if (name == "one") return ConsensusVariant::One;
    if (name == "dgd") return ConsensusVariant::Dgd;
    if (name == "extra") return ConsensusVariant::Extra;
    throw ConfigError("unknown consensus variant: " + name +
                      " (expected dmvf|ave|one|dgd|extra)");
}

const std::vector<ConsensusVariant>& all_consensus_variants() {
    static const std::vector<ConsensusVariant> all = {
        ConsensusVariant::Dmvf, ConsensusVariant::Ave, ConsensusVariant::One,
        ConsensusVariant::Dgd, ConsensusVariant::Extra};
    return all;
}

}  // namespace dmvf
