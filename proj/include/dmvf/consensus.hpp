#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmvf/graph.hpp"
#include "dmvf/netsim.hpp"

namespace dmvf {

using ScoreVector = std::vector<double>;

/// Row-stochastic mixing matrix: off-diagonal 1/(d_max+1) on edges, diagonal
/// (d_max+1-d_i)/(d_max+1). Symmetric, hence doubly stochastic.
struct ConsensusMatrix {
    int n = 0;
    std::vector<double> values;  // row-major

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
};

ConsensusMatrix build_consensus_matrix(const CommGraph& graph);

struct ConsensusReport {
    std::string variant;
    ScoreVector final;
    std::int64_t iterations = 0;
    std::int64_t message_rounds = 0;
    double residual = 0.0;
};

/// One received initial-score entry: sender j's evaluation of the receiving
/// agent, with j's degree piggybacked.
struct ScoreEntry {
    int from = 0;
    double value = 0.0;
    int degree = 0;  // n_j
};

/// Degree-weighted mean of the received evaluations:
/// sum_j (1/n_j) x_j / sum_j (1/n_j). `neighborhood` is the closed
/// neighborhood the entries must cover exactly.
double weighted_update(const std::vector<ScoreEntry>& received,
                       const std::vector<int>& neighborhood);

/// Plain mean of the received evaluations over the closed neighborhood.
double ave_update(const std::vector<ScoreEntry>& received, const std::vector<int>& neighborhood);

/// Keeps the agent's own self-evaluation unchanged.
double one_update(double own_score);

/// Synchronous elementwise-max gossip for exactly diameter(graph) rounds;
/// guaranteed exact agreement at that point. Messages go through `net` when
/// provided (ledger accounting), otherwise delivered directly. When
/// `final_states` is given it receives every agent's end-state.
ConsensusReport maximal_consensus(const std::vector<ScoreVector>& locals, const CommGraph& graph,
                                  Network* net = nullptr,
                                  std::vector<ScoreVector>* final_states = nullptr);

struct StopRule {
    double tol = 1e-6;
    std::int64_t max_iterations = 10000;
};

/// Decentralized gradient descent on the separable quadratic whose blocks are
/// f_i(x) = (1/n_i) sum over neighbors j of (x_j - x0[i][j])^2, with
/// diminishing stepsize gamma0/(t+1). Stops when both the consecutive-iterate
/// change and the inter-agent disagreement drop below tol (infinity norms).
/// Returns the across-agent average of the final iterates.
ConsensusReport dgd_solve(const std::vector<ScoreVector>& x0_rows, const CommGraph& graph,
                          double gamma0, const StopRule& stop, Network* net = nullptr);

/// Exact first-order variant: one plain gradient-consensus step, then the
/// corrected recursion x^{t+2} = M x^{t+1} - (M/2) x^t - alpha (g^{t+1} - g^t)
/// with M = I + P; constant stepsize, same minimizer and stop rule as DGD.
ConsensusReport extra_solve(const std::vector<ScoreVector>& x0_rows, const CommGraph& graph,
                            double alpha_step, const StopRule& stop, Network* net = nullptr);

/// Closed-form minimizer (the objective is separable per coordinate):
/// x*_j = sum over incident i of (1/n_i) x0[i][j], normalized. Test oracle
/// and reference for the iterative solvers.
ScoreVector oracle_solve(const std::vector<ScoreVector>& x0_rows, const CommGraph& graph);

/// Analytic gradient of f_i at x (see dgd_solve); exposed for verification.
ScoreVector local_gradient(int i, const ScoreVector& x, const std::vector<ScoreVector>& x0_rows,
                           const CommGraph& graph);

/// Value of f_i at x; the oracle-side finite differences run against this.
double local_objective(int i, const ScoreVector& x, const std::vector<ScoreVector>& x0_rows,
                       const CommGraph& graph);

enum class ConsensusVariant { Dmvf, Ave, One, Dgd, Extra };

std::string to_string(ConsensusVariant v);
ConsensusVariant consensus_from_string(const std::string& name);
const std::vector<ConsensusVariant>& all_consensus_variants();

}  // namespace dmvf
