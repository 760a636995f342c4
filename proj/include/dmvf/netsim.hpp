#pragma once

#include <cstdint>
#include <mutex>
#include <variant>
#include <vector>

#include "dmvf/graph.hpp"
#include "dmvf/selection.hpp"

namespace dmvf {

struct SelectedFramesPayload {
    SelectionBuffer buffer;
    int dim = 0;
};

struct InitialScorePayload {
    int subject = 0;   // whose importance the score estimates
    double score = 0;
    int sender_degree = 0;  // piggybacked so receivers can weight by degree
};

struct ScoreVecPayload {
    std::vector<double> values;
};

using Payload = std::variant<SelectedFramesPayload, InitialScorePayload, ScoreVecPayload>;

// Byte accounting: feature scalar 4, frame index 8, score 8, piggybacked
// integer 8, fixed per-message header 16.
std::int64_t payload_bytes(const Payload& payload);

struct Message {
    int src = 0;
    int dst = 0;
    Payload payload;
};

struct PeriodTraffic {
    std::int64_t frames_sent = 0;      // frame payload items delivered
    std::int64_t score_messages = 0;   // InitialScore + ScoreVec messages
    std::int64_t bytes_total = 0;
};

/// Per-period traffic totals plus the running sum.
struct CommLedger {
    std::vector<PeriodTraffic> periods;
    PeriodTraffic cumulative;

    /// Delivered bytes as a fraction of the raw input volume
    /// (L*N*(4*dim) feature bytes + L*N label bytes).
    double bytes_fraction_of_raw(std::int64_t scene_length, int n_views, int dim) const;
};

/// Synchronous barrier-delivered message layer. Agents enqueue during a
/// round; exchange_round() delivers everything at once, with each inbox
/// sorted by sender id so results never depend on enqueue interleaving.
class Network {
public:
    explicit Network(CommGraph graph);

    const CommGraph& graph() const { return graph_; }

    /// Starts accounting a new adaptation period.
    void begin_period();

    /// Enqueues for the current round. Throws ProtocolError on non-edges.
    /// Safe to call concurrently from different sending agents.
    void send(Message msg);

    /// Delivers all pending messages; inboxes[dst] sorted by src
    /// (per-src enqueue order preserved). Updates the ledger.
    std::vector<std::vector<Message>> exchange_round();

    const CommLedger& ledger() const { return ledger_; }

private:
    CommGraph graph_;
    CommLedger ledger_;
    std::vector<std::vector<Message>> outboxes_;  // indexed by src
    std::mutex send_mutex_;
};

}  // namespace dmvf
