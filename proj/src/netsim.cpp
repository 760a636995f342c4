#include "dmvf/netsim.hpp"

#include <string>
#include <utility>

#include "dmvf/errors.hpp"

namespace dmvf {

namespace {
constexpr std::int64_t kHeaderBytes = 16;
constexpr std::int64_t kScalarBytes = 4;
constexpr std::int64_t kIndexBytes = 8;
constexpr std::int64_t kScoreBytes = 8;
}  // namespace

std::int64_t payload_bytes(const Payload& payload) {
    if (const auto* frames = std::get_if<SelectedFramesPayload>(&payload)) {
        const std::int64_t k = frames->buffer.size();
        return k * (kScalarBytes * frames->dim + kIndexBytes) + kHeaderBytes;
    }
    if (std::get_if<InitialScorePayload>(&payload)) {
        return kScoreBytes + kIndexBytes + kHeaderBytes;  // score + piggybacked degree
    }
    const auto& vec = std::get<ScoreVecPayload>(payload);
    return kScoreBytes * static_cast<std::int64_t>(vec.values.size()) + kHeaderBytes;
}

double CommLedger::bytes_fraction_of_raw(std::int64_t scene_length, int n_views, int dim) const {
    const double raw = static_cast<double>(scene_length) * n_views * (4.0 * dim + 1.0);
    if (raw <= 0) return 0.0;
    return static_cast<double>(cumulative.bytes_total) / raw;
}

Network::Network(CommGraph graph) : graph_(std::move(graph)) {
    outboxes_.resize(graph_.n);
}

void Network::begin_period() { ledger_.periods.emplace_back(); }

void Network::send(Message msg) {
    if (msg.src < 0 || msg.src >= graph_.n || msg.dst < 0 || msg.dst >= graph_.n)
        throw ProtocolError("message endpoint outside graph: " + std::to_string(msg.src) + "->" +
                            std::to_string(msg.dst));
    if (!graph_.has_edge(msg.src, msg.dst))
        throw ProtocolError("message along non-edge " + std::to_string(msg.src) + "->" +
                            std::to_string(msg.dst));
    std::lock_guard<std::mutex> lock(send_mutex_);
    outboxes_[msg.src].push_back(std::move(msg));
}

std::vector<std::vector<Message>> Network::exchange_round() {
    if (ledger_.periods.empty()) ledger_.periods.emplace_back();
    PeriodTraffic& period = ledger_.periods.back();

    std::vector<std::vector<Message>> inboxes(graph_.n);
    // Walking outboxes in ascending src order yields inboxes already sorted
    // by sender, with per-sender enqueue order intact.
    for (int src = 0; src < graph_.n; ++src) {
        for (auto& msg : outboxes_[src]) {
            const std::int64_t bytes = payload_bytes(msg.payload);
            period.bytes_total += bytes;
            ledger_.cumulative.bytes_total += bytes;
            if (const auto* frames = std::get_if<SelectedFramesPayload>(&msg.payload)) {
                period.frames_sent += frames->buffer.size();
                ledger_.cumulative.frames_sent += frames->buffer.size();
            } else {
                period.score_messages += 1;
                ledger_.cumulative.score_messages += 1;
            }
            inboxes[msg.dst].push_back(std::move(msg));
        }
        outboxes_[src].clear();
    }
    return inboxes;
}

}  // namespace dmvf
