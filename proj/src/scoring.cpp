#include "dmvf/scoring.hpp"

#include <cmath>
#include <string>

#include "dmvf/errors.hpp"

namespace dmvf {

double frame_similarity(std::span<const float> x, std::span<const float> y, double alpha) {
    if (x.size() != y.size())
        throw DimensionMismatchError("frame_similarity: dims " + std::to_string(x.size()) +
                                     " vs " + std::to_string(y.size()));
    if (!(alpha > 0)) throw ConfigError("frame_similarity: alpha must be > 0");
    double sq = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double diff = static_cast<double>(x[d]) - static_cast<double>(y[d]);
        sq += diff * diff;
    }
    return std::exp(-alpha * std::sqrt(sq));
}

namespace {

double best_match(const SelectionBuffer& cover, std::span<const float> frame, double alpha) {
    double best = 0.0;
    for (const auto& c : cover.selected) {
        const double s = frame_similarity(c.feature, frame, alpha);
        if (s > best) best = s;
    }
    return best;
}

}  // namespace

double agent_similarity_serial(const SelectionBuffer& cover, const SelectionBuffer& target,
                               double alpha) {
    if (cover.empty() || target.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& t : target.selected) sum += best_match(cover, t.feature, alpha);
    return sum / static_cast<double>(target.size());
}

double agent_similarity(const SelectionBuffer& cover, const SelectionBuffer& target,
                        double alpha) {
    if (cover.empty() || target.empty()) return 0.0;
    const std::int64_t n = target.size();
    std::vector<double> best(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < n; ++s)
        best[s] = best_match(cover, target.selected[s].feature, alpha);
    double sum = 0.0;
    for (std::int64_t s = 0; s < n; ++s) sum += best[s];
    return sum / static_cast<double>(n);
}

InitialScoreSet initial_scores(int owner, const std::map<int, const SelectionBuffer*>& buffers,
                               const CommGraph& graph, double alpha) {
    const std::vector<int> hood = graph.closed_neighborhood(owner);
    for (int m : hood)
        if (!buffers.count(m) || buffers.at(m) == nullptr)
            throw Error("initial_scores: missing buffer for neighborhood member " +
                        std::to_string(m));

    InitialScoreSet out;
    out.owner = owner;
    out.degree = graph.degree(owner);

    if (hood.size() == 1) {
        // Isolated agent: no neighborhood to compare against, neutral score.
        out.scores[owner] = 0.5;
        return out;
    }

    // Pairwise coverage table over the neighborhood, computed once.
    const int m = static_cast<int>(hood.size());
    std::vector<double> cover_of(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            cover_of[static_cast<std::size_t>(a) * m + b] =
                agent_similarity(*buffers.at(hood[a]), *buffers.at(hood[b]), alpha);
        }

    for (int a = 0; a < m; ++a) {
        double sum = 0.0;
        for (int b = 0; b < m; ++b)
            if (b != a) sum += cover_of[static_cast<std::size_t>(a) * m + b];
        out.scores[hood[a]] = sum / static_cast<double>(m - 1);
    }
    return out;
}

}  // namespace dmvf
