#pragma once

#include <map>
#include <span>
#include <vector>

#include "dmvf/graph.hpp"
#include "dmvf/selection.hpp"

namespace dmvf {

/// exp(-alpha * ||x - y||_2), in (0, 1]. Dimension mismatch throws.
double frame_similarity(std::span<const float> x, std::span<const float> y, double alpha);

/// How well cover's frames represent target's: each frame of `target` finds
/// its best match among `cover`'s frames; the per-frame maxima are averaged
/// over target's frames. Asymmetric. Either buffer empty -> 0.
///
/// The OpenMP version parallelizes over target frames; per-frame maxima land
/// in private slots and are summed in index order, so the result is
/// bit-identical to the serial reference at any thread count.
double agent_similarity(const SelectionBuffer& cover, const SelectionBuffer& target, double alpha);
double agent_similarity_serial(const SelectionBuffer& cover, const SelectionBuffer& target,
                               double alpha);

/// Agent `owner`'s local estimates: for each j in its closed neighborhood,
/// the mean over the other neighborhood members k of how well j's buffer
/// covers k's. Agents outside the neighborhood score 0 (implicitly).
struct InitialScoreSet {
    int owner = 0;
    int degree = 0;  // neighbor count of owner
    std::map<int, double> scores;

    double at(int j) const {
        auto it = scores.find(j);
        return it == scores.end() ? 0.0 : it->second;
    }
};

InitialScoreSet initial_scores(int owner, const std::map<int, const SelectionBuffer*>& buffers,
                               const CommGraph& graph, double alpha);

}  // namespace dmvf
