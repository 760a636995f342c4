#pragma once

#include <cstdint>
#include <vector>

namespace dmvf {

struct SelectedFrame {
    std::int64_t index = 0;
    std::vector<float> feature;
};

/// The frames one agent kept during one adaptation period. Indices are on the
/// shared scene timeline and strictly increasing; every kept frame was also
/// processed, so processed_count == selected.size().
struct SelectionBuffer {
    int view_id = 0;
    std::int64_t period_index = 0;
    std::vector<SelectedFrame> selected;
    std::int64_t processed_count = 0;

    bool empty() const { return selected.empty(); }
    std::int64_t size() const { return static_cast<std::int64_t>(selected.size()); }
};

}  // namespace dmvf
