#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dmvf/errors.hpp"
#include "dmvf/rng.hpp"
#include "dmvf/scoring.hpp"

using namespace dmvf;

namespace {

SelectionBuffer buffer_of(std::vector<std::vector<float>> feats) {
    SelectionBuffer b;
    std::int64_t idx = 0;
    for (auto& f : feats) b.selected.push_back(SelectedFrame{idx++, std::move(f)});
    b.processed_count = b.size();
    return b;
}

SelectionBuffer random_buffer(std::mt19937_64& rng, int count, int dim) {
    std::normal_distribution<double> gauss(0.0, 3.0);
    std::vector<std::vector<float>> feats;
    for (int i = 0; i < count; ++i) {
        std::vector<float> f(dim);
        for (auto& x : f) x = static_cast<float>(gauss(rng));
        feats.push_back(std::move(f));
    }
    return buffer_of(std::move(feats));
}

constexpr double kAlpha = 0.05;

}  // namespace

TEST_CASE("frame similarity of a vector with itself is 1") {
    std::vector<float> x = {1.5f, -2.0f, 0.25f};
    CHECK(frame_similarity(x, x, kAlpha) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frame similarity is symmetric") {
    std::vector<float> x = {1.0f, 2.0f, 3.0f, 4.0f};
    std::vector<float> y = {-0.5f, 0.0f, 9.0f, 1.0f};
    CHECK(frame_similarity(x, y, kAlpha) == frame_similarity(y, x, kAlpha));
}

TEST_CASE("frame similarity at distance 20 with alpha 0.05 is exp(-1)") {
    std::vector<float> x(16, 0.0f);
    std::vector<float> y(16, 0.0f);
    y[0] = 20.0f;
    CHECK(frame_similarity(x, y, kAlpha) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-12));
}

TEST_CASE("frame similarity rejects mismatched dimensions and bad alpha") {
    std::vector<float> x(4, 0.0f), y(5, 0.0f);
    CHECK_THROWS_AS(frame_similarity(x, y, kAlpha), DimensionMismatchError);
    CHECK_THROWS_AS(frame_similarity(x, x, 0.0), ConfigError);
}

TEST_CASE("identical buffers have agent similarity 1") {
    auto rng = make_rng(5);
    auto b = random_buffer(rng, 6, 8);
    CHECK(agent_similarity(b, b, kAlpha) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single target frame present in the cover scores 1") {
    auto cover = buffer_of({{0.0f, 1.0f}, {5.0f, 5.0f}, {2.0f, -1.0f}});
    auto target = buffer_of({{5.0f, 5.0f}});
    CHECK(agent_similarity(cover, target, kAlpha) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-frame target averages best matches") {
    // cover = {u}; target = {p, q} with ||p-u|| = 20, q = u.
    std::vector<float> u(16, 0.0f);
    std::vector<float> p(16, 0.0f);
    p[3] = 20.0f;
    auto cover = buffer_of({std::vector<float>(u)});
    auto target = buffer_of({std::vector<float>(p), std::vector<float>(u)});
    const double expect = (std::exp(-1.0) + 1.0) / 2.0;  // 0.68394 to 5 places
    CHECK(agent_similarity(cover, target, kAlpha) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(0.68394).epsilon(1e-5));
}

TEST_CASE("empty buffers fall back to zero on either side") {
    auto rng = make_rng(6);
    auto b = random_buffer(rng, 4, 4);
    SelectionBuffer empty;
    CHECK(agent_similarity(empty, b, kAlpha) == 0.0);
    CHECK(agent_similarity(b, empty, kAlpha) == 0.0);
    CHECK(agent_similarity(empty, empty, kAlpha) == 0.0);
}

TEST_CASE("parallel kernel is bit-identical to the serial reference") {
    auto rng = make_rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto a = random_buffer(rng, 1 + trial * 7, 16);
        auto b = random_buffer(rng, 3 + trial * 5, 16);
        CHECK(agent_similarity(a, b, kAlpha) == agent_similarity_serial(a, b, kAlpha));
        CHECK(agent_similarity(b, a, kAlpha) == agent_similarity_serial(b, a, kAlpha));
    }
}

TEST_CASE("coverage monotonicity: growing the cover never lowers the score") {
    auto rng = make_rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto cover = random_buffer(rng, 5, 8);
        auto target = random_buffer(rng, 6, 8);
        const double before = agent_similarity(cover, target, kAlpha);
        auto grown = cover;
        auto extra = random_buffer(rng, 3, 8);
        for (auto& f : extra.selected) grown.selected.push_back(f);
        grown.processed_count = grown.size();
        CHECK(agent_similarity(grown, target, kAlpha) >= before);
    }
}

TEST_CASE("scores are permutation invariant in buffer order") {
    auto rng = make_rng(9);
    auto cover = random_buffer(rng, 7, 6);
    auto target = random_buffer(rng, 5, 6);
    auto shuffled_cover = cover;
    std::reverse(shuffled_cover.selected.begin(), shuffled_cover.selected.end());
    auto shuffled_target = target;
    std::rotate(shuffled_target.selected.begin(), shuffled_target.selected.begin() + 2,
                shuffled_target.selected.end());
    CHECK(agent_similarity(cover, target, kAlpha) ==
          agent_similarity(shuffled_cover, shuffled_target, kAlpha));
}

TEST_CASE("pair neighborhood: each scores how the other covers it") {
    auto g = CommGraph::from_edges(2, {{0, 1}});
    auto rng = make_rng(10);
    auto b0 = random_buffer(rng, 4, 8);
    auto b1 = random_buffer(rng, 6, 8);
    std::map<int, const SelectionBuffer*> bufs = {{0, &b0}, {1, &b1}};
    auto s0 = initial_scores(0, bufs, g, kAlpha);
    CHECK(s0.at(1) == doctest::Approx(agent_similarity(b1, b0, kAlpha)).epsilon(1e-12));
    CHECK(s0.at(0) == doctest::Approx(agent_similarity(b0, b1, kAlpha)).epsilon(1e-12));
    CHECK(s0.degree == 1);
}

TEST_CASE("non-members score exactly zero") {
    auto g = CommGraph::path(3);  // 0-1-2; node 2 outside 0's neighborhood
    auto rng = make_rng(11);
    auto b0 = random_buffer(rng, 3, 4);
    auto b1 = random_buffer(rng, 3, 4);
    std::map<int, const SelectionBuffer*> bufs = {{0, &b0}, {1, &b1}};
    auto s0 = initial_scores(0, bufs, g, kAlpha);
    CHECK(s0.at(2) == 0.0);
    CHECK(s0.scores.count(2) == 0);
}

TEST_CASE("three-agent clique matches the exhaustive pairwise table") {
    auto g = CommGraph::complete(3);
    // One frame each so the table is tiny and checkable by brute force.
    auto b0 = buffer_of({{0.0f, 0.0f}});
    auto b1 = buffer_of({{10.0f, 0.0f}});
    auto b2 = buffer_of({{0.0f, 30.0f}});
    std::map<int, const SelectionBuffer*> bufs = {{0, &b0}, {1, &b1}, {2, &b2}};

    // Brute force over all frame pairs (single frames: similarity is direct).
    auto sim = [&](const SelectionBuffer& a, const SelectionBuffer& b) {
        return frame_similarity(a.selected[0].feature, b.selected[0].feature, kAlpha);
    };
    for (int owner = 0; owner < 3; ++owner) {
        auto s = initial_scores(owner, bufs, g, kAlpha);
        for (int j = 0; j < 3; ++j) {
            double sum = 0;
            int cnt = 0;
            for (int k = 0; k < 3; ++k) {
                if (k == j) continue;
                sum += sim(*bufs.at(j), *bufs.at(k));
                ++cnt;
            }
            CHECK(s.at(j) == doctest::Approx(sum / cnt).epsilon(1e-12));
        }
    }
}

TEST_CASE("initial scores stay in [0,1] on random buffers") {
    auto g = erdos_renyi(5, 0.6, 42);
    auto rng = make_rng(12);
    std::vector<SelectionBuffer> all;
    for (int i = 0; i < 5; ++i) all.push_back(random_buffer(rng, 2 + i, 6));
    for (int owner = 0; owner < 5; ++owner) {
        std::map<int, const SelectionBuffer*> bufs;
        for (int m : g.closed_neighborhood(owner)) bufs[m] = &all[m];
        auto s = initial_scores(owner, bufs, g, kAlpha);
        for (const auto& [j, v] : s.scores) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("isolated agent gets the neutral score") {
    auto g = CommGraph::from_edges(1, {});
    auto b = buffer_of({{1.0f}});
    std::map<int, const SelectionBuffer*> bufs = {{0, &b}};
    auto s = initial_scores(0, bufs, g, kAlpha);
    CHECK(s.at(0) == 0.5);
}

TEST_CASE("missing neighborhood buffer is an error naming the agent") {
    auto g = CommGraph::complete(3);
    auto b0 = buffer_of({{0.0f}});
    std::map<int, const SelectionBuffer*> bufs = {{0, &b0}};
    try {
        initial_scores(0, bufs, g, kAlpha);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}
