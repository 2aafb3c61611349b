#include "doctest.h"

#include <cmath>
#include <set>
#include <stdexcept>

#include "vrstream/error.hpp"
#include "vrstream/media.hpp"
#include "vrstream/rng.hpp"

using namespace vrstream;

namespace {

video_manifest tiny_manifest(int chunks, int rows, int cols, std::vector<double> ladder) {
    video_manifest m;
    m.video_id = 1;
    m.chunks = chunks;
    m.chunk_duration_s = 1.0;
    m.grid_rows = rows;
    m.grid_cols = cols;
    m.ladder.rates_bps = std::move(ladder);
    return m;
}

} // namespace

TEST_CASE("quality ladder validates strict monotonicity") {
    quality_ladder l;
    l.rates_bps = {1e6, 2.5e6, 5e6};
    CHECK_NOTHROW(l.validate());
    CHECK(l.levels() == 3);
    CHECK(l.mean_rate_bps() == doctest::Approx((1e6 + 2.5e6 + 5e6) / 3.0));

    l.rates_bps = {1e6, 1e6};
    CHECK_THROWS_AS(l.validate(), std::invalid_argument);
    l.rates_bps = {2e6, 1e6};
    CHECK_THROWS_AS(l.validate(), std::invalid_argument);
    l.rates_bps = {};
    CHECK_THROWS_AS(l.validate(), std::invalid_argument);
    l.rates_bps = {-1.0};
    CHECK_THROWS_AS(l.validate(), std::invalid_argument);
}

TEST_CASE("size deltas telescope back to the full sizes") {
    auto m = tiny_manifest(2, 1, 1, {1e6, 2e6, 4e6});
    m.sizes_bits = {{{2.0, 4.0, 8.0}}, {{2.0, 4.0, 8.0}}};
    m.validate();

    CHECK(m.size_bits(1, 0, 0) == 2.0);
    CHECK(m.size_bits(1, 0, 2) == 8.0);
    // Y(0) = X(0); Y(q) = X(q) - X(q-1)
    CHECK(size_delta(m, 1, 0, 0) == 2.0);
    CHECK(size_delta(m, 1, 0, 1) == 2.0);
    CHECK(size_delta(m, 1, 0, 2) == 4.0);
    double acc = 0.0;
    for (int q = 0; q < 3; ++q) {
        acc += size_delta(m, 1, 0, q);
        CHECK(acc == m.size_bits(1, 0, q)); // exact: integral sizes
    }
}

TEST_CASE("ensure_sizes draws integral, strictly increasing, reproducible sizes") {
    auto make = [](std::uint64_t seed, double jitter) {
        auto m = tiny_manifest(3, 2, 2, {1e6, 2.5e6, 5e6});
        ensure_sizes(m, jitter, seed);
        return m;
    };
    auto a = make(7, 0.2);
    auto b = make(7, 0.2);
    auto c = make(8, 0.2);
    CHECK(a.sizes_bits == b.sizes_bits);
    CHECK(a.sizes_bits != c.sizes_bits);

    bool all_integral = true;
    bool all_increasing = true;
    bool within_jitter = true;
    for (int ch = 1; ch <= a.chunks; ++ch)
        for (int j = 0; j < a.tile_count(); ++j)
            for (int q = 0; q < a.ladder.levels(); ++q) {
                double x = a.size_bits(ch, j, q);
                if (x != std::floor(x)) all_integral = false;
                if (q > 0 && !(x > a.size_bits(ch, j, q - 1))) all_increasing = false;
                double nominal = a.ladder.rates_bps[static_cast<std::size_t>(q)] *
                                 a.chunk_duration_s;
                if (x < 0.8 * nominal - 2.0 || x > 1.2 * nominal + 2.0) within_jitter = false;
            }
    CHECK(all_integral);
    CHECK(all_increasing);
    CHECK(within_jitter);

    // telescoping identity stays exact under the drawn sizes
    double acc = 0.0;
    for (int q = 0; q < a.ladder.levels(); ++q) {
        acc += size_delta(a, 2, 1, q);
        CHECK(acc == a.size_bits(2, 1, q));
    }

    // jitter 0 pins the nominal product
    auto z = make(3, 0.0);
    CHECK(z.size_bits(1, 0, 0) == std::round(1e6 * 1.0));
    CHECK(z.size_bits(1, 0, 2) == std::round(5e6 * 1.0));

    // no-op when sizes are already present
    auto before = a.sizes_bits;
    ensure_sizes(a, 0.2, 12345);
    CHECK(a.sizes_bits == before);
}

TEST_CASE("deadlines follow S + (c-1)L - m and lower deadlines trail by one chunk") {
    playback_timeline t;
    t.startup_delay_s = 2.0;
    t.margin_s = 0.5;
    t.chunk_duration_s = 1.0;
    t.chunks = 5;
    t.validate();
    CHECK(t.deadline_s(1) == 1.5);
    CHECK(t.deadline_s(3) == 3.5);
    CHECK(t.lower_deadline_s(1) == 0.0);
    CHECK(t.lower_deadline_s(3) == 2.5);

    t.margin_s = 0.0;
    CHECK(t.lower_deadline_s(2) == 2.0);

    for (int c = 1; c <= t.chunks; ++c)
        CHECK(t.lower_deadline_s(c) < t.deadline_s(c));

    playback_timeline bad = t;
    bad.margin_s = 2.0; // deadline(1) = 0: no first window
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("reduce_grid maps fine tiles onto the half-resolution grid by any-overlap") {
    // fine 10x20 -> coarse 5x10
    CHECK(reduce_grid({}, 10, 20).empty());
    CHECK(reduce_grid({0}, 10, 20) == std::set<int>{0});
    // fine (1,1) alone still lights coarse (0,0)
    CHECK(reduce_grid({21}, 10, 20) == std::set<int>{0});
    // fine (0,2) -> coarse (0,1)
    CHECK(reduce_grid({2}, 10, 20) == std::set<int>{1});

    std::set<int> full;
    for (int i = 0; i < 200; ++i) full.insert(i);
    CHECK(reduce_grid(full, 10, 20).size() == 50);

    // 4x8 grid halves to 2x4
    std::set<int> coarse = reduce_grid({8, 9}, 4, 8); // fine (1,0),(1,1) -> coarse (0,0)
    CHECK(coarse == std::set<int>{0});
}

TEST_CASE("fov probability map averages trace membership") {
    std::vector<fov_trace> traces;
    for (int u = 0; u < 35; ++u) {
        fov_trace t;
        t.user_id = u;
        t.video_id = 1;
        t.fov.resize(2);
        if (u < 7) t.fov[0].insert(3);
        t.fov[1].insert(0);
        traces.push_back(t);
    }
    auto pr = estimate_fov_probability(traces, 8);
    CHECK(pr.at(1, 3) == 0.2); // 7 of 35
    CHECK(pr.at(1, 0) == 0.0);
    CHECK(pr.at(2, 0) == 1.0);
    CHECK(pr.expected_fov_size(1) == 0.2);
    CHECK(pr.expected_fov_size(2) == 1.0);

    CHECK_THROWS(estimate_fov_probability({}, 8));
}

TEST_CASE("AFER scales the mean ladder rate by the expected FoV size") {
    quality_ladder l;
    l.rates_bps = {1e6, 2e6, 3e6, 4e6, 5e6};
    CHECK(afer_bps(l, 20.0) == doctest::Approx(6e7).epsilon(1e-12));
    CHECK(afer_bps(l, 0.0) == 0.0);
}

TEST_CASE("manifest JSON round-trips bit-exactly") {
    auto m = tiny_manifest(2, 2, 3, {1e6, 2.5e6});
    ensure_sizes(m, 0.2, 99);
    auto text = manifest_to_json_text(m, true);
    auto back = manifest_from_json_text(text);
    CHECK(back.video_id == m.video_id);
    CHECK(back.chunks == m.chunks);
    CHECK(back.grid_rows == m.grid_rows);
    CHECK(back.grid_cols == m.grid_cols);
    CHECK(back.ladder.rates_bps == m.ladder.rates_bps);
    CHECK(back.sizes_bits == m.sizes_bits); // integral bit counts survive JSON

    auto no_sizes = manifest_from_json_text(manifest_to_json_text(m, false));
    CHECK_FALSE(no_sizes.has_sizes());

    CHECK_THROWS_AS(manifest_from_json_text("{"), parse_error);
    CHECK_THROWS_AS(manifest_from_json_text("[]"), parse_error);
}

TEST_CASE("manifest accessors reject out-of-range coordinates") {
    auto m = tiny_manifest(2, 1, 1, {1e6});
    ensure_sizes(m, 0.0, 1);
    CHECK_THROWS(m.size_bits(0, 0, 0));
    CHECK_THROWS(m.size_bits(3, 0, 0));
    CHECK_THROWS(m.size_bits(1, 1, 0));
    CHECK_THROWS(m.size_bits(1, 0, 1));

    fov_trace t;
    t.fov.resize(2);
    CHECK_THROWS(t.fov_of_chunk(0));
    CHECK_THROWS(t.fov_of_chunk(3));
    CHECK_NOTHROW(t.fov_of_chunk(2));
}
