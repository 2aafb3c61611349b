#pragma once

#include <deque>
#include <vector>

#include "vrstream/media.hpp"

namespace vrstream {

// Arithmetic mean of the most recent per-slot achieved rates; zero before
// any sample arrives.
class bandwidth_predictor {
public:
    explicit bandwidth_predictor(int window);

    void push(double achieved_bps);
    double predict() const;
    int sample_count() const { return static_cast<int>(history_.size()); }

private:
    std::deque<double> history_;
    std::size_t window_;
};

// (tile, delta level) download grant; the ordered grant queue is what the
// slot-by-slot transfer engine consumes, so prediction error surfaces as
// partially delivered tails.
struct grant_unit {
    int tile = 0;
    int delta_level = 0;
    double size_bits = 0.0;
};

struct tile_decision {
    int tile = 0;
    int quality = 0;
};

struct selection {
    std::vector<tile_decision> decisions; // assigned tiles only
    std::vector<grant_unit> queue;        // grant order
    double spent_bits = 0.0;              // always <= budget
};

// Vertical greedy: tiles in descending probability (ties -> lower index),
// each takes the highest quality whose full size fits, else is skipped.
selection qps_select(const std::vector<double>& tile_pr, double budget_bits,
                     const video_manifest& m, int c);

// Horizontal rounds over tiles with pr >= p_th: round 0 grants base quality,
// each later round one upgrade delta, always in descending-probability
// order; a tile whose cost does not fit is skipped and the round continues.
selection fps_select(const std::vector<double>& tile_pr, double budget_bits,
                     const video_manifest& m, int c, double p_th);

} // namespace vrstream
