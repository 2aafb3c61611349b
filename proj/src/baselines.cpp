#include "vrstream/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace vrstream {

bandwidth_predictor::bandwidth_predictor(int window)
    : window_(static_cast<std::size_t>(window)) {
    if (window < 1) throw std::invalid_argument("predictor window must be positive");
}

void bandwidth_predictor::push(double achieved_bps) {
    if (achieved_bps < 0.0) throw std::invalid_argument("achieved rate must be non-negative");
    history_.push_back(achieved_bps);
    if (history_.size() > window_) history_.pop_front();
}

double bandwidth_predictor::predict() const {
    if (history_.empty()) return 0.0;
    double s = 0.0;
    for (double v : history_) s += v;
    return s / static_cast<double>(history_.size());
}

namespace {

// tiles ordered by descending probability, ties to the lower index
std::vector<int> probability_order(const std::vector<double>& tile_pr) {
    std::vector<int> order(tile_pr.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&tile_pr](int a, int b) {
        return tile_pr[static_cast<std::size_t>(a)] > tile_pr[static_cast<std::size_t>(b)];
    });
    return order;
}

void check_inputs(const std::vector<double>& tile_pr, double budget_bits,
                  const video_manifest& m, int c) {
    if (static_cast<int>(tile_pr.size()) != m.tile_count())
        throw std::invalid_argument("probability vector must cover every tile");
    if (budget_bits < 0.0) throw std::invalid_argument("budget must be non-negative");
    if (c < 1 || c > m.chunks) throw std::out_of_range("chunk index out of range");
}

} // namespace

selection qps_select(const std::vector<double>& tile_pr, double budget_bits,
                     const video_manifest& m, int c) {
    check_inputs(tile_pr, budget_bits, m, c);
    selection sel;
    double remaining = budget_bits;
    for (int j : probability_order(tile_pr)) {
        int chosen = -1;
        for (int q = m.ladder.levels() - 1; q >= 0; --q) {
            if (m.size_bits(c, j, q) <= remaining) {
                chosen = q;
                break;
            }
        }
        if (chosen < 0) continue;
        remaining -= m.size_bits(c, j, chosen);
        sel.spent_bits += m.size_bits(c, j, chosen);
        sel.decisions.push_back({j, chosen});
        for (int q = 0; q <= chosen; ++q)
            sel.queue.push_back({j, q, m.size_delta_bits(c, j, q)});
    }
    return sel;
}

selection fps_select(const std::vector<double>& tile_pr, double budget_bits,
                     const video_manifest& m, int c, double p_th) {
    check_inputs(tile_pr, budget_bits, m, c);
    selection sel;
    std::vector<int> eligible;
    for (int j : probability_order(tile_pr))
        if (tile_pr[static_cast<std::size_t>(j)] >= p_th) eligible.push_back(j);

    std::vector<int> level(static_cast<std::size_t>(m.tile_count()), -1);
    double remaining = budget_bits;
    for (int round = 0; round < m.ladder.levels(); ++round) {
        bool granted = false;
        for (int j : eligible) {
            if (level[static_cast<std::size_t>(j)] != round - 1) continue; // lagging or done
            double cost = m.size_delta_bits(c, j, round);
            if (cost > remaining) continue; // skip, cheaper deltas may still fit
            remaining -= cost;
            sel.spent_bits += cost;
            level[static_cast<std::size_t>(j)] = round;
            sel.queue.push_back({j, round, cost});
            granted = true;
        }
        if (!granted) break;
    }
    for (int j : eligible)
        if (level[static_cast<std::size_t>(j)] >= 0)
            sel.decisions.push_back({j, level[static_cast<std::size_t>(j)]});
    return sel;
}

} // namespace vrstream
