#include "vrstream/phy_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vrstream/error.hpp"
#include "vrstream/rng.hpp"

namespace vrstream {

void scheduler_instance::validate() const {
    if (users < 1) throw std::invalid_argument("scheduler needs at least one user");
    if (static_cast<int>(rate_bps.size()) != users ||
        static_cast<int>(afer_bps.size()) != users)
        throw std::invalid_argument("rate/afer vectors must have one entry per user");
    for (double r : rate_bps)
        if (!(r > 0.0)) throw std::invalid_argument("per-slot rates must be positive");
    for (double re : afer_bps)
        if (re < 0.0) throw std::invalid_argument("AFER targets must be non-negative");
    if (total_slots < 0) throw std::invalid_argument("total slots must be non-negative");
    if (coherence_slots < 1) throw std::invalid_argument("coherence block must have slots");
    if (total_slots > coherence_slots)
        throw std::invalid_argument("data slots cannot exceed the coherence block");
    if (lambda < 0.0 || lambda >= 1.0) throw std::invalid_argument("lambda must lie in [0, 1)");
    if (max_iters < 0) throw std::invalid_argument("max iterations must be non-negative");
}

slot_allocation initial_allocation(const scheduler_instance& inst) {
    inst.validate();
    slot_allocation alloc;
    alloc.total_slots = inst.total_slots;
    alloc.coherence_slots = inst.coherence_slots;
    if (inst.random_init) {
        // U-1 cut points in {0..T}, sorted; consecutive gaps are the shares
        rng gen(inst.init_seed);
        std::vector<int> cuts;
        cuts.reserve(static_cast<std::size_t>(inst.users) + 1);
        cuts.push_back(0);
        for (int i = 0; i + 1 < inst.users; ++i)
            cuts.push_back(static_cast<int>(
                gen.below(static_cast<std::uint64_t>(inst.total_slots) + 1)));
        cuts.push_back(inst.total_slots);
        std::sort(cuts.begin(), cuts.end());
        for (int u = 0; u < inst.users; ++u)
            alloc.slots.push_back(cuts[static_cast<std::size_t>(u) + 1] -
                                  cuts[static_cast<std::size_t>(u)]);
        return alloc;
    }
    alloc.slots.assign(static_cast<std::size_t>(inst.users), inst.total_slots / inst.users);
    alloc.slots.back() = inst.total_slots - (inst.users - 1) * (inst.total_slots / inst.users);
    return alloc;
}

double violation_bps(const scheduler_instance& inst, const std::vector<int>& t, int u) {
    double served = (static_cast<double>(t[static_cast<std::size_t>(u)]) /
                     static_cast<double>(inst.coherence_slots)) *
                    inst.rate_bps[static_cast<std::size_t>(u)];
    return std::max(inst.afer_bps[static_cast<std::size_t>(u)] - served, 0.0);
}

double per_user_cost(const scheduler_instance& inst, const std::vector<int>& t, int u) {
    double w = violation_bps(inst, t, u);
    if (inst.lambda == 0.0) return w;
    return -inst.lambda * static_cast<double>(t[static_cast<std::size_t>(u)]) *
               std::log(inst.rate_bps[static_cast<std::size_t>(u)]) +
           (1.0 - inst.lambda) * w;
}

double global_objective(const scheduler_instance& inst, const std::vector<int>& t) {
    double max_w = 0.0;
    double log_term = 0.0;
    for (int u = 0; u < inst.users; ++u) {
        max_w = std::max(max_w, violation_bps(inst, t, u));
        if (inst.lambda != 0.0)
            log_term += static_cast<double>(t[static_cast<std::size_t>(u)]) *
                        std::log(inst.rate_bps[static_cast<std::size_t>(u)]);
    }
    return -inst.lambda * log_term + (1.0 - inst.lambda) * max_w;
}

namespace {

double max_violation(const scheduler_instance& inst, const std::vector<int>& t) {
    double m = 0.0;
    for (int u = 0; u < inst.users; ++u) m = std::max(m, violation_bps(inst, t, u));
    return m;
}

} // namespace

schedule_result schedule(const scheduler_instance& inst) {
    inst.validate();
    schedule_result res;
    res.alloc = initial_allocation(inst);
    std::vector<int>& t = res.alloc.slots;

    res.trace.push_back({0, -1, -1, global_objective(inst, t), max_violation(inst, t), 0});

    std::vector<double> log_rate(static_cast<std::size_t>(inst.users), 0.0);
    if (inst.lambda != 0.0)
        for (int u = 0; u < inst.users; ++u)
            log_rate[static_cast<std::size_t>(u)] =
                std::log(inst.rate_bps[static_cast<std::size_t>(u)]);

    // w[u] evaluated at a hypothetical slot count, matching violation_bps
    // bit for bit so the guard's lambda=0 no-op argument carries over exactly
    auto viol_at = [&](int u, int tu) {
        double served = (static_cast<double>(tu) / static_cast<double>(inst.coherence_slots)) *
                        inst.rate_bps[static_cast<std::size_t>(u)];
        return std::max(inst.afer_bps[static_cast<std::size_t>(u)] - served, 0.0);
    };

    // One swap-rule scan: recipient = costliest user (ties -> lowest index);
    // donor = smallest post-decrement cost strictly below the recipient's
    // pre-swap cost (ties -> lowest index) whose transfer does not raise the
    // global objective. evals counts per-user cost evaluations: <= 2U-1.
    auto find_transfer = [&](int& worst, int& donor, int& evals) {
        evals = 0;
        worst = 0;
        double worst_cost = -std::numeric_limits<double>::infinity();
        for (int u = 0; u < inst.users; ++u) {
            double c = per_user_cost(inst, t, u);
            ++evals;
            if (c > worst_cost) {
                worst_cost = c;
                worst = u;
            }
        }
        // top-3 violations let the guard take a max over all third parties
        // in O(1) per candidate; the scan itself stays O(U)
        int top_idx[3] = {-1, -1, -1};
        double top_w[3] = {0.0, 0.0, 0.0};
        double sum_tlnr = 0.0;
        for (int u = 0; u < inst.users; ++u) {
            double w = violation_bps(inst, t, u);
            for (int k = 0; k < 3; ++k) {
                if (top_idx[k] < 0 || w > top_w[k]) {
                    for (int m = 2; m > k; --m) {
                        top_w[m] = top_w[m - 1];
                        top_idx[m] = top_idx[m - 1];
                    }
                    top_w[k] = w;
                    top_idx[k] = u;
                    break;
                }
            }
            if (inst.lambda != 0.0)
                sum_tlnr += static_cast<double>(t[static_cast<std::size_t>(u)]) *
                            log_rate[static_cast<std::size_t>(u)];
        }
        const double w_recipient_after = viol_at(worst, t[static_cast<std::size_t>(worst)] + 1);
        const double obj_now = res.trace.back().objective;

        donor = -1;
        double donor_cost = std::numeric_limits<double>::infinity();
        for (int u = 0; u < inst.users; ++u) {
            if (u == worst || t[static_cast<std::size_t>(u)] == 0) continue;
            --t[static_cast<std::size_t>(u)];
            double c = per_user_cost(inst, t, u);
            ++t[static_cast<std::size_t>(u)];
            ++evals;
            if (!(c < worst_cost && c < donor_cost)) continue;
            double w_donor_after = viol_at(u, t[static_cast<std::size_t>(u)] - 1);
            double others = 0.0;
            for (int k = 0; k < 3; ++k)
                if (top_idx[k] >= 0 && top_idx[k] != worst && top_idx[k] != u) {
                    others = top_w[k];
                    break;
                }
            double max_w_after = std::max({others, w_recipient_after, w_donor_after});
            double obj_after =
                -inst.lambda * (sum_tlnr - log_rate[static_cast<std::size_t>(u)] +
                                log_rate[static_cast<std::size_t>(worst)]) +
                (1.0 - inst.lambda) * max_w_after;
            if (obj_after > obj_now) continue;
            donor_cost = c;
            donor = u;
        }
    };

    const int cap = inst.effective_max_iters();
    int iter = 0;
    res.converged = false;
    for (;;) {
        int worst = 0;
        int donor = -1;
        int evals = 0;
        find_transfer(worst, donor, evals);
        if (donor < 0) {
            res.converged = true;
            break;
        }
        if (iter >= cap) break; // a transfer is still pending at the cap
        --t[static_cast<std::size_t>(donor)];
        ++t[static_cast<std::size_t>(worst)];
        ++iter;
        res.trace.push_back({iter, donor, worst, global_objective(inst, t),
                             max_violation(inst, t), evals});
    }
    res.iterations = iter;
    res.objective = global_objective(inst, t);
    res.max_violation_bps = max_violation(inst, t);
    return res;
}

namespace {

double compositions_count(int total, int parts) {
    // C(total + parts - 1, parts - 1), computed in doubles for the guard only
    double n = 1.0;
    for (int i = 1; i < parts; ++i) n = n * (total + i) / i;
    return n;
}

void enumerate(const scheduler_instance& inst, std::vector<int>& t, int u, int remaining,
               double& best, std::vector<int>& best_t) {
    if (u == inst.users - 1) {
        t[static_cast<std::size_t>(u)] = remaining;
        double obj = global_objective(inst, t);
        if (obj < best) {
            best = obj;
            best_t = t;
        }
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        t[static_cast<std::size_t>(u)] = k;
        enumerate(inst, t, u + 1, remaining - k, best, best_t);
    }
}

} // namespace

schedule_result brute_force_schedule(const scheduler_instance& inst) {
    inst.validate();
    if (compositions_count(inst.total_slots, inst.users) > 1e6)
        throw capacity_error("enumeration too large for brute force");
    std::vector<int> t(static_cast<std::size_t>(inst.users), 0);
    std::vector<int> best_t = t;
    best_t.back() = inst.total_slots;
    double best = std::numeric_limits<double>::infinity();
    enumerate(inst, t, 0, inst.total_slots, best, best_t);
    schedule_result res;
    res.alloc.slots = best_t;
    res.alloc.total_slots = inst.total_slots;
    res.alloc.coherence_slots = inst.coherence_slots;
    res.objective = best;
    res.max_violation_bps = max_violation(inst, best_t);
    res.converged = true;
    return res;
}

proportional_fair_scheduler::proportional_fair_scheduler(int users, int window)
    : avg_(static_cast<std::size_t>(users), 0.0), window_(window) {
    if (users < 1) throw std::invalid_argument("PF scheduler needs at least one user");
    if (window < 1) throw std::invalid_argument("PF window must be positive");
}

std::vector<int> proportional_fair_scheduler::schedule(const std::vector<double>& rate_bps,
                                                       int total_slots) {
    if (rate_bps.size() != avg_.size())
        throw std::invalid_argument("rate vector size mismatch");
    for (double r : rate_bps)
        if (!(r > 0.0)) throw std::invalid_argument("per-slot rates must be positive");
    if (total_slots < 0) throw std::invalid_argument("total slots must be non-negative");

    std::vector<int> counts(avg_.size(), 0);
    for (int s = 0; s < total_slots; ++s) {
        int pick = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < avg_.size(); ++u) {
            double score = avg_[u] == 0.0 ? std::numeric_limits<double>::infinity()
                                          : rate_bps[u] / avg_[u];
            if (score > best) {
                best = score;
                pick = static_cast<int>(u);
            }
        }
        ++counts[static_cast<std::size_t>(pick)];
        for (std::size_t u = 0; u < avg_.size(); ++u) {
            double served = static_cast<int>(u) == pick ? rate_bps[u] : 0.0;
            avg_[u] = (1.0 - 1.0 / window_) * avg_[u] + served / window_;
        }
    }
    return counts;
}

} // namespace vrstream
