#pragma once

#include <cstdint>
#include <vector>

namespace vrstream {

// One slot-scheduling problem over a beam-coherence block.
struct scheduler_instance {
    int users = 0;                // U
    std::vector<double> rate_bps; // r[u], per-slot achievable rate, > 0
    std::vector<double> afer_bps; // Re[u], AFER targets, >= 0
    int total_slots = 0;          // T, data slots to distribute
    int coherence_slots = 0;      // T_B
    double lambda = 0.0;          // tradeoff weight in [0, 1)
    int max_iters = 0;            // 0 -> U*T
    bool random_init = false;     // seeded-random starting split instead of the floor rule
    std::uint64_t init_seed = 0;  // only read when random_init is set

    int effective_max_iters() const { return max_iters > 0 ? max_iters : users * total_slots; }
    void validate() const; // throws std::invalid_argument
};

struct slot_allocation {
    std::vector<int> slots; // t[u]
    int total_slots = 0;    // T
    int coherence_slots = 0; // T_B
};

// One applied transfer. Entry 0 describes the initial allocation
// (donor = recipient = -1).
struct iteration_record {
    int iteration = 0;
    int donor = -1;
    int recipient = -1;
    double objective = 0.0;
    double max_violation_bps = 0.0;
    int cost_evals = 0; // O(U)-per-iteration instrumentation
};

struct schedule_result {
    slot_allocation alloc;
    double objective = 0.0;
    double max_violation_bps = 0.0;
    int iterations = 0; // applied transfers
    bool converged = false;
    std::vector<iteration_record> trace;
};

// Floor split with the remainder on the last user, or (when random_init is
// set) a seeded-random composition drawn via sorted cut points.
slot_allocation initial_allocation(const scheduler_instance& inst);

// w[u] = max(Re[u] - (t[u]/T_B) r[u], 0)
double violation_bps(const scheduler_instance& inst, const std::vector<int>& t, int u);

// -lambda * t[u] * ln r[u] + (1 - lambda) * w[u]; reduces to w[u] at lambda=0
double per_user_cost(const scheduler_instance& inst, const std::vector<int>& t, int u);

// -lambda * sum_u t[u] ln r[u] + (1 - lambda) * max_u w[u]
double global_objective(const scheduler_instance& inst, const std::vector<int>& t);

// Swap iteration: move one slot per round from the cheapest valid donor to
// the costliest user until no donor's post-decrement cost stays strictly
// below the costliest user's pre-swap cost. A donor is additionally rejected
// if the transfer would raise the global objective (a no-op at lambda=0,
// where the descent is implied; it keeps the trace monotone for lambda>0).
// Provably optimal at lambda=0.
schedule_result schedule(const scheduler_instance& inst);

// Exhaustive minimizer of the global objective over all compositions of T.
// Guarded: C(T+U-1, U-1) must not exceed 1e6 (capacity_error otherwise).
schedule_result brute_force_schedule(const scheduler_instance& inst);

// Slot-by-slot proportional fairness: each slot goes to argmax r[u]/avg[u]
// (never-served users first, ties to the lowest index); the smoothed served
// rate persists across calls so one instance spans a whole episode.
class proportional_fair_scheduler {
public:
    proportional_fair_scheduler(int users, int window);

    std::vector<int> schedule(const std::vector<double>& rate_bps, int total_slots);
    const std::vector<double>& smoothed_rates() const { return avg_; }

private:
    std::vector<double> avg_;
    double window_;
};

} // namespace vrstream
