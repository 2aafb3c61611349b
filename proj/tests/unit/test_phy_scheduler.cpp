#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vrstream/error.hpp"
#include "vrstream/phy_scheduler.hpp"
#include "vrstream/rng.hpp"

using namespace vrstream;

namespace {

scheduler_instance canonical_u3() {
    scheduler_instance inst;
    inst.users = 3;
    inst.rate_bps = {10e6, 9e6, 10e6};
    inst.afer_bps = {2e6, 2e6, 2e6};
    inst.total_slots = 7;
    inst.coherence_slots = 10;
    inst.lambda = 0.0;
    return inst;
}

scheduler_instance random_instance(rng& gen, double lambda) {
    scheduler_instance inst;
    inst.users = 2 + static_cast<int>(gen.below(3));
    inst.total_slots = static_cast<int>(gen.below(13));
    inst.coherence_slots = inst.total_slots + static_cast<int>(gen.below(8)) + 1;
    inst.lambda = lambda;
    for (int u = 0; u < inst.users; ++u) {
        inst.rate_bps.push_back(gen.uniform(1e5, 2e7));
        inst.afer_bps.push_back(gen.uniform(0.0, 1.2e7));
    }
    return inst;
}

void check_allocation_invariants(const scheduler_instance& inst, const slot_allocation& a) {
    REQUIRE(static_cast<int>(a.slots.size()) == inst.users);
    int sum = 0;
    for (int t : a.slots) {
        CHECK(t >= 0);
        CHECK(t <= inst.total_slots);
        sum += t;
    }
    CHECK(sum == inst.total_slots);
}

} // namespace

TEST_CASE("initial allocation floors with the remainder on the last user") {
    scheduler_instance inst = canonical_u3();
    auto a = initial_allocation(inst);
    CHECK(a.slots == std::vector<int>{2, 2, 3});

    inst.total_slots = 6;
    CHECK(initial_allocation(inst).slots == std::vector<int>{2, 2, 2});

    inst.total_slots = 0;
    CHECK(initial_allocation(inst).slots == std::vector<int>{0, 0, 0});
}

TEST_CASE("seeded-random initial allocation is a valid reproducible composition") {
    scheduler_instance inst = canonical_u3();
    inst.users = 5;
    inst.rate_bps = {1e6, 1e6, 1e6, 1e6, 1e6};
    inst.afer_bps = {0, 0, 0, 0, 0};
    inst.total_slots = 50;
    inst.coherence_slots = 60;
    inst.random_init = true;
    inst.init_seed = 11;
    auto a = initial_allocation(inst);
    check_allocation_invariants(inst, a);
    auto b = initial_allocation(inst);
    CHECK(a.slots == b.slots); // same seed, same split
    inst.init_seed = 12;
    auto c = initial_allocation(inst);
    check_allocation_invariants(inst, c);
    CHECK(a.slots != c.slots); // T=50 over 5 users: collision is (practically) impossible
}

TEST_CASE("per-user cost collapses to the violation at lambda zero") {
    scheduler_instance inst = canonical_u3();
    std::vector<int> t = {2, 2, 3};
    // u1 serves (2/10)*9e6 = 1.8e6 against a 2e6 target
    CHECK(violation_bps(inst, t, 1) == doctest::Approx(0.2e6).epsilon(1e-12));
    CHECK(per_user_cost(inst, t, 1) == violation_bps(inst, t, 1));
    CHECK(per_user_cost(inst, t, 0) == 0.0); // (2/10)*10e6 meets 2e6
}

TEST_CASE("per-user cost applies the log-rate term for positive lambda") {
    scheduler_instance inst;
    inst.users = 1;
    inst.rate_bps = {10e6};
    inst.afer_bps = {0.0};
    inst.total_slots = 3;
    inst.coherence_slots = 10;
    inst.lambda = 0.01;
    std::vector<int> t = {3};
    // -0.01 * 3 * ln(1e7), with w = 0
    CHECK(per_user_cost(inst, t, 0) ==
          doctest::Approx(-0.4835428695287496).epsilon(1e-12));
    CHECK(global_objective(inst, t) ==
          doctest::Approx(-0.4835428695287496).epsilon(1e-12));
}

TEST_CASE("swap iteration solves the canonical three-user instance") {
    auto inst = canonical_u3();
    auto res = schedule(inst);
    check_allocation_invariants(inst, res.alloc);
    CHECK(res.converged);
    CHECK(res.alloc.slots == std::vector<int>{2, 3, 2});
    CHECK(res.max_violation_bps == 0.0);
    CHECK(res.objective == 0.0);
    CHECK(res.iterations == 1);
    REQUIRE(res.trace.size() == 2);
    CHECK(res.trace[0].objective == doctest::Approx(200000.0).epsilon(1e-12));
    CHECK(res.trace[1].donor == 2);
    CHECK(res.trace[1].recipient == 1);
    CHECK(res.trace[1].objective == 0.0);
    // one iteration costs at most 2U-1 cost evaluations
    CHECK(res.trace[1].cost_evals <= 2 * inst.users - 1);
}

TEST_CASE("degenerate instances") {
    scheduler_instance one;
    one.users = 1;
    one.rate_bps = {5e6};
    one.afer_bps = {1e6};
    one.total_slots = 4;
    one.coherence_slots = 10;
    auto res = schedule(one);
    CHECK(res.alloc.slots == std::vector<int>{4});
    CHECK(res.iterations == 0);
    CHECK(res.converged);

    auto zero_re = canonical_u3();
    zero_re.afer_bps = {0.0, 0.0, 0.0};
    auto r2 = schedule(zero_re);
    CHECK(r2.alloc.slots == std::vector<int>{2, 2, 3}); // initial split untouched
    CHECK(r2.iterations == 0);

    auto empty = canonical_u3();
    empty.total_slots = 0;
    CHECK(schedule(empty).alloc.slots == std::vector<int>{0, 0, 0});
}

TEST_CASE("symmetric two-user instance splits evenly") {
    scheduler_instance inst;
    inst.users = 2;
    inst.rate_bps = {1.0, 1.0};
    inst.afer_bps = {10.0, 10.0};
    inst.total_slots = 2;
    inst.coherence_slots = 2;
    auto b = brute_force_schedule(inst);
    CHECK(b.alloc.slots == std::vector<int>{1, 1});
    // each serves (1/2)*1 = 0.5 against 10: Max(W) = 9.5 by the formula
    CHECK(b.max_violation_bps == doctest::Approx(9.5).epsilon(1e-12));
    auto s = schedule(inst);
    CHECK(s.max_violation_bps == doctest::Approx(b.max_violation_bps).epsilon(1e-12));
}

TEST_CASE("final violation matches the exhaustive oracle on random instances") {
    rng gen(2024);
    for (int i = 0; i < 300; ++i) {
        auto inst = random_instance(gen, 0.0);
        if (i % 3 == 2) {
            inst.random_init = true;
            inst.init_seed = gen.next_u64();
        }
        auto s = schedule(inst);
        auto b = brute_force_schedule(inst);
        check_allocation_invariants(inst, s.alloc);
        REQUIRE(s.converged);
        CHECK(std::fabs(s.max_violation_bps - b.max_violation_bps) <= 1e-9);
    }
}

TEST_CASE("objective trace is non-increasing and instrumentation stays linear") {
    rng gen(77);
    for (int i = 0; i < 200; ++i) {
        auto inst = random_instance(gen, (i % 2) ? 0.01 : 0.0);
        auto s = schedule(inst);
        CHECK(s.iterations <= inst.effective_max_iters());
        for (std::size_t k = 1; k < s.trace.size(); ++k) {
            if (inst.lambda == 0.0)
                CHECK(s.trace[k].objective <= s.trace[k - 1].objective);
            else
                CHECK(s.trace[k].objective <= s.trace[k - 1].objective + 1e-9);
            CHECK(s.trace[k].cost_evals <= 2 * inst.users - 1);
            CHECK(s.trace[k].donor >= 0);
            CHECK(s.trace[k].recipient >= 0);
            CHECK(s.trace[k].donor != s.trace[k].recipient);
        }
    }
}

TEST_CASE("iteration cap reports honest non-convergence") {
    auto inst = canonical_u3();
    inst.afer_bps = {9e6, 0.1e6, 0.1e6}; // u0 starved: needs several one-slot transfers
    inst.max_iters = 0;
    auto full = schedule(inst);
    CHECK(full.converged);
    REQUIRE(full.iterations > 1);
    inst.max_iters = 1;
    auto capped = schedule(inst);
    CHECK(capped.iterations == 1);
    CHECK_FALSE(capped.converged);
}

TEST_CASE("brute force guard rejects oversized enumerations") {
    scheduler_instance inst;
    inst.users = 12;
    inst.rate_bps.assign(12, 1e6);
    inst.afer_bps.assign(12, 1e6);
    inst.total_slots = 90;
    inst.coherence_slots = 100;
    CHECK_THROWS_AS(brute_force_schedule(inst), capacity_error);
}

TEST_CASE("instance validation rejects malformed inputs") {
    auto good = canonical_u3();
    CHECK_NOTHROW(good.validate());

    auto bad = good;
    bad.users = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = good;
    bad.rate_bps[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = good;
    bad.afer_bps[0] = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = good;
    bad.total_slots = 11; // exceeds the coherence block
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = good;
    bad.lambda = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = good;
    bad.rate_bps.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("proportional fairness serves never-served users first and follows r over avg") {
    proportional_fair_scheduler pf(2, 100);
    auto counts = pf.schedule({2.0, 1.0}, 12);
    CHECK(counts[0] + counts[1] == 12);

    // independent step-through of the same rule
    std::vector<double> avg = {0.0, 0.0};
    std::vector<int> want = {0, 0};
    const double w = 100.0;
    for (int s = 0; s < 12; ++s) {
        std::vector<double> rate = {2.0, 1.0};
        int pick = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int u = 0; u < 2; ++u) {
            double score = avg[static_cast<std::size_t>(u)] == 0.0
                               ? std::numeric_limits<double>::infinity()
                               : rate[static_cast<std::size_t>(u)] / avg[static_cast<std::size_t>(u)];
            if (score > best) {
                best = score;
                pick = u;
            }
        }
        ++want[static_cast<std::size_t>(pick)];
        for (int u = 0; u < 2; ++u)
            avg[static_cast<std::size_t>(u)] =
                (1.0 - 1.0 / w) * avg[static_cast<std::size_t>(u)] +
                (u == pick ? rate[static_cast<std::size_t>(u)] : 0.0) / w;
    }
    CHECK(counts == want);
    // smoothed state persists for the next block
    CHECK(pf.smoothed_rates()[0] > 0.0);
    CHECK(pf.smoothed_rates()[1] > 0.0);
}

TEST_CASE("proportional fairness degenerate cases") {
    proportional_fair_scheduler one(1, 100);
    CHECK(one.schedule({5e6}, 9) == std::vector<int>{9});

    proportional_fair_scheduler eq(2, 100);
    auto counts = eq.schedule({1e6, 1e6}, 11);
    CHECK(std::abs(counts[0] - counts[1]) <= 1);

    proportional_fair_scheduler err(2, 100);
    CHECK_THROWS_AS(err.schedule({1e6}, 5), std::invalid_argument);
    CHECK_THROWS_AS(err.schedule({1e6, 0.0}, 5), std::invalid_argument);
    CHECK_THROWS_AS(proportional_fair_scheduler(0, 100), std::invalid_argument);
    CHECK_THROWS_AS(proportional_fair_scheduler(2, 0), std::invalid_argument);
}
