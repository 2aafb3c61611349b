#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <set>
#include <vector>

#include "vrstream/channel.hpp"
#include "vrstream/media.hpp"
#include "vrstream/phy_scheduler.hpp"
#include "vrstream/rl_agent.hpp"
#include "vrstream/sim.hpp"

namespace py = pybind11;

namespace {

vrstream::scheduler_instance make_instance(const std::vector<double>& rates_bps,
                                           const std::vector<double>& afer_bps,
                                           int total_slots, int coherence_slots, double lambda,
                                           int max_iters) {
    vrstream::scheduler_instance inst;
    inst.users = static_cast<int>(rates_bps.size());
    inst.rate_bps = rates_bps;
    inst.afer_bps = afer_bps;
    inst.total_slots = total_slots;
    inst.coherence_slots = coherence_slots;
    inst.lambda = lambda;
    inst.max_iters = max_iters;
    inst.validate();
    return inst;
}

py::dict result_dict(const vrstream::schedule_result& res) {
    py::dict d;
    d["allocation"] = res.alloc.slots;
    d["objective"] = res.objective;
    d["max_violation_bps"] = res.max_violation_bps;
    d["iterations"] = res.iterations;
    d["converged"] = res.converged;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "tiled 360-degree streaming simulator core";

    m.def(
        "schedule",
        [](const std::vector<double>& rates_bps, const std::vector<double>& afer_bps,
           int total_slots, int coherence_slots, double lambda, int max_iters) {
            return result_dict(vrstream::schedule(make_instance(
                rates_bps, afer_bps, total_slots, coherence_slots, lambda, max_iters)));
        },
        py::arg("rates_bps"), py::arg("afer_bps"), py::arg("total_slots"),
        py::arg("coherence_slots"), py::arg("lambda_") = 0.0, py::arg("max_iters") = 0,
        "swap-iteration time-slot allocation for one coherence block");

    m.def(
        "brute_force_schedule",
        [](const std::vector<double>& rates_bps, const std::vector<double>& afer_bps,
           int total_slots, int coherence_slots, double lambda) {
            return result_dict(vrstream::brute_force_schedule(
                make_instance(rates_bps, afer_bps, total_slots, coherence_slots, lambda, 0)));
        },
        py::arg("rates_bps"), py::arg("afer_bps"), py::arg("total_slots"),
        py::arg("coherence_slots"), py::arg("lambda_") = 0.0,
        "exhaustive reference allocation (small instances only)");

    m.def("tier_value", &vrstream::tier_value, py::arg("q"), py::arg("beta"),
          "value of delivering a tile at quality level q");

    m.def(
        "compute_reward",
        [](int first_tile, const std::vector<int>& delivered_quality,
           const std::vector<int>& realized_fov, double beta, double miss_penalty) {
            std::set<int> fov(realized_fov.begin(), realized_fov.end());
            return vrstream::compute_reward(first_tile, delivered_quality, fov, beta,
                                            miss_penalty);
        },
        py::arg("first_tile"), py::arg("delivered_quality"), py::arg("realized_fov"),
        py::arg("beta"), py::arg("miss_penalty") = 1.0,
        "delayed per-tile reward over tiles first_tile..J-1");

    m.def("advantage", &vrstream::advantage, py::arg("eta"), py::arg("gamma"),
          py::arg("v_next"), py::arg("v_cur"));

    m.def("normalized_reward", &vrstream::normalized_reward, py::arg("reward"),
          py::arg("realized_fov_size"), py::arg("beta"), py::arg("ladder_levels"),
          "reward divided by the all-tiles-at-top ceiling");

    m.def(
        "afer_bps",
        [](const std::vector<double>& ladder_bps, double fov_tile_count) {
            vrstream::quality_ladder ladder;
            ladder.rates_bps = ladder_bps;
            ladder.validate();
            return vrstream::afer_bps(ladder, fov_tile_count);
        },
        py::arg("ladder_bps"), py::arg("fov_tile_count"),
        "average-FoV encoding rate demand in bit/s");

    m.def(
        "reduce_grid",
        [](const std::vector<int>& fine_fov, int fine_rows, int fine_cols) {
            std::set<int> fov(fine_fov.begin(), fine_fov.end());
            std::set<int> coarse = vrstream::reduce_grid(fov, fine_rows, fine_cols);
            return std::vector<int>(coarse.begin(), coarse.end());
        },
        py::arg("fine_fov"), py::arg("fine_rows"), py::arg("fine_cols"),
        "map a fine-grid FoV set onto the half-resolution grid");

    m.def(
        "instantaneous_rate_bps",
        [](const std::vector<double>& channel_power_gains,
           const std::vector<double>& beam_amplitudes, double bandwidth_hz, double tx_power_w,
           double noise_psd_w_per_hz) {
            vrstream::radio_config cfg;
            cfg.bandwidth_hz = bandwidth_hz;
            cfg.tx_power_w = tx_power_w;
            cfg.noise_psd_w_per_hz = noise_psd_w_per_hz;
            cfg.sbs_count = static_cast<int>(channel_power_gains.size());
            cfg.validate();
            vrstream::link_state link{channel_power_gains, beam_amplitudes};
            return vrstream::instantaneous_rate_bps(link, cfg);
        },
        py::arg("channel_power_gains"), py::arg("beam_amplitudes"), py::arg("bandwidth_hz"),
        py::arg("tx_power_w"), py::arg("noise_psd_w_per_hz"),
        "Shannon rate of a cooperative multi-transmitter link");

    m.def("average_rate_bps", &vrstream::average_rate_bps, py::arg("rate_bps"),
          py::arg("t_slots"), py::arg("coherence_slots"),
          "coherence-block average when holding t of T_B slots");

    m.def("dbm_to_watts", &vrstream::dbm_to_watts, py::arg("dbm"));
}
