#pragma once

#include <vector>

#include "vrstream/rng.hpp"

namespace vrstream {

double dbm_to_watts(double dbm);

// Radio-layer constants, all linear units.
struct radio_config {
    double bandwidth_hz = 1e9;            // B
    double tx_power_w = 31.6227766016838; // P (45 dBm)
    double noise_psd_w_per_hz = 1e-9;     // N0
    double pathloss_exp = 2.0;            // alpha
    double pathloss_ref_gain = 1.0;       // multiplies d^-alpha
    double beam_gain = 10.0;              // f, amplitude factor inside |hf|^2
    int sbs_count = 1;

    void validate() const; // throws std::invalid_argument
};

// One user's link to every cooperating SBS.
struct link_state {
    std::vector<double> channel_power_gain; // |h|^2 per SBS
    std::vector<double> beam_amplitude;     // f per SBS
};

// |h|^2 = ref_gain * d^-alpha * Exp(1); the exponential is the Rayleigh
// power fade with unit mean.
double sample_channel_gain(rng& gen, double distance_m, const radio_config& cfg);

// r = B log2(1 + P * sum_n |h_n|^2 f_n^2 / (N0 B)); constant within one
// beam-coherence block.
double instantaneous_rate_bps(const link_state& link, const radio_config& cfg);

// Average over a coherence block when the user holds t of T_B slots.
double average_rate_bps(double rate_bps, int t_slots, int coherence_slots);

} // namespace vrstream
