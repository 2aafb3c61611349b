#include "vrstream/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace vrstream {

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

void radio_config::validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (!(tx_power_w > 0.0)) throw std::invalid_argument("tx power must be positive");
    if (!(noise_psd_w_per_hz > 0.0)) throw std::invalid_argument("noise PSD must be positive");
    if (!(pathloss_exp > 0.0)) throw std::invalid_argument("pathloss exponent must be positive");
    if (!(pathloss_ref_gain > 0.0)) throw std::invalid_argument("pathloss reference gain must be positive");
    if (!(beam_gain > 0.0)) throw std::invalid_argument("beam gain must be positive");
    if (sbs_count < 1) throw std::invalid_argument("need at least one SBS");
}

double sample_channel_gain(rng& gen, double distance_m, const radio_config& cfg) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
    return cfg.pathloss_ref_gain * std::pow(distance_m, -cfg.pathloss_exp) * gen.exponential1();
}

double instantaneous_rate_bps(const link_state& link, const radio_config& cfg) {
    if (link.channel_power_gain.empty())
        throw std::invalid_argument("link state needs at least one SBS entry");
    if (link.channel_power_gain.size() != link.beam_amplitude.size())
        throw std::invalid_argument("link state gain/beam size mismatch");
    double combined = 0.0;
    for (std::size_t n = 0; n < link.channel_power_gain.size(); ++n) {
        double f = link.beam_amplitude[n];
        combined += link.channel_power_gain[n] * f * f;
    }
    double snr = cfg.tx_power_w * combined / (cfg.noise_psd_w_per_hz * cfg.bandwidth_hz);
    return cfg.bandwidth_hz * std::log2(1.0 + snr);
}

double average_rate_bps(double rate_bps, int t_slots, int coherence_slots) {
    if (coherence_slots < 1) throw std::invalid_argument("coherence block must have slots");
    if (t_slots < 0 || t_slots > coherence_slots)
        throw std::invalid_argument("slot count must lie in [0, T_B]");
    return (static_cast<double>(t_slots) / static_cast<double>(coherence_slots)) * rate_bps;
}

} // namespace vrstream
