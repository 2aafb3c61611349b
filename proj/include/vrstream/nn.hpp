#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vrstream/rng.hpp"

namespace vrstream {

// Normalized observation fed to both networks: the per-level tile sizes go
// through the 1D convolution, the three scalars join at the hidden layer.
struct features {
    std::vector<double> zeta; // length = ladder levels, values in [0,1]
    double g = 0.0;           // remaining budget, normalized
    double pr = 0.0;          // FoV probability
    double f = 0.0;           // playing-chunk indicator
};

// Fixed two-layer topology: 1D conv (linear) over zeta, concat with the
// scalars, dense ReLU hidden layer, linear head. The ladder size drives the
// kernel (min(4, A)) and the actor's output width.
struct net_config {
    int ladder_levels = 5; // A
    int conv_filters = 128;
    int hidden_units = 128;
    int outputs = 5; // A for the actor, 1 for the critic

    int kernel() const { return ladder_levels < 4 ? ladder_levels : 4; }
    int conv_out_len() const { return ladder_levels - kernel() + 1; }
    int concat_dim() const { return conv_filters * conv_out_len() + 3; }
    std::size_t param_count() const;
    std::uint64_t architecture_hash() const;
    void validate() const;
};

class network {
public:
    explicit network(net_config cfg);

    const net_config& config() const { return cfg_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // weights uniform in +-1/sqrt(fan_in) per layer, biases zero
    void init_uniform(rng& gen);

    struct activations {
        std::vector<double> concat;     // conv outputs + scalars
        std::vector<double> hidden_pre; // before ReLU
        std::vector<double> hidden;
        std::vector<double> out;
    };

    void forward(const features& in, activations& act) const;
    std::vector<double> forward(const features& in) const;

    // accumulates dL/dparams into grad (+=) given dL/dout
    void backward(const features& in, const activations& act,
                  const std::vector<double>& dout, std::vector<double>& grad) const;

    // smallest |hidden pre-activation|; finite-difference checks resample
    // when this sits on a ReLU kink
    double min_abs_hidden_preactivation(const features& in) const;

private:
    net_config cfg_;
    std::vector<double> params_;
    // flat layout offsets
    std::size_t conv_w_, conv_b_, fc_w_, fc_b_, head_w_, head_b_;
};

std::vector<double> softmax(const std::vector<double>& logits);
std::vector<double> log_softmax(const std::vector<double>& logits);

std::vector<double> forward_policy(const network& actor, const features& in);
double forward_value(const network& critic, const features& in);

// d log pi(a | in) / d theta, accumulated into grad (+=)
void grad_log_policy(const network& actor, const features& in, int action,
                     std::vector<double>& grad);
// d V(in) / d theta_v, accumulated into grad (+=)
void grad_value(const network& critic, const features& in, std::vector<double>& grad);

// p +- lr * g elementwise; throws numeric_error on non-finite gradients
void apply_update(std::vector<double>& params, const std::vector<double>& grad,
                  double learning_rate, bool ascent);

// binary checkpoint, bit-exact round trip ("VRNC" magic + version + dims)
void save_network(const std::string& path, const network& net);
network load_network(const std::string& path);

} // namespace vrstream
