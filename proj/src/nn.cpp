#include "vrstream/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "vrstream/error.hpp"

namespace vrstream {

void net_config::validate() const {
    if (ladder_levels < 1) throw std::invalid_argument("net needs at least one ladder level");
    if (conv_filters < 1 || hidden_units < 1 || outputs < 1)
        throw std::invalid_argument("net layer sizes must be positive");
}

std::size_t net_config::param_count() const {
    std::size_t n = 0;
    n += static_cast<std::size_t>(conv_filters) * kernel() + conv_filters; // conv w + b
    n += static_cast<std::size_t>(hidden_units) * concat_dim() + hidden_units;
    n += static_cast<std::size_t>(outputs) * hidden_units + outputs;
    return n;
}

std::uint64_t net_config::architecture_hash() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "A=%d;F=%d;k=%d;H=%d;O=%d", ladder_levels, conv_filters,
                  kernel(), hidden_units, outputs);
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 0x00000100000001B3ull;
    }
    return h;
}

network::network(net_config cfg) : cfg_(cfg) {
    cfg_.validate();
    conv_w_ = 0;
    conv_b_ = conv_w_ + static_cast<std::size_t>(cfg_.conv_filters) * cfg_.kernel();
    fc_w_ = conv_b_ + cfg_.conv_filters;
    fc_b_ = fc_w_ + static_cast<std::size_t>(cfg_.hidden_units) * cfg_.concat_dim();
    head_w_ = fc_b_ + cfg_.hidden_units;
    head_b_ = head_w_ + static_cast<std::size_t>(cfg_.outputs) * cfg_.hidden_units;
    params_.assign(cfg_.param_count(), 0.0);
}

void network::init_uniform(rng& gen) {
    auto fill = [&gen, this](std::size_t off, std::size_t count, double fan_in) {
        double bound = 1.0 / std::sqrt(fan_in);
        for (std::size_t i = 0; i < count; ++i) params_[off + i] = gen.uniform(-bound, bound);
    };
    fill(conv_w_, static_cast<std::size_t>(cfg_.conv_filters) * cfg_.kernel(), cfg_.kernel());
    fill(fc_w_, static_cast<std::size_t>(cfg_.hidden_units) * cfg_.concat_dim(), cfg_.concat_dim());
    fill(head_w_, static_cast<std::size_t>(cfg_.outputs) * cfg_.hidden_units, cfg_.hidden_units);
    // biases stay zero
}

void network::forward(const features& in, activations& act) const {
    if (static_cast<int>(in.zeta.size()) != cfg_.ladder_levels)
        throw shape_error("feature size vector does not match ladder levels");
    const int k = cfg_.kernel();
    const int lc = cfg_.conv_out_len();
    const int d = cfg_.concat_dim();

    act.concat.assign(static_cast<std::size_t>(d), 0.0);
    for (int f = 0; f < cfg_.conv_filters; ++f) {
        const double* w = &params_[conv_w_ + static_cast<std::size_t>(f) * k];
        double b = params_[conv_b_ + static_cast<std::size_t>(f)];
        for (int p = 0; p < lc; ++p) {
            double s = b;
            for (int i = 0; i < k; ++i) s += w[i] * in.zeta[static_cast<std::size_t>(p + i)];
            act.concat[static_cast<std::size_t>(f * lc + p)] = s;
        }
    }
    act.concat[static_cast<std::size_t>(d - 3)] = in.g;
    act.concat[static_cast<std::size_t>(d - 2)] = in.pr;
    act.concat[static_cast<std::size_t>(d - 1)] = in.f;

    act.hidden_pre.assign(static_cast<std::size_t>(cfg_.hidden_units), 0.0);
    act.hidden.assign(static_cast<std::size_t>(cfg_.hidden_units), 0.0);
    for (int h = 0; h < cfg_.hidden_units; ++h) {
        const double* w = &params_[fc_w_ + static_cast<std::size_t>(h) * d];
        double s = params_[fc_b_ + static_cast<std::size_t>(h)];
        for (int i = 0; i < d; ++i) s += w[i] * act.concat[static_cast<std::size_t>(i)];
        act.hidden_pre[static_cast<std::size_t>(h)] = s;
        act.hidden[static_cast<std::size_t>(h)] = s > 0.0 ? s : 0.0;
    }

    act.out.assign(static_cast<std::size_t>(cfg_.outputs), 0.0);
    for (int o = 0; o < cfg_.outputs; ++o) {
        const double* w = &params_[head_w_ + static_cast<std::size_t>(o) * cfg_.hidden_units];
        double s = params_[head_b_ + static_cast<std::size_t>(o)];
        for (int h = 0; h < cfg_.hidden_units; ++h)
            s += w[h] * act.hidden[static_cast<std::size_t>(h)];
        act.out[static_cast<std::size_t>(o)] = s;
    }
}

std::vector<double> network::forward(const features& in) const {
    activations act;
    forward(in, act);
    return act.out;
}

void network::backward(const features& in, const activations& act,
                       const std::vector<double>& dout, std::vector<double>& grad) const {
    if (dout.size() != act.out.size()) throw shape_error("dout size mismatch");
    if (grad.size() != params_.size()) throw shape_error("gradient buffer size mismatch");
    const int k = cfg_.kernel();
    const int lc = cfg_.conv_out_len();
    const int d = cfg_.concat_dim();

    std::vector<double> dhidden(static_cast<std::size_t>(cfg_.hidden_units), 0.0);
    for (int o = 0; o < cfg_.outputs; ++o) {
        double g = dout[static_cast<std::size_t>(o)];
        const double* w = &params_[head_w_ + static_cast<std::size_t>(o) * cfg_.hidden_units];
        double* gw = &grad[head_w_ + static_cast<std::size_t>(o) * cfg_.hidden_units];
        for (int h = 0; h < cfg_.hidden_units; ++h) {
            gw[h] += g * act.hidden[static_cast<std::size_t>(h)];
            dhidden[static_cast<std::size_t>(h)] += g * w[h];
        }
        grad[head_b_ + static_cast<std::size_t>(o)] += g;
    }

    std::vector<double> dconcat(static_cast<std::size_t>(d), 0.0);
    for (int h = 0; h < cfg_.hidden_units; ++h) {
        if (!(act.hidden_pre[static_cast<std::size_t>(h)] > 0.0)) continue;
        double g = dhidden[static_cast<std::size_t>(h)];
        if (g == 0.0) continue;
        const double* w = &params_[fc_w_ + static_cast<std::size_t>(h) * d];
        double* gw = &grad[fc_w_ + static_cast<std::size_t>(h) * d];
        for (int i = 0; i < d; ++i) {
            gw[i] += g * act.concat[static_cast<std::size_t>(i)];
            dconcat[static_cast<std::size_t>(i)] += g * w[i];
        }
        grad[fc_b_ + static_cast<std::size_t>(h)] += g;
    }

    for (int f = 0; f < cfg_.conv_filters; ++f) {
        double* gw = &grad[conv_w_ + static_cast<std::size_t>(f) * k];
        double gb = 0.0;
        for (int p = 0; p < lc; ++p) {
            double g = dconcat[static_cast<std::size_t>(f * lc + p)];
            if (g == 0.0) continue;
            for (int i = 0; i < k; ++i) gw[i] += g * in.zeta[static_cast<std::size_t>(p + i)];
            gb += g;
        }
        grad[conv_b_ + static_cast<std::size_t>(f)] += gb;
    }
}

double network::min_abs_hidden_preactivation(const features& in) const {
    activations act;
    forward(in, act);
    double m = std::numeric_limits<double>::infinity();
    for (double p : act.hidden_pre) m = std::min(m, std::fabs(p));
    return m;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw shape_error("softmax over empty vector");
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - mx);
        z += probs[i];
    }
    for (double& p : probs) p /= z;
    return probs;
}

std::vector<double> log_softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw shape_error("log_softmax over empty vector");
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    double lse = mx + std::log(z);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

std::vector<double> forward_policy(const network& actor, const features& in) {
    return softmax(actor.forward(in));
}

double forward_value(const network& critic, const features& in) {
    if (critic.config().outputs != 1) throw shape_error("critic must have one output");
    return critic.forward(in)[0];
}

void grad_log_policy(const network& actor, const features& in, int action,
                     std::vector<double>& grad) {
    if (action < 0 || action >= actor.config().outputs)
        throw std::invalid_argument("action index out of range");
    network::activations act;
    actor.forward(in, act);
    std::vector<double> probs = softmax(act.out);
    std::vector<double> dout(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        dout[i] = (static_cast<int>(i) == action ? 1.0 : 0.0) - probs[i];
    actor.backward(in, act, dout, grad);
}

void grad_value(const network& critic, const features& in, std::vector<double>& grad) {
    if (critic.config().outputs != 1) throw shape_error("critic must have one output");
    network::activations act;
    critic.forward(in, act);
    std::vector<double> dout{1.0};
    critic.backward(in, act, dout, grad);
}

void apply_update(std::vector<double>& params, const std::vector<double>& grad,
                  double learning_rate, bool ascent) {
    if (params.size() != grad.size()) throw shape_error("update size mismatch");
    for (double g : grad)
        if (!std::isfinite(g)) throw numeric_error("non-finite gradient");
    double step = ascent ? learning_rate : -learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += step * grad[i];
}

namespace {

constexpr char kMagic[4] = {'V', 'R', 'N', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
}

} // namespace

void save_network(const std::string& path, const network& net) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    const net_config& c = net.config();
    write_pod(out, static_cast<std::int32_t>(c.ladder_levels));
    write_pod(out, static_cast<std::int32_t>(c.conv_filters));
    write_pod(out, static_cast<std::int32_t>(c.hidden_units));
    write_pod(out, static_cast<std::int32_t>(c.outputs));
    write_pod(out, static_cast<std::uint64_t>(net.params().size()));
    out.write(reinterpret_cast<const char*>(net.params().data()),
              static_cast<std::streamsize>(net.params().size() * sizeof(double)));
    if (!out) throw io_error("short write on checkpoint: " + path);
}

network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw parse_error("bad checkpoint magic: " + path);
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != kVersion) throw parse_error("unsupported checkpoint version: " + path);
    std::int32_t a = 0, f = 0, h = 0, o = 0;
    read_pod(in, a);
    read_pod(in, f);
    read_pod(in, h);
    read_pod(in, o);
    net_config cfg;
    cfg.ladder_levels = a;
    cfg.conv_filters = f;
    cfg.hidden_units = h;
    cfg.outputs = o;
    network net(cfg);
    std::uint64_t count = 0;
    read_pod(in, count);
    if (count != net.params().size()) throw parse_error("checkpoint size mismatch: " + path);
    in.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw parse_error("truncated checkpoint: " + path);
    return net;
}

} // namespace vrstream
