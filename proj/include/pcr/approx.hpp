#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pcr/rng.hpp"
#include "pcr/types.hpp"

namespace pcr {

struct Tensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;

    std::size_t size() const { return data.size(); }
};

/// Named parameter arrays with fixed shapes.
class ParameterBlock {
public:
    Tensor& add(const std::string& name, std::vector<std::size_t> shape, double fill = 0.0);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const;

    std::vector<Tensor>& tensors() { return tensors_; }
    const std::vector<Tensor>& tensors() const { return tensors_; }
    std::size_t total_size() const;

    /// Same names and shapes, all zeros.
    ParameterBlock zeros_like() const;
    void set_zero();
    /// Throws unless names and shapes match exactly.
    void check_compatible(const ParameterBlock& other) const;

    bool operator==(const ParameterBlock&) const;

private:
    std::vector<Tensor> tensors_;
};

bool operator==(const Tensor& a, const Tensor& b);

/// Intermediate values of one forward pass.
struct ActivationCache {
    std::vector<std::vector<double>> values;
};

/// A deterministic differentiable map from a flat input to a flat output.
class Network {
public:
    virtual ~Network() = default;

    virtual std::size_t input_size() const = 0;
    virtual std::size_t output_size() const = 0;
    ParameterBlock& params() { return params_; }
    const ParameterBlock& params() const { return params_; }

    virtual std::vector<double> forward(std::span<const double> input, ActivationCache& cache) const = 0;
    std::vector<double> forward(std::span<const double> input) const;
    /// Accumulates dL/dparams into grads given dL/doutput.
    virtual void backward(const ActivationCache& cache, std::span<const double> grad_out,
                          ParameterBlock& grads) const = 0;

protected:
    ParameterBlock params_;
};

struct WNetworkSpec {
    std::size_t size = 3;  // grid side H
    std::size_t hidden_channels = 20;
    double output_scale = 0.01;
    bool squash = true;  // logistic squash to (0,1); off leaves the raw sum
};

/// conv3x3(2 -> C, zero padding) -> relu -> conv1x1(C -> 1) -> * scale + table -> sigmoid.
/// Input: channel-major [2][H][H] (alpha counts, then beta counts). Output: [H][H].
class WNetwork final : public Network {
public:
    explicit WNetwork(WNetworkSpec spec);

    const WNetworkSpec& spec() const { return spec_; }
    std::size_t input_size() const override { return 2 * spec_.size * spec_.size; }
    std::size_t output_size() const override { return spec_.size * spec_.size; }
    std::vector<double> forward(std::span<const double> input, ActivationCache& cache) const override;
    using Network::forward;
    void backward(const ActivationCache& cache, std::span<const double> grad_out,
                  ParameterBlock& grads) const override;

    void init_random(Rng& rng);

private:
    WNetworkSpec spec_;
};

struct BaselineNetSpec {
    std::size_t size = 3;
};

/// Fully connected 2H^2 -> 4H^2 -> 4H^2 -> H^2 with ReLU hidden units.
class BaselineNet final : public Network {
public:
    explicit BaselineNet(BaselineNetSpec spec);

    const BaselineNetSpec& spec() const { return spec_; }
    std::size_t input_size() const override { return 2 * cells_; }
    std::size_t output_size() const override { return cells_; }
    std::size_t hidden_size() const { return 4 * cells_; }
    std::vector<double> forward(std::span<const double> input, ActivationCache& cache) const override;
    using Network::forward;
    void backward(const ActivationCache& cache, std::span<const double> grad_out,
                  ParameterBlock& grads) const override;

    void init_random(Rng& rng);

private:
    BaselineNetSpec spec_;
    std::size_t cells_;
};

void sgd_step(ParameterBlock& params, const ParameterBlock& grads, double rate);

struct AdamHyper {
    double rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    ParameterBlock m;
    ParameterBlock v;
    std::size_t t = 0;
};

AdamState adam_init(const ParameterBlock& params);
void adam_step(ParameterBlock& params, const ParameterBlock& grads, AdamState& state, const AdamHyper& hyper);

enum class TdMode { SemiGradient, Residual };

TdMode parse_td_mode(const std::string& s);

/// Which output feeds a value and how: v = offset + scale * output[index].
struct ValueHead {
    std::size_t index = 0;
    double offset = 0.0;
    double scale = 1.0;
};

struct TdLoss {
    double loss = 0.0;
    double delta = 0.0;  // lambda + gamma v' - v
};

/// L = (lambda + gamma v(next) - v(now))^2. Semi-gradient mode treats v(next)
/// as a constant. Gradients are added to `grads`.
TdLoss td_loss_and_grad(const Network& net, double lambda, double gamma, std::span<const double> input_now,
                        const ValueHead& head_now, std::span<const double> input_next, const ValueHead& head_next,
                        TdMode mode, ParameterBlock& grads);

struct GradCheckResult {
    /// Coordinate-wise |fd - g| / max(|fd|, |g|, 1e-6).
    double max_rel_error = 0.0;
    /// max_k |fd_k - g_k| / max_k |g_k|: error relative to the gradient scale.
    double max_normwise_error = 0.0;
    std::size_t checked = 0;
    std::string worst;
};

/// Compares backward() against central differences of L = sum_i c_i out_i.
/// Coordinate-wise errors of entries far below the gradient scale are limited
/// by the rounding of L itself (about 1e-16 |L| / step), hence the normwise figure.
GradCheckResult gradient_check(Network& net, std::span<const double> input, std::span<const double> coeffs,
                               double step = 1e-5);

/// Self-describing binary container of named arrays plus string metadata.
struct Checkpoint {
    std::map<std::string, std::string> meta;
    ParameterBlock params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pcr
