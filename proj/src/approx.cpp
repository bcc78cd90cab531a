#include "pcr/approx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include "pcr/kernels/kernels.hpp"

namespace pcr {

// ------------------------------------------------------------- parameters

bool operator==(const Tensor& a, const Tensor& b) {
    return a.name == b.name && a.shape == b.shape && a.data.size() == b.data.size() &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

Tensor& ParameterBlock::add(const std::string& name, std::vector<std::size_t> shape, double fill) {
    if (has(name)) {
        throw Error("ParameterBlock: duplicate tensor '" + name + "'");
    }
    const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    tensors_.push_back(Tensor{name, std::move(shape), std::vector<double>(n, fill)});
    return tensors_.back();
}

Tensor& ParameterBlock::get(const std::string& name) {
    for (Tensor& t : tensors_) {
        if (t.name == name) return t;
    }
    throw Error("ParameterBlock: no tensor '" + name + "'");
}

const Tensor& ParameterBlock::get(const std::string& name) const {
    return const_cast<ParameterBlock*>(this)->get(name);
}

bool ParameterBlock::has(const std::string& name) const {
    return std::any_of(tensors_.begin(), tensors_.end(), [&](const Tensor& t) { return t.name == name; });
}

std::size_t ParameterBlock::total_size() const {
    std::size_t n = 0;
    for (const Tensor& t : tensors_) n += t.size();
    return n;
}

ParameterBlock ParameterBlock::zeros_like() const {
    ParameterBlock out;
    for (const Tensor& t : tensors_) out.add(t.name, t.shape, 0.0);
    return out;
}

void ParameterBlock::set_zero() {
    for (Tensor& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

void ParameterBlock::check_compatible(const ParameterBlock& other) const {
    if (tensors_.size() != other.tensors_.size()) {
        throw Error("ParameterBlock: tensor count mismatch");
    }
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        if (tensors_[i].name != other.tensors_[i].name || tensors_[i].shape != other.tensors_[i].shape) {
            throw Error("ParameterBlock: shape mismatch at '" + tensors_[i].name + "'");
        }
    }
}

bool ParameterBlock::operator==(const ParameterBlock& other) const { return tensors_ == other.tensors_; }

std::vector<double> Network::forward(std::span<const double> input) const {
    ActivationCache cache;
    return forward(input, cache);
}

namespace {

void check_size(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw Error(std::string(what) + ": expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
    }
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void fill_uniform(Tensor& t, double bound, Rng& rng) {
    for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * bound;
}

}  // namespace

// -------------------------------------------------------------- w-network

WNetwork::WNetwork(WNetworkSpec spec) : spec_(spec) {
    if (spec_.size == 0 || spec_.hidden_channels == 0) {
        throw Error("WNetwork: size and hidden_channels must be positive");
    }
    const std::size_t h = spec_.size, c = spec_.hidden_channels;
    params_.add("conv1.weight", {c, 2, 3, 3});
    params_.add("conv1.bias", {c});
    params_.add("conv2.weight", {c});
    params_.add("conv2.bias", {1});
    params_.add("table", {h, h});
}

void WNetwork::init_random(Rng& rng) {
    fill_uniform(params_.get("conv1.weight"), 1.0 / std::sqrt(18.0), rng);
    fill_uniform(params_.get("conv1.bias"), 1.0 / std::sqrt(18.0), rng);
    fill_uniform(params_.get("conv2.weight"), 1.0 / std::sqrt(static_cast<double>(spec_.hidden_channels)), rng);
    params_.get("conv2.bias").data[0] = 0.0;
    auto& table = params_.get("table").data;
    std::fill(table.begin(), table.end(), 0.0);
}

std::vector<double> WNetwork::forward(std::span<const double> input, ActivationCache& cache) const {
    check_size(input, input_size(), "WNetwork::forward");
    const std::size_t h = spec_.size, nc = spec_.hidden_channels, cells = h * h;
    const double* w1 = params_.get("conv1.weight").data.data();
    const double* b1 = params_.get("conv1.bias").data.data();
    const double* w2 = params_.get("conv2.weight").data.data();
    const double b2 = params_.get("conv2.bias").data[0];
    const double* table = params_.get("table").data.data();

    cache.values.assign(4, {});
    cache.values[0].assign(input.begin(), input.end());
    std::vector<double>& pre = cache.values[1];
    pre.assign(nc * cells, 0.0);
    const long hh = static_cast<long>(h);
    for (std::size_t c = 0; c < nc; ++c) {
        for (long i = 0; i < hh; ++i) {
            for (long j = 0; j < hh; ++j) {
                double acc = b1[c];
                for (std::size_t ci = 0; ci < 2; ++ci) {
                    for (long di = 0; di < 3; ++di) {
                        const long r = i + di - 1;
                        if (r < 0 || r >= hh) continue;
                        for (long dj = 0; dj < 3; ++dj) {
                            const long q = j + dj - 1;
                            if (q < 0 || q >= hh) continue;
                            acc += w1[((c * 2 + ci) * 3 + di) * 3 + dj] * input[ci * cells + r * h + q];
                        }
                    }
                }
                pre[c * cells + i * h + j] = acc;
            }
        }
    }
    std::vector<double>& z = cache.values[2];
    z.assign(cells, 0.0);
    for (std::size_t k = 0; k < cells; ++k) {
        double o = b2;
        for (std::size_t c = 0; c < nc; ++c) o += w2[c] * std::max(0.0, pre[c * cells + k]);
        z[k] = spec_.output_scale * o + table[k];
    }
    std::vector<double> out(cells);
    for (std::size_t k = 0; k < cells; ++k) out[k] = spec_.squash ? sigmoid(z[k]) : z[k];
    cache.values[3] = out;
    return out;
}

void WNetwork::backward(const ActivationCache& cache, std::span<const double> grad_out,
                        ParameterBlock& grads) const {
    check_size(grad_out, output_size(), "WNetwork::backward");
    const std::size_t h = spec_.size, nc = spec_.hidden_channels, cells = h * h;
    const std::vector<double>& in = cache.values.at(0);
    const std::vector<double>& pre = cache.values.at(1);
    const std::vector<double>& out = cache.values.at(3);
    const double* w2 = params_.get("conv2.weight").data.data();
    double* gw1 = grads.get("conv1.weight").data.data();
    double* gb1 = grads.get("conv1.bias").data.data();
    double* gw2 = grads.get("conv2.weight").data.data();
    double& gb2 = grads.get("conv2.bias").data[0];
    double* gtable = grads.get("table").data.data();

    std::vector<double> dz(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        dz[k] = spec_.squash ? grad_out[k] * out[k] * (1.0 - out[k]) : grad_out[k];
        gtable[k] += dz[k];
    }
    std::vector<double> dpre(nc * cells, 0.0);
    for (std::size_t k = 0; k < cells; ++k) {
        const double d_o = spec_.output_scale * dz[k];
        gb2 += d_o;
        for (std::size_t c = 0; c < nc; ++c) {
            const double a = pre[c * cells + k];
            if (a > 0.0) {
                gw2[c] += d_o * a;
                dpre[c * cells + k] = d_o * w2[c];
            }
        }
    }
    const long hh = static_cast<long>(h);
    for (std::size_t c = 0; c < nc; ++c) {
        for (long i = 0; i < hh; ++i) {
            for (long j = 0; j < hh; ++j) {
                const double d = dpre[c * cells + i * h + j];
                if (d == 0.0) continue;
                gb1[c] += d;
                for (std::size_t ci = 0; ci < 2; ++ci) {
                    for (long di = 0; di < 3; ++di) {
                        const long r = i + di - 1;
                        if (r < 0 || r >= hh) continue;
                        for (long dj = 0; dj < 3; ++dj) {
                            const long q = j + dj - 1;
                            if (q < 0 || q >= hh) continue;
                            gw1[((c * 2 + ci) * 3 + di) * 3 + dj] += d * in[ci * cells + r * h + q];
                        }
                    }
                }
            }
        }
    }
}

// ------------------------------------------------------------ baseline net

BaselineNet::BaselineNet(BaselineNetSpec spec) : spec_(spec), cells_(spec.size * spec.size) {
    if (spec_.size == 0) {
        throw Error("BaselineNet: size must be positive");
    }
    const std::size_t in = 2 * cells_, hid = 4 * cells_;
    params_.add("fc1.weight", {hid, in});
    params_.add("fc1.bias", {hid});
    params_.add("fc2.weight", {hid, hid});
    params_.add("fc2.bias", {hid});
    params_.add("fc3.weight", {cells_, hid});
    params_.add("fc3.bias", {cells_});
}

void BaselineNet::init_random(Rng& rng) {
    const double in = static_cast<double>(2 * cells_), hid = static_cast<double>(4 * cells_);
    fill_uniform(params_.get("fc1.weight"), 1.0 / std::sqrt(in), rng);
    fill_uniform(params_.get("fc1.bias"), 1.0 / std::sqrt(in), rng);
    fill_uniform(params_.get("fc2.weight"), 1.0 / std::sqrt(hid), rng);
    fill_uniform(params_.get("fc2.bias"), 1.0 / std::sqrt(hid), rng);
    fill_uniform(params_.get("fc3.weight"), 0.1 / std::sqrt(hid), rng);
    params_.get("fc3.bias").data.assign(cells_, 0.0);
}

std::vector<double> BaselineNet::forward(std::span<const double> input, ActivationCache& cache) const {
    check_size(input, input_size(), "BaselineNet::forward");
    const std::size_t in = 2 * cells_, hid = 4 * cells_;
    cache.values.assign(4, {});
    cache.values[0].assign(input.begin(), input.end());
    std::vector<double>& h1 = cache.values[1];
    std::vector<double>& h2 = cache.values[2];
    h1.resize(hid);
    h2.resize(hid);
    kernels::matvec(params_.get("fc1.weight").data.data(), input.data(), params_.get("fc1.bias").data.data(),
                    h1.data(), hid, in);
    for (double& v : h1) v = std::max(0.0, v);
    kernels::matvec(params_.get("fc2.weight").data.data(), h1.data(), params_.get("fc2.bias").data.data(), h2.data(),
                    hid, hid);
    for (double& v : h2) v = std::max(0.0, v);
    std::vector<double> out(cells_);
    kernels::matvec(params_.get("fc3.weight").data.data(), h2.data(), params_.get("fc3.bias").data.data(), out.data(),
                    cells_, hid);
    cache.values[3] = out;
    return out;
}

void BaselineNet::backward(const ActivationCache& cache, std::span<const double> grad_out,
                           ParameterBlock& grads) const {
    check_size(grad_out, output_size(), "BaselineNet::backward");
    const std::size_t in = 2 * cells_, hid = 4 * cells_;
    const std::vector<double>& x = cache.values.at(0);
    const std::vector<double>& h1 = cache.values.at(1);
    const std::vector<double>& h2 = cache.values.at(2);

    kernels::outer_add(grad_out.data(), h2.data(), grads.get("fc3.weight").data.data(), cells_, hid);
    kernels::axpy(1.0, grad_out.data(), grads.get("fc3.bias").data.data(), cells_);
    std::vector<double> d2(hid, 0.0);
    kernels::matvec_transpose_add(params_.get("fc3.weight").data.data(), grad_out.data(), d2.data(), cells_, hid);
    for (std::size_t i = 0; i < hid; ++i) {
        if (h2[i] <= 0.0) d2[i] = 0.0;
    }
    kernels::outer_add(d2.data(), h1.data(), grads.get("fc2.weight").data.data(), hid, hid);
    kernels::axpy(1.0, d2.data(), grads.get("fc2.bias").data.data(), hid);
    std::vector<double> d1(hid, 0.0);
    kernels::matvec_transpose_add(params_.get("fc2.weight").data.data(), d2.data(), d1.data(), hid, hid);
    for (std::size_t i = 0; i < hid; ++i) {
        if (h1[i] <= 0.0) d1[i] = 0.0;
    }
    kernels::outer_add(d1.data(), x.data(), grads.get("fc1.weight").data.data(), hid, in);
    kernels::axpy(1.0, d1.data(), grads.get("fc1.bias").data.data(), hid);
}

// -------------------------------------------------------------- optimizers

void sgd_step(ParameterBlock& params, const ParameterBlock& grads, double rate) {
    params.check_compatible(grads);
    for (std::size_t i = 0; i < params.tensors().size(); ++i) {
        Tensor& p = params.tensors()[i];
        const Tensor& g = grads.tensors()[i];
        for (std::size_t k = 0; k < p.size(); ++k) p.data[k] -= rate * g.data[k];
    }
}

AdamState adam_init(const ParameterBlock& params) { return AdamState{params.zeros_like(), params.zeros_like(), 0}; }

void adam_step(ParameterBlock& params, const ParameterBlock& grads, AdamState& state, const AdamHyper& hyper) {
    params.check_compatible(grads);
    params.check_compatible(state.m);
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t i = 0; i < params.tensors().size(); ++i) {
        Tensor& p = params.tensors()[i];
        const Tensor& g = grads.tensors()[i];
        Tensor& m = state.m.tensors()[i];
        Tensor& v = state.v.tensors()[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            m.data[k] = hyper.beta1 * m.data[k] + (1.0 - hyper.beta1) * g.data[k];
            v.data[k] = hyper.beta2 * v.data[k] + (1.0 - hyper.beta2) * g.data[k] * g.data[k];
            const double mh = m.data[k] / c1;
            const double vh = v.data[k] / c2;
            p.data[k] -= hyper.rate * mh / (std::sqrt(vh) + hyper.eps);
        }
    }
}

// ---------------------------------------------------------------- TD loss

TdMode parse_td_mode(const std::string& s) {
    if (s == "semi-gradient") return TdMode::SemiGradient;
    if (s == "residual") return TdMode::Residual;
    throw Error("unknown TD mode '" + s + "' (expected semi-gradient or residual)");
}

TdLoss td_loss_and_grad(const Network& net, double lambda, double gamma, std::span<const double> input_now,
                        const ValueHead& head_now, std::span<const double> input_next, const ValueHead& head_next,
                        TdMode mode, ParameterBlock& grads) {
    if (head_now.index >= net.output_size() || head_next.index >= net.output_size()) {
        throw Error("td_loss_and_grad: head index out of range");
    }
    ActivationCache c_now, c_next;
    const std::vector<double> out_now = net.forward(input_now, c_now);
    const std::vector<double> out_next = net.forward(input_next, c_next);
    const double v_now = head_now.offset + head_now.scale * out_now[head_now.index];
    const double v_next = head_next.offset + head_next.scale * out_next[head_next.index];
    TdLoss res;
    res.delta = lambda + gamma * v_next - v_now;
    res.loss = res.delta * res.delta;
    if (head_now.scale != 0.0) {
        std::vector<double> g(net.output_size(), 0.0);
        g[head_now.index] = -2.0 * res.delta * head_now.scale;
        net.backward(c_now, g, grads);
    }
    if (mode == TdMode::Residual && head_next.scale != 0.0) {
        std::vector<double> g(net.output_size(), 0.0);
        g[head_next.index] = 2.0 * res.delta * gamma * head_next.scale;
        net.backward(c_next, g, grads);
    }
    return res;
}

GradCheckResult gradient_check(Network& net, std::span<const double> input, std::span<const double> coeffs,
                               double step) {
    check_size(coeffs, net.output_size(), "gradient_check");
    auto loss = [&]() {
        const std::vector<double> out = net.forward(input);
        double l = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) l += coeffs[i] * out[i];
        return l;
    };
    ParameterBlock grads = net.params().zeros_like();
    ActivationCache cache;
    net.forward(input, cache);
    net.backward(cache, coeffs, grads);

    GradCheckResult res;
    double gmax = 0.0, dmax = 0.0;
    for (std::size_t ti = 0; ti < net.params().tensors().size(); ++ti) {
        Tensor& p = net.params().tensors()[ti];
        const Tensor& g = grads.tensors()[ti];
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double saved = p.data[k];
            p.data[k] = saved + step;
            const double up = loss();
            p.data[k] = saved - step;
            const double down = loss();
            p.data[k] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double scale = std::max({std::abs(fd), std::abs(g.data[k]), 1e-6});
            const double rel = std::abs(fd - g.data[k]) / scale;
            ++res.checked;
            gmax = std::max(gmax, std::abs(g.data[k]));
            dmax = std::max(dmax, std::abs(fd - g.data[k]));
            if (rel > res.max_rel_error) {
                res.max_rel_error = rel;
                res.worst = p.name + "[" + std::to_string(k) + "]";
            }
        }
    }
    res.max_normwise_error = gmax > 0.0 ? dmax / gmax : dmax;
    return res;
}

// ------------------------------------------------------------ checkpoints

namespace {

constexpr char kMagic[8] = {'P', 'C', 'R', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ofstream& os, const std::string& s) {
    put<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error("checkpoint: truncated file");
    return v;
}

std::string get_string(std::ifstream& is) {
    const auto n = get<std::uint64_t>(is);
    if (n > (1u << 20)) throw Error("checkpoint: implausible string length");
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw Error("checkpoint: truncated file");
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, sizeof(kMagic));
    put<std::uint64_t>(os, ckpt.meta.size());
    for (const auto& [k, v] : ckpt.meta) {
        put_string(os, k);
        put_string(os, v);
    }
    put<std::uint64_t>(os, ckpt.params.tensors().size());
    for (const Tensor& t : ckpt.params.tensors()) {
        put_string(os, t.name);
        put<std::uint64_t>(os, t.shape.size());
        for (std::size_t d : t.shape) put<std::uint64_t>(os, d);
        put<std::uint64_t>(os, t.data.size());
        os.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    if (!os) throw Error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw Error("checkpoint: bad magic in '" + path + "'");
    }
    Checkpoint ckpt;
    const auto nmeta = get<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < nmeta; ++i) {
        std::string k = get_string(is);
        ckpt.meta[k] = get_string(is);
    }
    const auto ntensors = get<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < ntensors; ++i) {
        const std::string name = get_string(is);
        const auto ndim = get<std::uint64_t>(is);
        std::vector<std::size_t> shape;
        for (std::uint64_t d = 0; d < ndim; ++d) shape.push_back(get<std::uint64_t>(is));
        Tensor& t = ckpt.params.add(name, shape);
        const auto n = get<std::uint64_t>(is);
        if (n != t.size()) throw Error("checkpoint: tensor '" + name + "' size does not match its shape");
        is.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!is) throw Error("checkpoint: truncated file");
    }
    return ckpt;
}

}  // namespace pcr
