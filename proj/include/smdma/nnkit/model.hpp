#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smdma/core/error.hpp"
#include "smdma/core/rng.hpp"
#include "smdma/nnkit/tensor.hpp"

namespace smdma::nn {

enum class LayerKind : std::uint8_t { dense = 0, conv1d = 1, relu = 2 };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::relu: return "relu";
  }
  return "?";
}

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in = 0;       // dense: in_dim, conv1d: channels_in
  std::size_t out = 0;      // dense: out_dim, conv1d: channels_out
  std::size_t kernel = 1;   // conv1d only, odd

  static LayerSpec dense(std::size_t in_dim, std::size_t out_dim) { return {LayerKind::dense, in_dim, out_dim, 1}; }
  static LayerSpec conv1d(std::size_t channels_in, std::size_t channels_out, std::size_t kernel_size = 3) {
    return {LayerKind::conv1d, channels_in, channels_out, kernel_size};
  }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0, 1}; }

  std::size_t padding() const noexcept { return (kernel - 1) / 2; }
  std::size_t fan_in() const noexcept { return kind == LayerKind::conv1d ? in * kernel : in; }
  std::size_t fan_out() const noexcept { return kind == LayerKind::conv1d ? out * kernel : out; }
  double xavier_bound() const { return std::sqrt(6.0 / static_cast<double>(fan_in() + fan_out())); }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// A layer: its spec plus weights and biases. Dense weights are (out x in);
/// conv1d weights are (out x in*kernel) with kernel taps contiguous.
struct Layer {
  LayerSpec spec;
  Tensor weight;
  Tensor bias;
};

/// Activations recorded by a forward pass; consumed by backward.
struct Tape {
  const void* model = nullptr;
  std::uint64_t version = 0;
  std::vector<Tensor> inputs;  // inputs[i] is the input to layer i; back() is the model output
};

/// Gradients mirroring a model's parameter layout.
struct Gradients {
  std::vector<Tensor> weight;
  std::vector<Tensor> bias;
  Tensor input;

  void scale(double s) {
    for (auto* group : {&weight, &bias})
      for (auto& t : *group)
        for (auto& v : t) v *= s;
  }

  void accumulate(const Gradients& o, double s = 1.0) {
    for (std::size_t l = 0; l < weight.size(); ++l) {
      for (std::size_t i = 0; i < weight[l].size(); ++i) weight[l][i] += s * o.weight[l][i];
      for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += s * o.bias[l][i];
    }
  }

  std::vector<std::span<const double>> blocks() const {
    std::vector<std::span<const double>> out;
    for (std::size_t l = 0; l < weight.size(); ++l) {
      out.push_back(weight[l].span());
      out.push_back(bias[l].span());
    }
    return out;
  }
};

class Model {
 public:
  Model() = default;

  /// Xavier-uniform weights, zero biases.
  static Model build(std::span<const LayerSpec> specs, Rng& rng) {
    Model m;
    for (const auto& s : specs) {
      validate(s);
      Layer layer{s, {}, {}};
      if (s.kind == LayerKind::dense) {
        layer.weight = Tensor(s.out, s.in);
        layer.bias = Tensor(s.out);
      } else if (s.kind == LayerKind::conv1d) {
        layer.weight = Tensor(s.out, s.in * s.kernel);
        layer.bias = Tensor(s.out);
      }
      const double bound = s.kind == LayerKind::relu ? 0.0 : s.xavier_bound();
      for (auto& w : layer.weight) w = rng.uniform(-bound, bound);
      m.layers_.push_back(std::move(layer));
    }
    return m;
  }

  static Model build(std::initializer_list<LayerSpec> specs, Rng& rng) {
    return build(std::span<const LayerSpec>(specs.begin(), specs.size()), rng);
  }

  static void validate(const LayerSpec& s) {
    if (s.kind == LayerKind::relu) return;
    require(s.in > 0 && s.out > 0, ErrorKind::usage, std::string(to_string(s.kind)) + " layer needs nonzero dimensions");
    if (s.kind == LayerKind::conv1d)
      require(s.kernel % 2 == 1, ErrorKind::usage, "conv1d kernel size must be odd");
  }

  std::size_t size() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::uint64_t version() const noexcept { return version_; }

  /// Mutable access invalidates outstanding tapes.
  Layer& mutable_layer(std::size_t i) {
    ++version_;
    return layers_.at(i);
  }

  std::vector<std::span<double>> parameter_blocks() {
    ++version_;
    std::vector<std::span<double>> out;
    for (auto& l : layers_) {
      out.push_back(l.weight.span());
      out.push_back(l.bias.span());
    }
    return out;
  }

  std::vector<std::span<const double>> parameter_blocks() const {
    std::vector<std::span<const double>> out;
    for (const auto& l : layers_) {
      out.push_back(l.weight.span());
      out.push_back(l.bias.span());
    }
    return out;
  }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  Gradients zero_gradients() const {
    Gradients g;
    for (const auto& l : layers_) {
      g.weight.emplace_back(l.weight.rows(), l.weight.cols());
      g.bias.emplace_back(l.bias.size());
    }
    return g;
  }

  std::vector<LayerSpec> specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers_) out.push_back(l.spec);
    return out;
  }

  friend bool operator==(const Model& a, const Model& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      const auto& x = a.layers_[i];
      const auto& y = b.layers_[i];
      if (!(x.spec == y.spec) || !(x.weight == y.weight) || !(x.bias == y.bias)) return false;
    }
    return true;
  }

  void append(Layer layer) {
    validate(layer.spec);
    ++version_;
    layers_.push_back(std::move(layer));
  }

 private:
  std::vector<Layer> layers_;
  std::uint64_t version_ = 0;
};

namespace detail {

inline std::string mismatch(std::size_t index, const Layer& l, std::size_t expected, std::size_t actual) {
  return "layer " + std::to_string(index) + " (" + to_string(l.spec.kind) + ") expects input length " +
         std::to_string(expected) + ", got " + std::to_string(actual);
}

inline Tensor dense_forward(const Layer& l, const Tensor& x) {
  const std::size_t in = l.spec.in, out = l.spec.out;
  Tensor y(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double* w = l.weight.data() + o * in;
    double s = l.bias[o];
    for (std::size_t i = 0; i < in; ++i) s += w[i] * x[i];
    y[o] = s;
  }
  return y;
}

// Cross-correlation, stride 1, zero padding (k-1)/2. x is (cin x len) row-major.
inline Tensor conv_forward(const Layer& l, const Tensor& x) {
  const std::size_t cin = l.spec.in, cout = l.spec.out, k = l.spec.kernel, pad = l.spec.padding();
  const std::size_t len = x.size() / cin;
  Tensor y(cout * len);
  for (std::size_t co = 0; co < cout; ++co) {
    double* yr = y.data() + co * len;
    for (std::size_t t = 0; t < len; ++t) yr[t] = l.bias[co];
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* xr = x.data() + ci * len;
      const double* w = l.weight.data() + co * cin * k + ci * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double wj = w[j];
        // y[t] += wj * x[t + j - pad] for valid source indices
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(pad);
        const std::size_t t0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
        const std::size_t t1 = shift > 0 ? (len > static_cast<std::size_t>(shift) ? len - shift : 0) : len;
        for (std::size_t t = t0; t < t1; ++t) yr[t] += wj * xr[t + j - pad];
      }
    }
  }
  return y;
}

inline void check_input(std::size_t index, const Layer& l, const Tensor& x) {
  if (l.spec.kind == LayerKind::dense && x.size() != l.spec.in)
    throw ShapeError(index, l.spec.in, x.size(), mismatch(index, l, l.spec.in, x.size()));
  if (l.spec.kind == LayerKind::conv1d && (x.empty() || x.size() % l.spec.in != 0))
    throw ShapeError(index, l.spec.in, x.size(),
                     "layer " + std::to_string(index) + " (conv1d) expects a positive multiple of " +
                         std::to_string(l.spec.in) + " inputs, got " + std::to_string(x.size()));
}

inline Tensor layer_forward(std::size_t index, const Layer& l, const Tensor& x) {
  check_input(index, l, x);
  switch (l.spec.kind) {
    case LayerKind::dense: return dense_forward(l, x);
    case LayerKind::conv1d: return conv_forward(l, x);
    case LayerKind::relu: {
      Tensor y = x;
      for (auto& v : y) v = v > 0.0 ? v : 0.0;
      return y;
    }
  }
  return x;
}

}  // namespace detail

/// Inference-only forward pass. Safe to call concurrently on a shared model.
inline Tensor forward(const Model& model, const Tensor& input) {
  Tensor x = input;
  for (std::size_t i = 0; i < model.size(); ++i) x = detail::layer_forward(i, model.layer(i), x);
  return x;
}

/// Forward pass recording activations into `tape` for a later backward call.
inline Tensor forward(const Model& model, const Tensor& input, Tape& tape) {
  tape.model = &model;
  tape.version = model.version();
  tape.inputs.clear();
  tape.inputs.reserve(model.size() + 1);
  tape.inputs.push_back(input);
  for (std::size_t i = 0; i < model.size(); ++i)
    tape.inputs.push_back(detail::layer_forward(i, model.layer(i), tape.inputs.back()));
  return tape.inputs.back();
}

/// Backpropagate `output_grad` through the pass recorded in `tape`. Parameter
/// gradients are accumulated into `grads` (which must come from zero_gradients()).
inline Tensor backward(const Model& model, const Tape& tape, const Tensor& output_grad, Gradients& grads) {
  if (tape.model != &model || tape.version != model.version() || tape.inputs.size() != model.size() + 1)
    fail(ErrorKind::usage, "backward called without a matching forward pass");
  if (output_grad.size() != tape.inputs.back().size())
    throw ShapeError(model.size(), tape.inputs.back().size(), output_grad.size(), "output gradient length mismatch");

  Tensor g = output_grad;
  for (std::size_t idx = model.size(); idx-- > 0;) {
    const Layer& l = model.layer(idx);
    const Tensor& x = tape.inputs[idx];
    switch (l.spec.kind) {
      case LayerKind::relu: {
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(x[i] > 0.0)) g[i] = 0.0;
        break;
      }
      case LayerKind::dense: {
        const std::size_t in = l.spec.in, out = l.spec.out;
        Tensor& gw = grads.weight[idx];
        Tensor& gb = grads.bias[idx];
        Tensor gx(in);
        for (std::size_t o = 0; o < out; ++o) {
          const double go = g[o];
          gb[o] += go;
          if (go == 0.0) continue;
          double* gwr = gw.data() + o * in;
          const double* w = l.weight.data() + o * in;
          for (std::size_t i = 0; i < in; ++i) {
            gwr[i] += go * x[i];
            gx[i] += w[i] * go;
          }
        }
        g = std::move(gx);
        break;
      }
      case LayerKind::conv1d: {
        const std::size_t cin = l.spec.in, cout = l.spec.out, k = l.spec.kernel, pad = l.spec.padding();
        const std::size_t len = x.size() / cin;
        Tensor& gw = grads.weight[idx];
        Tensor& gb = grads.bias[idx];
        Tensor gx(x.size());
        for (std::size_t co = 0; co < cout; ++co) {
          const double* gr = g.data() + co * len;
          double sb = 0.0;
          for (std::size_t t = 0; t < len; ++t) sb += gr[t];
          gb[co] += sb;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const double* xr = x.data() + ci * len;
            double* gxr = gx.data() + ci * len;
            const double* w = l.weight.data() + co * cin * k + ci * k;
            double* gwr = gw.data() + co * cin * k + ci * k;
            for (std::size_t j = 0; j < k; ++j) {
              const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(pad);
              const std::size_t t0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
              const std::size_t t1 = shift > 0 ? (len > static_cast<std::size_t>(shift) ? len - shift : 0) : len;
              const double wj = w[j];
              double sw = 0.0;
              for (std::size_t t = t0; t < t1; ++t) {
                sw += gr[t] * xr[t + j - pad];
                gxr[t + j - pad] += wj * gr[t];
              }
              gwr[j] += sw;
            }
          }
        }
        g = std::move(gx);
        break;
      }
    }
  }
  grads.input = g;
  return g;
}

}  // namespace smdma::nn
