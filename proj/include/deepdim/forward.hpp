#pragma once

// Minimal inference engine for NetworkSpec: 3x3 conv + ReLU, 2x2 max-pool,
// dense (+ optional ReLU) and a softmax head. Weights and activations are
// 32-bit; dot products accumulate in 64-bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deepdim/activations.hpp"
#include "deepdim/error.hpp"
#include "deepdim/image.hpp"
#include "deepdim/network.hpp"
#include "deepdim/parallel.hpp"
#include "deepdim/random.hpp"

namespace deepdim {

/// Parameters of one layer. Conv kernels are [filter][in_channel][3][3];
/// dense matrices are [unit][input], inputs flattened channel-major (C, H, W).
struct LayerWeights {
  std::vector<float> kernel;
  std::vector<float> bias;
};

struct Weights {
  std::vector<LayerWeights> layers; ///< parallel to NetworkSpec::layers()
};

namespace detail {

inline std::size_t fan_in(const NetworkSpec& net, std::size_t i) {
  const TensorShape in = i == 0 ? net.input() : net.shape(i - 1);
  switch (net.layers()[i].kind) {
  case LayerKind::conv:
    return in.channels * 9;
  case LayerKind::dense:
    return in.size();
  default:
    return 0;
  }
}

inline std::size_t param_count(const NetworkSpec& net, std::size_t i) {
  const auto& l = net.layers()[i];
  if (l.kind == LayerKind::conv)
    return l.filters * fan_in(net, i);
  if (l.kind == LayerKind::dense)
    return l.units * fan_in(net, i);
  return 0;
}

inline std::size_t bias_count(const NetworkSpec& net, std::size_t i) {
  const auto& l = net.layers()[i];
  return l.kind == LayerKind::conv ? l.filters : l.kind == LayerKind::dense ? l.units : 0;
}

} // namespace detail

inline void validate_weights(const NetworkSpec& net, const Weights& w) {
  if (w.layers.size() != net.layers().size())
    throw InvalidInput("weights do not match network layer count");
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    if (w.layers[i].kernel.size() != detail::param_count(net, i) ||
        w.layers[i].bias.size() != detail::bias_count(net, i))
      throw InvalidInput("weights for layer '" + net.layers()[i].name + "' have the wrong shape");
    auto finite = [](float v) { return std::isfinite(v); };
    if (!std::all_of(w.layers[i].kernel.begin(), w.layers[i].kernel.end(), finite) ||
        !std::all_of(w.layers[i].bias.begin(), w.layers[i].bias.end(), finite))
      throw InvalidInput("weights for layer '" + net.layers()[i].name + "' are not finite");
  }
}

inline Weights zero_weights(const NetworkSpec& net) {
  Weights w;
  for (std::size_t i = 0; i < net.layers().size(); ++i)
    w.layers.push_back({std::vector<float>(detail::param_count(net, i), 0.0f),
                        std::vector<float>(detail::bias_count(net, i), 0.0f)});
  return w;
}

/// He-normal weights (std sqrt(2 / fan_in)) and zero biases, so ReLU stacks
/// keep their activation scale from layer to layer. Each layer draws from its
/// own sub-stream of `seed`.
inline Weights seeded_random_weights(const NetworkSpec& net, std::uint64_t seed) {
  Weights w = zero_weights(net);
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    auto& kernel = w.layers[i].kernel;
    if (kernel.empty())
      continue;
    Rng rng = substream(seed, i, /*domain=*/0x77656967);
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / static_cast<double>(detail::fan_in(net, i))));
    for (float& v : kernel)
      v = static_cast<float>(gauss(rng));
  }
  return w;
}

namespace detail {

/// Pre-activation 3x3 convolution, stride 1, zero padding 1. Tensors are
/// (C, H, W) row-major.
inline std::vector<float> conv3x3(std::span<const float> in, const TensorShape& shape,
                                  std::span<const float> kernel, std::span<const float> bias,
                                  std::size_t filters) {
  const std::size_t H = shape.height;
  const std::size_t W = shape.width;
  const std::size_t C = shape.channels;
  std::vector<float> out(filters * H * W);
  for (std::size_t f = 0; f < filters; ++f) {
    const float* kf = kernel.data() + f * C * 9;
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        double acc = bias[f];
        for (std::size_t c = 0; c < C; ++c) {
          const float* plane = in.data() + c * H * W;
          const float* k = kf + c * 9;
          for (std::size_t ky = 0; ky < 3; ++ky) {
            const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y + ky) - 1;
            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(H))
              continue;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x + kx) - 1;
              if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(W))
                continue;
              acc += static_cast<double>(k[ky * 3 + kx]) * plane[yy * W + xx];
            }
          }
        }
        out[(f * H + y) * W + x] = static_cast<float>(acc);
      }
  }
  return out;
}

inline std::vector<float> maxpool2x2(std::span<const float> in, const TensorShape& shape) {
  const std::size_t Ho = shape.height / 2;
  const std::size_t Wo = shape.width / 2;
  const std::size_t W = shape.width;
  std::vector<float> out(shape.channels * Ho * Wo);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    const float* plane = in.data() + c * shape.height * W;
    for (std::size_t y = 0; y < Ho; ++y)
      for (std::size_t x = 0; x < Wo; ++x) {
        const float* p = plane + 2 * y * W + 2 * x;
        out[(c * Ho + y) * Wo + x] = std::max({p[0], p[1], p[W], p[W + 1]});
      }
  }
  return out;
}

inline std::vector<float> dense(std::span<const float> in, std::span<const float> matrix,
                                std::span<const float> bias, std::size_t units) {
  const std::size_t n_in = in.size();
  std::vector<float> out(units);
  for (std::size_t u = 0; u < units; ++u) {
    const float* row = matrix.data() + u * n_in;
    double acc = bias[u];
    for (std::size_t i = 0; i < n_in; ++i)
      acc += static_cast<double>(row[i]) * in[i];
    out[u] = static_cast<float>(acc);
  }
  return out;
}

inline void relu(std::span<float> v) {
  for (float& x : v)
    x = std::max(x, 0.0f);
}

/// Max-shifted softmax, computed in double.
inline std::vector<double> softmax(std::span<const float> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += p[i];
  }
  for (double& v : p)
    v /= sum;
  return p;
}

/// Network input tensor (C, H, W) from an interleaved RGB image.
inline std::vector<float> to_planar(const Image& img) {
  const std::size_t H = img.height();
  const std::size_t W = img.width();
  std::vector<float> out(Image::channels * H * W);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x)
      for (std::size_t c = 0; c < Image::channels; ++c)
        out[(c * H + y) * W + x] = img.at(y, x, c);
  return out;
}

inline void check_input(const NetworkSpec& net, const Image& img) {
  const auto& in = net.input();
  if (in.channels != Image::channels || in.height != img.height() || in.width != img.width())
    throw InvalidInput("image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                       "x3 does not match network input " + std::to_string(in.height) + "x" +
                       std::to_string(in.width) + "x" + std::to_string(in.channels));
}

/// Runs layers [0, last] on one image and hands each layer's output to
/// visit(layer_index, values). Softmax outputs are passed as doubles through
/// visit_probs.
template <typename Visit, typename VisitProbs>
void run_layers(const NetworkSpec& net, const Weights& w, const Image& img, std::size_t last,
                Visit&& visit, VisitProbs&& visit_probs) {
  check_input(net, img);
  std::vector<float> cur = to_planar(img);
  TensorShape shape = net.input();
  for (std::size_t i = 0; i <= last; ++i) {
    const auto& l = net.layers()[i];
    const auto& lw = w.layers[i];
    switch (l.kind) {
    case LayerKind::conv:
      cur = conv3x3(cur, shape, lw.kernel, lw.bias, l.filters);
      relu(cur);
      break;
    case LayerKind::maxpool:
      cur = maxpool2x2(cur, shape);
      break;
    case LayerKind::dense:
      cur = dense(cur, lw.kernel, lw.bias, l.units);
      if (l.relu)
        relu(cur);
      break;
    case LayerKind::softmax:
      visit_probs(i, softmax(cur));
      shape = net.shape(i);
      continue;
    }
    shape = net.shape(i);
    visit(i, std::span<const float>(cur));
  }
}

} // namespace detail

/// Softmax probabilities of the network's head for one image.
inline std::vector<double> classify(const NetworkSpec& net, const Weights& w, const Image& img) {
  if (!net.has_softmax_head())
    throw InvalidInput("network '" + net.name() + "' has no softmax head");
  std::vector<double> probs;
  detail::run_layers(
      net, w, img, net.layers().size() - 1, [](std::size_t, std::span<const float>) {},
      [&](std::size_t, std::vector<double> p) { probs = std::move(p); });
  return probs;
}

/// Activations of the requested layers for every image, keyed by layer name.
/// Conv and dense layers report post-ReLU values (dense layers without ReLU
/// report their raw outputs), pooling layers the pooled values, softmax the
/// probabilities.
inline std::map<std::string, LayerActivations> forward_collect(const NetworkSpec& net, const Weights& w,
                                                               std::span<const Image> imgs,
                                                               const std::set<std::string>& layers,
                                                               std::size_t workers = 1) {
  validate_weights(net, w);
  if (imgs.empty())
    throw InvalidInput("forward_collect: no images");
  if (layers.empty())
    throw InvalidInput("forward_collect: no layers requested");

  std::vector<std::size_t> wanted(net.layers().size(), 0);
  std::size_t last = 0;
  for (const auto& name : layers) {
    const std::size_t i = net.index_of(name);
    wanted[i] = 1;
    last = std::max(last, i);
  }
  for (const auto& img : imgs)
    detail::check_input(net, img);

  const std::size_t n = imgs.size();
  std::vector<std::vector<double>> buffers(net.layers().size());
  for (std::size_t i = 0; i < wanted.size(); ++i)
    if (wanted[i])
      buffers[i].resize(n * net.shape(i).size());

  parallel_for(n, workers, [&](std::size_t s) {
    detail::run_layers(
        net, w, imgs[s], last,
        [&](std::size_t i, std::span<const float> v) {
          if (wanted[i])
            std::copy(v.begin(), v.end(), buffers[i].begin() + s * v.size());
        },
        [&](std::size_t i, const std::vector<double>& p) {
          if (wanted[i])
            std::copy(p.begin(), p.end(), buffers[i].begin() + s * p.size());
        });
  });

  std::map<std::string, LayerActivations> out;
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    if (!wanted[i])
      continue;
    const auto& sh = net.shape(i);
    const auto& name = net.layers()[i].name;
    out.emplace(name, LayerActivations(name, sh.height, sh.width, sh.channels, n, std::move(buffers[i])));
  }
  return out;
}

/// Indices of images whose probability for `class_index` exceeds `threshold`.
/// Throws SeedImageRejected when image 0 does not qualify.
inline std::vector<std::size_t> filter_by_confidence(const NetworkSpec& net, const Weights& w,
                                                     std::span<const Image> imgs, std::size_t class_index,
                                                     double threshold, std::size_t workers = 1) {
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw InvalidInput("confidence threshold must lie in [0, 1)");
  if (imgs.empty())
    throw InvalidInput("filter_by_confidence: no images");
  if (!net.has_softmax_head())
    throw InvalidInput("network '" + net.name() + "' has no softmax head");
  const std::size_t classes = net.shape(net.layers().size() - 1).size();
  if (class_index >= classes)
    throw InvalidInput("class index " + std::to_string(class_index) + " out of range for " +
                       std::to_string(classes) + " classes");
  validate_weights(net, w);

  std::vector<double> prob(imgs.size());
  parallel_for(imgs.size(), workers,
               [&](std::size_t s) { prob[s] = classify(net, w, imgs[s])[class_index]; });

  if (!(prob[0] > threshold))
    throw SeedImageRejected(class_index, prob[0], threshold);
  std::vector<std::size_t> kept;
  for (std::size_t s = 0; s < prob.size(); ++s)
    if (prob[s] > threshold)
      kept.push_back(s);
  return kept;
}

} // namespace deepdim
