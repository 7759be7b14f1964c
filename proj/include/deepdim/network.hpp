#pragma once

// Declarative VGG-style network description and its JSON form.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepdim/error.hpp"

namespace deepdim {

enum class LayerKind { conv, maxpool, dense, softmax };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
  case LayerKind::conv:
    return "conv";
  case LayerKind::maxpool:
    return "maxpool";
  case LayerKind::dense:
    return "dense";
  case LayerKind::softmax:
    return "softmax";
  }
  return "unknown";
}

/// Activation shape of a layer. Fully connected outputs are (units, 1, 1).
struct TensorShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const noexcept { return height * width * channels; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

/// conv is always 3x3, stride 1, pad 1, followed by ReLU; maxpool is 2x2,
/// stride 2.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  std::size_t filters = 0; ///< conv output channels
  std::size_t units = 0;   ///< dense outputs
  bool relu = true;        ///< dense only; conv always applies ReLU

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

class NetworkSpec {
public:
  NetworkSpec() = default;

  NetworkSpec(std::string name, TensorShape input, std::vector<LayerSpec> layers)
      : name_(std::move(name)), input_(input), layers_(std::move(layers)) {
    shapes_ = compute_shapes();
  }

  const std::string& name() const noexcept { return name_; }
  const TensorShape& input() const noexcept { return input_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  /// Output shape of layer i.
  const TensorShape& shape(std::size_t i) const { return shapes_.at(i); }
  const std::vector<TensorShape>& shapes() const noexcept { return shapes_; }

  bool has_softmax_head() const noexcept {
    return !layers_.empty() && layers_.back().kind == LayerKind::softmax;
  }

  std::optional<std::size_t> find(std::string_view layer) const {
    for (std::size_t i = 0; i < layers_.size(); ++i)
      if (layers_[i].name == layer)
        return i;
    return std::nullopt;
  }

  std::size_t index_of(std::string_view layer) const {
    if (auto i = find(layer))
      return *i;
    throw InvalidInput("unknown layer '" + std::string(layer) + "' in network '" + name_ + "'");
  }

  /// Names of all layers that produce activations worth analysing (everything
  /// but the softmax head).
  std::vector<std::string> analysable_layers() const {
    std::vector<std::string> out;
    for (const auto& l : layers_)
      if (l.kind != LayerKind::softmax)
        out.push_back(l.name);
    return out;
  }

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
    return a.name_ == b.name_ && a.input_ == b.input_ && a.layers_ == b.layers_;
  }

private:
  std::vector<TensorShape> compute_shapes() const {
    if (input_.size() == 0)
      throw InvalidInput("network input shape must be positive");
    if (layers_.empty())
      throw InvalidInput("network has no layers");

    std::vector<TensorShape> shapes;
    std::set<std::string> names;
    TensorShape cur = input_;
    bool flat = false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (l.name.empty())
        throw InvalidInput("layer " + std::to_string(i) + " has no name");
      if (!names.insert(l.name).second)
        throw InvalidInput("duplicate layer name '" + l.name + "'");
      switch (l.kind) {
      case LayerKind::conv:
        if (flat)
          throw InvalidInput("conv layer '" + l.name + "' follows a dense layer");
        if (l.filters == 0)
          throw InvalidInput("conv layer '" + l.name + "' needs filters > 0");
        cur = {cur.height, cur.width, l.filters};
        break;
      case LayerKind::maxpool:
        if (flat)
          throw InvalidInput("maxpool layer '" + l.name + "' follows a dense layer");
        if (cur.height < 2 || cur.width < 2)
          throw InvalidInput("maxpool layer '" + l.name + "' input smaller than 2x2");
        cur = {cur.height / 2, cur.width / 2, cur.channels};
        break;
      case LayerKind::dense:
        if (l.units == 0)
          throw InvalidInput("dense layer '" + l.name + "' needs units > 0");
        cur = {l.units, 1, 1};
        flat = true;
        break;
      case LayerKind::softmax:
        if (i + 1 != layers_.size())
          throw InvalidInput("softmax layer '" + l.name + "' must be the last layer");
        if (i == 0 || layers_[i - 1].kind != LayerKind::dense)
          throw InvalidInput("softmax layer '" + l.name + "' must follow a dense layer");
        break;
      }
      shapes.push_back(cur);
    }
    return shapes;
  }

  std::string name_;
  TensorShape input_;
  std::vector<LayerSpec> layers_;
  std::vector<TensorShape> shapes_;
};

// JSON form:
// {
//   "name": "vgg19",
//   "input": {"height": 224, "width": 224, "channels": 3},
//   "layers": [
//     {"name": "conv1_1", "type": "conv", "filters": 64, "kernel": 3, "stride": 1, "pad": 1},
//     {"name": "maxpooling1", "type": "maxpool", "size": 2, "stride": 2},
//     {"name": "fc6", "type": "dense", "units": 4096, "relu": true},
//     {"name": "prob", "type": "softmax"}
//   ]
// }
// kernel/stride/pad/size are optional and must equal the fixed values when given.

inline nlohmann::json network_to_json(const NetworkSpec& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json j{{"name", l.name}, {"type", to_string(l.kind)}};
    switch (l.kind) {
    case LayerKind::conv:
      j["filters"] = l.filters;
      j["kernel"] = 3;
      j["stride"] = 1;
      j["pad"] = 1;
      break;
    case LayerKind::maxpool:
      j["size"] = 2;
      j["stride"] = 2;
      break;
    case LayerKind::dense:
      j["units"] = l.units;
      j["relu"] = l.relu;
      break;
    case LayerKind::softmax:
      break;
    }
    layers.push_back(std::move(j));
  }
  return {{"name", net.name()},
          {"input",
           {{"height", net.input().height}, {"width", net.input().width}, {"channels", net.input().channels}}},
          {"layers", std::move(layers)}};
}

inline NetworkSpec network_from_json(const nlohmann::json& j) {
  try {
    const auto& in = j.at("input");
    TensorShape input{in.at("height").get<std::size_t>(), in.at("width").get<std::size_t>(),
                      in.at("channels").get<std::size_t>()};
    std::vector<LayerSpec> layers;
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      l.name = lj.at("name").get<std::string>();
      const auto type = lj.at("type").get<std::string>();
      auto expect_fixed = [&](const char* key, int value) {
        if (lj.contains(key) && lj.at(key).get<int>() != value)
          throw InvalidInput("layer '" + l.name + "': only " + key + " = " + std::to_string(value) +
                             " is supported");
      };
      if (type == "conv") {
        l.kind = LayerKind::conv;
        l.filters = lj.at("filters").get<std::size_t>();
        expect_fixed("kernel", 3);
        expect_fixed("stride", 1);
        expect_fixed("pad", 1);
      } else if (type == "maxpool") {
        l.kind = LayerKind::maxpool;
        expect_fixed("size", 2);
        expect_fixed("stride", 2);
      } else if (type == "dense") {
        l.kind = LayerKind::dense;
        l.units = lj.at("units").get<std::size_t>();
        l.relu = lj.value("relu", true);
      } else if (type == "softmax") {
        l.kind = LayerKind::softmax;
      } else {
        throw InvalidInput("layer '" + l.name + "': unknown type '" + type + "'");
      }
      layers.push_back(std::move(l));
    }
    return NetworkSpec(j.value("name", std::string("network")), input, std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed network spec: ") + e.what());
  }
}

} // namespace deepdim
