#pragma once

// Run manifest: the JSON document tying a set of ACTV files to the run that
// produced them. File paths are relative to the manifest's directory.
//
//   {
//     "format": "deepdim-run-manifest", "version": 1,
//     "network": {"ref": "tiny", "spec": {...NetworkSpec JSON...}, "weights_seed": 7},
//     "augmentation": {"method": "gaussian_noise", "crop_max_strip": 10, "noise_mean": 0.0,
//                      "noise_var": 0.01, "rotation_max_deg": 10.0, "seed": 42},
//     "preprocessing": "pixels scaled to [0,1]",
//     "cluster_size": 1000,            // images generated, seed image included
//     "confidence_threshold": 0.99,
//     "class_index": 3,
//     "excluded_samples": [17, 512],   // indices that failed the confidence filter
//     "activations": [{"layer": "conv1", "file": "conv1.actv", "dims": [983, 8, 16, 16]}]
//   }
//
// "spec", "weights_seed" and "preprocessing" are optional.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepdim/augment.hpp"
#include "deepdim/error.hpp"
#include "deepdim/network.hpp"
#include "deepdim/storage/activation_file.hpp"
#include "deepdim/storage/binary_io.hpp"

namespace deepdim {

inline constexpr std::string_view manifest_format_tag = "deepdim-run-manifest";

struct ManifestEntry {
  std::string layer;
  std::string file;
  std::array<std::uint64_t, 4> dims{}; ///< n, C, H, W

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct RunManifest {
  std::string network_ref;
  std::optional<NetworkSpec> network;
  std::optional<std::uint64_t> weights_seed;
  AugmentConfig augmentation;
  std::string preprocessing;
  std::size_t cluster_size = 0;
  double confidence_threshold = 0.99;
  std::size_t class_index = 0;
  std::vector<std::size_t> excluded_samples;
  std::vector<ManifestEntry> activations;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline nlohmann::json augment_to_json(const AugmentConfig& c) {
  return {{"method", to_string(c.method)},
          {"crop_max_strip", c.crop_max_strip},
          {"noise_mean", c.noise_mean},
          {"noise_var", c.noise_var},
          {"rotation_max_deg", c.rotation_max_deg},
          {"seed", c.seed}};
}

inline AugmentConfig augment_from_json(const nlohmann::json& j) {
  AugmentConfig c;
  const auto method = j.at("method").get<std::string>();
  const auto parsed = parse_augment_method(method);
  if (!parsed)
    throw InvalidInput("unknown augmentation method '" + method + "'");
  c.method = *parsed;
  c.crop_max_strip = j.value("crop_max_strip", c.crop_max_strip);
  c.noise_mean = j.value("noise_mean", c.noise_mean);
  c.noise_var = j.value("noise_var", c.noise_var);
  c.rotation_max_deg = j.value("rotation_max_deg", c.rotation_max_deg);
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json network{{"ref", m.network_ref}};
  if (m.network)
    network["spec"] = network_to_json(*m.network);
  if (m.weights_seed)
    network["weights_seed"] = *m.weights_seed;

  nlohmann::json acts = nlohmann::json::array();
  for (const auto& e : m.activations)
    acts.push_back({{"layer", e.layer}, {"file", e.file}, {"dims", e.dims}});

  nlohmann::json j{{"format", manifest_format_tag},
                   {"version", 1},
                   {"network", std::move(network)},
                   {"augmentation", augment_to_json(m.augmentation)},
                   {"cluster_size", m.cluster_size},
                   {"confidence_threshold", m.confidence_threshold},
                   {"class_index", m.class_index},
                   {"excluded_samples", m.excluded_samples},
                   {"activations", std::move(acts)}};
  if (!m.preprocessing.empty())
    j["preprocessing"] = m.preprocessing;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != manifest_format_tag)
      throw InvalidInput("not a run manifest");
    if (j.at("version").get<int>() != 1)
      throw InvalidInput("unsupported run manifest version");
    RunManifest m;
    const auto& net = j.at("network");
    m.network_ref = net.value("ref", std::string());
    if (net.contains("spec"))
      m.network = network_from_json(net.at("spec"));
    if (net.contains("weights_seed"))
      m.weights_seed = net.at("weights_seed").get<std::uint64_t>();
    m.augmentation = augment_from_json(j.at("augmentation"));
    m.preprocessing = j.value("preprocessing", std::string());
    m.cluster_size = j.at("cluster_size").get<std::size_t>();
    m.confidence_threshold = j.at("confidence_threshold").get<double>();
    m.class_index = j.at("class_index").get<std::size_t>();
    m.excluded_samples = j.value("excluded_samples", std::vector<std::size_t>{});
    for (const auto& e : j.at("activations"))
      m.activations.push_back({e.at("layer").get<std::string>(), e.at("file").get<std::string>(),
                               e.at("dims").get<std::array<std::uint64_t, 4>>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed run manifest: ") + e.what());
  }
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  io::write_text(path, manifest_to_json(m).dump(2) + '\n');
}

/// Parses the manifest and checks that every referenced ACTV file exists and
/// that its header agrees with the recorded layer name and dims.
inline RunManifest read_manifest(const std::filesystem::path& path) {
  RunManifest m;
  try {
    m = manifest_from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  for (const auto& e : m.activations) {
    const auto file = path.parent_path() / e.file;
    if (!std::filesystem::exists(file))
      throw IoError("manifest " + path.string() + " references missing file " + file.string());
    const auto h = decode_activation_header(io::read_prefix(file, actv_max_header_size));
    if (h.layer_name != e.layer || h.n != e.dims[0] || h.channels != e.dims[1] || h.height != e.dims[2] ||
        h.width != e.dims[3])
      throw InvalidInput("manifest entry for layer '" + e.layer + "' does not match " + file.string());
  }
  return m;
}

} // namespace deepdim
