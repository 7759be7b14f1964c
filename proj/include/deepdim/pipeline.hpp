#pragma once

// End-to-end run: seed image -> augmented cluster -> confidence filter ->
// forward pass -> per-layer dimension summaries.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "deepdim/activations.hpp"
#include "deepdim/augment.hpp"
#include "deepdim/forward.hpp"
#include "deepdim/network.hpp"
#include "deepdim/random.hpp"
#include "deepdim/storage/activation_file.hpp"
#include "deepdim/storage/image_io.hpp"
#include "deepdim/storage/manifest.hpp"

namespace deepdim {

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// k distinct maps out of [0, channels), drawn without replacement from a
/// stream keyed by (seed, layer). k == 0 or k >= channels selects every map in
/// order.
inline std::vector<std::size_t> select_maps(std::size_t channels, std::size_t k, std::uint64_t seed,
                                            std::string_view layer) {
  std::vector<std::size_t> idx(channels);
  std::iota(idx.begin(), idx.end(), 0);
  if (k == 0 || k >= channels)
    return idx;
  Rng rng = substream(seed, stable_hash(layer), /*domain=*/0x6d617073);
  // Partial Fisher-Yates; the uniform draw is done by hand because
  // uniform_int_distribution's algorithm is implementation-defined.
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t span = channels - i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do
      r = rng();
    while (r >= limit);
    std::swap(idx[i], idx[i + static_cast<std::size_t>(r % span)]);
  }
  idx.resize(k);
  return idx;
}

struct LayerSelection {
  std::vector<std::string> layers; ///< empty: every analysable layer
  std::size_t maps = 0;            ///< maps per layer; 0 = all
  std::uint64_t map_seed = 0;
};

/// Summaries for each layer in `acts` (in the order given by sel.layers, or
/// map order when that is empty).
inline std::vector<DimensionSummary> summarize_layers(const std::map<std::string, LayerActivations>& acts,
                                                      const std::vector<std::string>& order,
                                                      const LayerSelection& sel, const SummaryRequest& req) {
  std::vector<DimensionSummary> out;
  for (const auto& name : order) {
    const auto it = acts.find(name);
    if (it == acts.end())
      throw InvalidInput("unknown layer '" + name + "'");
    const auto maps = select_maps(it->second.channels(), sel.maps, sel.map_seed, name);
    out.push_back(summarize_layer(it->second, maps, req));
  }
  return out;
}

struct PipelineConfig {
  std::filesystem::path image;
  NetworkSpec network;
  std::string network_ref;
  std::uint64_t weights_seed = 0;
  AugmentConfig augmentation;
  std::size_t cluster_size = 8000;
  double confidence_threshold = 0.99;
  std::optional<std::size_t> class_index; ///< default: the seed image's top class
  LayerSelection selection;
  SummaryRequest request;
  std::optional<std::filesystem::path> save_dir;   ///< ACTV files + manifest.json
  std::optional<std::filesystem::path> images_dir; ///< cluster images as PPM
  std::size_t workers = 1;
};

struct PipelineResult {
  std::vector<DimensionSummary> summaries;
  std::size_t class_index = 0;
  std::vector<std::size_t> kept;
  RunManifest manifest;
};

inline std::string sample_file_name(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 6)
    digits.insert(0, 6 - digits.size(), '0');
  return "sample_" + digits + ".ppm";
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const Image seed = read_image(cfg.image);
  const Weights weights = seeded_random_weights(cfg.network, cfg.weights_seed);
  const auto cluster = generate_cluster(seed, cfg.cluster_size, cfg.augmentation, cfg.workers);

  if (cfg.images_dir) {
    std::filesystem::create_directories(*cfg.images_dir);
    for (std::size_t i = 0; i < cluster.size(); ++i)
      write_image(cluster[i], *cfg.images_dir / sample_file_name(i));
  }

  PipelineResult result;
  if (cfg.class_index) {
    result.class_index = *cfg.class_index;
  } else {
    const auto probs = classify(cfg.network, weights, seed);
    result.class_index =
        static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  result.kept = filter_by_confidence(cfg.network, weights, cluster, result.class_index,
                                     cfg.confidence_threshold, cfg.workers);

  std::vector<Image> kept_images;
  kept_images.reserve(result.kept.size());
  for (std::size_t i : result.kept)
    kept_images.push_back(cluster[i]);

  const std::vector<std::string> order =
      cfg.selection.layers.empty() ? cfg.network.analysable_layers() : cfg.selection.layers;
  for (const auto& name : order)
    cfg.network.index_of(name);
  const std::set<std::string> wanted(order.begin(), order.end());
  const auto acts = forward_collect(cfg.network, weights, kept_images, wanted, cfg.workers);

  SummaryRequest req = cfg.request;
  req.estimate.workers = cfg.workers;
  result.summaries = summarize_layers(acts, order, cfg.selection, req);

  RunManifest& m = result.manifest;
  m.network_ref = cfg.network_ref.empty() ? cfg.network.name() : cfg.network_ref;
  m.network = cfg.network;
  m.weights_seed = cfg.weights_seed;
  m.augmentation = cfg.augmentation;
  m.preprocessing = "PPM pixels scaled to [0,1]; no mean subtraction";
  m.cluster_size = cfg.cluster_size;
  m.confidence_threshold = cfg.confidence_threshold;
  m.class_index = result.class_index;
  for (std::size_t i = 0, k = 0; i < cluster.size(); ++i) {
    if (k < result.kept.size() && result.kept[k] == i)
      ++k;
    else
      m.excluded_samples.push_back(i);
  }
  for (const auto& name : order) {
    const auto& a = acts.at(name);
    m.activations.push_back({name, name + ".actv", {a.cluster_size(), a.channels(), a.height(), a.width()}});
  }

  if (cfg.save_dir) {
    std::filesystem::create_directories(*cfg.save_dir);
    for (const auto& name : order)
      write_activations(acts.at(name), *cfg.save_dir / (name + ".actv"));
    write_manifest(m, *cfg.save_dir / "manifest.json");
  }
  return result;
}

} // namespace deepdim
