#pragma once

// deepdim command-line front end. Exit codes: 0 success, 2 usage or
// configuration error, 3 expectation mismatch, 4 seed image rejected by the
// confidence filter.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "deepdim/activations.hpp"
#include "deepdim/augment.hpp"
#include "deepdim/error.hpp"
#include "deepdim/linalg.hpp"
#include "deepdim/network.hpp"
#include "deepdim/parallel.hpp"
#include "deepdim/pipeline.hpp"
#include "deepdim/spectrum.hpp"
#include "deepdim/storage/activation_file.hpp"
#include "deepdim/storage/binary_io.hpp"
#include "deepdim/storage/image_io.hpp"
#include "deepdim/storage/manifest.hpp"
#include "deepdim/storage/report.hpp"
#include "deepdim/synthetic.hpp"

namespace deepdim::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_usage = 2,
  exit_mismatch = 3,
  exit_rejected = 4,
};

namespace detail {

struct AugmentFlags {
  std::string method = "gaussian_noise";
  AugmentConfig cfg;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--method", method, "augmentation: crop, gaussian_noise (noise) or rotation")
        ->capture_default_str();
    cmd.add_option("--crop-max-strip", cfg.crop_max_strip, "max strip removed per edge, px")
        ->capture_default_str();
    cmd.add_option("--noise-mean", cfg.noise_mean, "Gaussian noise mean")->capture_default_str();
    cmd.add_option("--noise-var", cfg.noise_var, "Gaussian noise variance")->capture_default_str();
    cmd.add_option("--rotation-max-deg", cfg.rotation_max_deg, "max rotation, degrees")
        ->capture_default_str();
    cmd.add_option("--seed", cfg.seed, "augmentation seed")->capture_default_str();
  }

  AugmentConfig resolve() const {
    const auto m = parse_augment_method(method);
    if (!m)
      throw InvalidInput("unknown augmentation method '" + method + "'");
    AugmentConfig out = cfg;
    out.method = *m;
    return out;
  }
};

struct ReportFlags {
  std::string format = "json";
  std::string output;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd.add_option("-o,--output", output, "write to this file instead of stdout");
  }

  ReportFormat report_format() const { return format == "csv" ? ReportFormat::csv : ReportFormat::json; }

  void emit(const std::string& text, std::ostream& out) const {
    if (output.empty())
      out << text;
    else
      io::write_text(output, text);
  }
};

struct EstimateFlags {
  double theta = default_theta;
  std::vector<std::string> layers;
  std::size_t maps = 0;
  std::uint64_t map_seed = 0;
  bool concat = false;
  bool original = false;
  bool spectra = false;
  bool center = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--theta", theta, "drop threshold on sigma_j / sigma_{j+1}")->capture_default_str();
    cmd.add_option("--layers", layers, "layers to analyse (default: all)")->delimiter(',');
    cmd.add_option("--maps", maps, "feature maps picked at random per layer (0 = all)")->capture_default_str();
    cmd.add_option("--map-seed", map_seed, "seed for the feature map selection")->capture_default_str();
    cmd.add_flag("--concat", concat, "also report the concatenated dimension");
    cmd.add_flag("--original", original, "also report the original (all-maps) dimension");
    cmd.add_flag("--spectra", spectra, "include log10 singular spectra (JSON only)");
    cmd.add_flag("--center", center, "subtract the cluster mean before the SVD");
  }

  SummaryRequest request() const {
    if (!(theta > 1.0))
      throw InvalidInput("--theta must be greater than 1");
    SummaryRequest r;
    r.estimate.theta = theta;
    r.estimate.center = center;
    r.estimate.workers = default_worker_count();
    r.concatenated = concat;
    r.original = original;
    r.spectra = spectra;
    return r;
  }

  LayerSelection selection() const { return {layers, maps, map_seed}; }
};

inline std::string fmt(double v) { return deepdim::detail::format_double(v); }

// ---------------------------------------------------------------- synth

struct SynthCommand {
  HyperplaneSpec spec{.ambient_dim = 512, .intrinsic_dim = 37, .cluster_size = 200, .noise_scale = 1e-10};
  double theta = default_theta;
  bool expect = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--ambient", spec.ambient_dim, "ambient dimension D")->capture_default_str();
    cmd.add_option("--intrinsic", spec.intrinsic_dim, "true dimension d")->capture_default_str();
    cmd.add_option("--n", spec.cluster_size, "cluster size")->capture_default_str();
    cmd.add_option("--noise", spec.noise_scale, "noise scale")->capture_default_str();
    cmd.add_option("--coef-scale", spec.coefficient_scale, "coefficient scale")->capture_default_str();
    cmd.add_option("--seed", spec.seed, "generator seed")->capture_default_str();
    cmd.add_option("--theta", theta, "drop threshold")->capture_default_str();
    cmd.add_flag("--expect", expect, "exit 3 unless the estimate equals the true dimension");
  }

  int run(std::ostream& out) const {
    const Matrix m = sample_hyperplane_cluster(spec);
    const DropReport r = detect_drop(singular_values(m), theta);
    out << "ambient_dimension " << spec.ambient_dim << '\n'
        << "cluster_size " << spec.cluster_size << '\n'
        << "noise_scale " << fmt(spec.noise_scale) << '\n'
        << "theta " << fmt(theta) << '\n'
        << "true_dimension " << spec.intrinsic_dim << '\n'
        << "estimated_dimension " << r.dimension << '\n';
    if (r.drop_ratio)
      out << "drop_ratio " << fmt(*r.drop_ratio) << '\n';
    else
      out << "drop_ratio none\n";
    out << "full_space " << (r.full_space ? "true" : "false") << '\n';
    if (expect && r.dimension != spec.intrinsic_dim) {
      out << "MISMATCH\n";
      return exit_mismatch;
    }
    return exit_ok;
  }
};

// ---------------------------------------------------------------- estimate

struct EstimateCommand {
  std::string manifest;
  std::vector<std::string> files;
  std::size_t first = 0;
  EstimateFlags estimate;
  ReportFlags report;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--manifest", manifest, "run manifest listing ACTV files");
    cmd.add_option("files", files, "ACTV files");
    cmd.add_option("--first", first, "use only the first N samples of every layer (0 = all)");
    estimate.add_to(cmd);
    report.add_to(cmd);
  }

  int run(std::ostream& out) const {
    if (manifest.empty() == files.empty())
      throw InvalidInput("give either --manifest or ACTV files, not both or neither");

    std::vector<std::filesystem::path> paths;
    if (!manifest.empty()) {
      const RunManifest m = read_manifest(manifest);
      const auto dir = std::filesystem::path(manifest).parent_path();
      for (const auto& e : m.activations)
        paths.push_back(dir / e.file);
    } else {
      paths.assign(files.begin(), files.end());
    }

    std::map<std::string, LayerActivations> acts;
    std::vector<std::string> order;
    for (const auto& p : paths) {
      if (!std::filesystem::exists(p))
        throw IoError("missing activation file " + p.string());
      const std::string name = decode_activation_header(io::read_prefix(p, actv_max_header_size)).layer_name;
      if (!estimate.layers.empty() &&
          std::find(estimate.layers.begin(), estimate.layers.end(), name) == estimate.layers.end())
        continue;
      LayerActivations a = read_activations(p);
      if (first > 0)
        a = a.leading_samples(std::min(first, a.cluster_size()));
      if (acts.count(name))
        throw InvalidInput("layer '" + name + "' appears in more than one file");
      order.push_back(name);
      acts.emplace(name, std::move(a));
    }
    if (!estimate.layers.empty())
      order = estimate.layers; // summarize_layers reports any that were not found

    const auto summaries = summarize_layers(acts, order, estimate.selection(), estimate.request());
    report.emit(render_report(summaries, report.report_format()), out);
    return exit_ok;
  }
};

// ---------------------------------------------------------------- spectrum

struct SpectrumCommand {
  std::string file;
  std::size_t map = 0;
  bool all_maps = false;
  bool center = false;
  double theta = default_theta;
  ReportFlags report{.format = "csv", .output = {}};

  void add_to(CLI::App& cmd) {
    cmd.add_option("file", file, "ACTV file")->required();
    cmd.add_option("--map", map, "feature map index")->capture_default_str();
    cmd.add_flag("--all-maps", all_maps, "use the concatenation of every map");
    cmd.add_flag("--center", center, "subtract the cluster mean before the SVD");
    cmd.add_option("--theta", theta, "drop threshold (JSON output reports the drop)")->capture_default_str();
    report.add_to(cmd);
  }

  int run(std::ostream& out) const {
    if (!(theta > 1.0))
      throw InvalidInput("--theta must be greater than 1");
    if (!std::filesystem::exists(file))
      throw IoError("missing activation file " + file);
    const LayerActivations acts = read_activations(file);
    Matrix m = all_maps ? concatenate_maps(acts, deepdim::detail::all_maps(acts)) : feature_map_matrix(acts, map);
    if (center)
      m.center_rows();
    const SingularSpectrum s = singular_values(m);
    const DropReport drop = detect_drop(s, theta);

    std::string text;
    if (report.report_format() == ReportFormat::csv) {
      text = "index,sigma,log10_sigma\n";
      for (std::size_t i = 0; i < s.size(); ++i)
        text += std::to_string(i + 1) + ',' + fmt(s[i]) + ',' + fmt(drop.log_values[i]) + '\n';
    } else {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < s.size(); ++i)
        rows.push_back({{"index", i + 1}, {"sigma", s[i]}, {"log10_sigma", drop.log_values[i]}});
      nlohmann::json j{{"layer", acts.name()},
                       {"source", all_maps ? std::string("all_maps") : "map:" + std::to_string(map)},
                       {"theta", theta},
                       {"dimension", drop.dimension},
                       {"full_space", drop.full_space},
                       {"drop_index", nullptr},
                       {"values", std::move(rows)}};
      if (drop.drop_index)
        j["drop_index"] = *drop.drop_index;
      text = j.dump(2) + '\n';
    }
    report.emit(text, out);
    return exit_ok;
  }
};

// ---------------------------------------------------------------- augment

struct AugmentCommand {
  std::string image;
  std::size_t n = 8000;
  std::string out_dir;
  AugmentFlags aug;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--image", image, "seed image (binary PPM)")->required();
    cmd.add_option("--n", n, "cluster size, seed image included")->capture_default_str();
    cmd.add_option("--out-dir", out_dir, "directory for sample_NNNNNN.ppm files")->required();
    aug.add_to(cmd);
  }

  int run(std::ostream& out) const {
    const AugmentConfig cfg = aug.resolve();
    const Image seed = read_image(image);
    const auto cluster = generate_cluster(seed, n, cfg, default_worker_count());
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < cluster.size(); ++i)
      write_image(cluster[i], std::filesystem::path(out_dir) / sample_file_name(i));
    nlohmann::json j{{"augmentation", augment_to_json(cfg)}, {"cluster_size", n}, {"seed_image", image}};
    io::write_text(std::filesystem::path(out_dir) / "cluster.json", j.dump(2) + '\n');
    out << "wrote " << cluster.size() << " images to " << out_dir << '\n';
    return exit_ok;
  }
};

// ---------------------------------------------------------------- pipeline

struct PipelineCommand {
  std::string image;
  std::string network;
  std::uint64_t weights_seed = 0;
  std::size_t n = 8000;
  double confidence = 0.99;
  std::optional<std::size_t> class_index;
  std::string save_dir;
  std::string images_dir;
  AugmentFlags aug;
  EstimateFlags estimate;
  ReportFlags report;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--image", image, "seed image (binary PPM)")->required();
    cmd.add_option("--network", network, "network spec JSON")->required();
    cmd.add_option("--weights-seed", weights_seed, "seed for the random network weights")->capture_default_str();
    cmd.add_option("--n", n, "cluster size, seed image included")->capture_default_str();
    cmd.add_option("--confidence", confidence, "keep images with P(class) above this")->capture_default_str();
    cmd.add_option("--class", class_index, "target class (default: top class of the seed image)");
    cmd.add_option("--save-dir", save_dir, "write ACTV files and manifest.json here");
    cmd.add_option("--images-dir", images_dir, "write the generated cluster as PPM files here");
    aug.add_to(cmd);
    estimate.add_to(cmd);
    report.add_to(cmd);
  }

  int run(std::ostream& out) const {
    PipelineConfig cfg;
    cfg.image = image;
    if (!std::filesystem::exists(network))
      throw IoError("missing network spec " + network);
    try {
      cfg.network = network_from_json(nlohmann::json::parse(io::read_text(network)));
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput(network + ": " + e.what());
    }
    cfg.network_ref = std::filesystem::path(network).filename().string();
    cfg.weights_seed = weights_seed;
    cfg.augmentation = aug.resolve();
    cfg.cluster_size = n;
    cfg.confidence_threshold = confidence;
    cfg.class_index = class_index;
    cfg.selection = estimate.selection();
    cfg.request = estimate.request();
    if (!save_dir.empty())
      cfg.save_dir = save_dir;
    if (!images_dir.empty())
      cfg.images_dir = images_dir;
    cfg.workers = default_worker_count();

    const PipelineResult r = run_pipeline(cfg);
    report.emit(render_report(r.summaries, report.report_format()), out);
    return exit_ok;
  }
};

} // namespace detail

/// Runs the tool on `args` (without the program name). Normal output goes to
/// `out`, diagnostics to `err`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local manifold dimension of network activations via singular value drops", "deepdim"};
  app.require_subcommand(1);

  detail::SynthCommand synth;
  detail::EstimateCommand estimate;
  detail::SpectrumCommand spectrum;
  detail::AugmentCommand augment_cmd;
  detail::PipelineCommand pipeline;
  auto* synth_cmd = app.add_subcommand("synth", "estimate the dimension of a synthetic hyperplane cluster");
  auto* estimate_cmd = app.add_subcommand("estimate", "dimension report for stored activations");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "singular spectrum table of one feature map");
  auto* augment_app = app.add_subcommand("augment", "write an augmented image cluster");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "augment, run the network, estimate dimensions");
  synth.add_to(*synth_cmd);
  estimate.add_to(*estimate_cmd);
  spectrum.add_to(*spectrum_cmd);
  augment_cmd.add_to(*augment_app);
  pipeline.add_to(*pipeline_cmd);

  std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*synth_cmd)
      return synth.run(out);
    if (*estimate_cmd)
      return estimate.run(out);
    if (*spectrum_cmd)
      return spectrum.run(out);
    if (*augment_app)
      return augment_cmd.run(out);
    if (*pipeline_cmd)
      return pipeline.run(out);
  } catch (const SeedImageRejected& e) {
    err << "error: " << e.what() << '\n';
    return exit_rejected;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return exit_internal;
  }
  return exit_usage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

} // namespace deepdim::cli
