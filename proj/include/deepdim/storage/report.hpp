#pragma once

// Dimension reports.
//
// JSON:
//   {"format": "deepdim-dimension-report", "version": 1,
//    "layers": [{"layer": "conv1", "theta": 100000.0, "cluster_size": 1000,
//                "map_indices": [..], "per_map_dimensions": [..],
//                "estimated": 123, "concatenated": 120 | null, "original": 118 | null,
//                "spectra": [{"source": "map:3", "log10": [..]}]   // only when requested
//               }]}
//
// CSV (one row per layer, header always present):
//   layer,theta,cluster_size,map_count,map_indices,per_map_dimensions,estimated,concatenated,original
// List columns are ';'-separated; an absent concatenated/original is an empty
// field. Spectra are JSON-only.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepdim/activations.hpp"
#include "deepdim/error.hpp"
#include "deepdim/storage/binary_io.hpp"

namespace deepdim {

enum class ReportFormat { json, csv };

inline constexpr std::string_view report_format_tag = "deepdim-dimension-report";

inline nlohmann::json summary_to_json(const DimensionSummary& s) {
  nlohmann::json j{{"layer", s.layer_name},
                   {"theta", s.theta},
                   {"cluster_size", s.cluster_size},
                   {"map_indices", s.map_indices},
                   {"per_map_dimensions", s.per_map_dimensions},
                   {"estimated", s.estimated},
                   {"concatenated", nullptr},
                   {"original", nullptr}};
  if (s.concatenated)
    j["concatenated"] = *s.concatenated;
  if (s.original)
    j["original"] = *s.original;
  if (!s.spectra.empty()) {
    auto& arr = j["spectra"] = nlohmann::json::array();
    for (const auto& sp : s.spectra)
      arr.push_back({{"source", sp.source}, {"log10", sp.log10}});
  }
  return j;
}

inline DimensionSummary summary_from_json(const nlohmann::json& j) {
  DimensionSummary s;
  s.layer_name = j.at("layer").get<std::string>();
  s.theta = j.at("theta").get<double>();
  s.cluster_size = j.at("cluster_size").get<std::size_t>();
  s.map_indices = j.at("map_indices").get<std::vector<std::size_t>>();
  s.per_map_dimensions = j.at("per_map_dimensions").get<std::vector<std::size_t>>();
  s.estimated = j.at("estimated").get<std::size_t>();
  if (j.contains("concatenated") && !j.at("concatenated").is_null())
    s.concatenated = j.at("concatenated").get<std::size_t>();
  if (j.contains("original") && !j.at("original").is_null())
    s.original = j.at("original").get<std::size_t>();
  if (j.contains("spectra"))
    for (const auto& sp : j.at("spectra"))
      s.spectra.push_back({sp.at("source").get<std::string>(), sp.at("log10").get<std::vector<double>>()});
  return s;
}

inline nlohmann::json report_to_json(const std::vector<DimensionSummary>& summaries) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : summaries)
    layers.push_back(summary_to_json(s));
  return {{"format", report_format_tag}, {"version", 1}, {"layers", std::move(layers)}};
}

inline std::vector<DimensionSummary> report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != report_format_tag)
      throw InvalidInput("not a dimension report");
    std::vector<DimensionSummary> out;
    for (const auto& l : j.at("layers"))
      out.push_back(summary_from_json(l));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed dimension report: ") + e.what());
  }
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

template <typename Range>
std::string join(const Range& r, char sep) {
  std::string out;
  bool first = true;
  for (const auto& v : r) {
    if (!first)
      out += sep;
    out += std::to_string(v);
    first = false;
  }
  return out;
}

} // namespace detail

inline constexpr std::string_view report_csv_header =
    "layer,theta,cluster_size,map_count,map_indices,per_map_dimensions,estimated,concatenated,original";

inline std::string report_to_csv(const std::vector<DimensionSummary>& summaries) {
  std::string out(report_csv_header);
  out += '\n';
  for (const auto& s : summaries) {
    if (s.layer_name.find_first_of(",\"\n") != std::string::npos)
      throw InvalidInput("layer name '" + s.layer_name + "' cannot be written to CSV");
    out += s.layer_name + ',' + detail::format_double(s.theta) + ',' + std::to_string(s.cluster_size) + ',' +
           std::to_string(s.map_indices.size()) + ',' + detail::join(s.map_indices, ';') + ',' +
           detail::join(s.per_map_dimensions, ';') + ',' + std::to_string(s.estimated) + ',' +
           (s.concatenated ? std::to_string(*s.concatenated) : "") + ',' +
           (s.original ? std::to_string(*s.original) : "") + '\n';
  }
  return out;
}

inline std::string render_report(const std::vector<DimensionSummary>& summaries, ReportFormat format) {
  if (format == ReportFormat::csv)
    return report_to_csv(summaries);
  return report_to_json(summaries).dump(2) + '\n';
}

inline void write_report(const std::vector<DimensionSummary>& summaries, ReportFormat format,
                         const std::filesystem::path& path) {
  io::write_text(path, render_report(summaries, format));
}

inline std::vector<DimensionSummary> read_report_json(const std::filesystem::path& path) {
  try {
    return report_from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

} // namespace deepdim
