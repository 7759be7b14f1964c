#include <gtest/gtest.h>

#include <random>

#include "deepdim/storage/activation_file.hpp"
#include "deepdim/storage/image_io.hpp"
#include "deepdim/storage/manifest.hpp"
#include "deepdim/storage/report.hpp"
#include "test_util.hpp"

namespace deepdim {
namespace {

using namespace std::string_literals;

const std::vector<double> golden_values{0.5, -1.0, 2.0, 0.25, 1.5, 0.0, -0.5, 3.0};

LayerActivations golden() { return LayerActivations("golden", 2, 2, 1, 2, golden_values); }

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

FormatErrorKind decode_error_kind(std::span<const std::uint8_t> bytes) {
  try {
    decode_activations(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode did not throw";
  return FormatErrorKind::unsupported_format;
}

LayerActivations random_layer(std::mt19937_64& rng, bool float_exact) {
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  const std::size_t n = dim(rng), C = dim(rng), H = dim(rng), W = dim(rng);
  std::normal_distribution<double> g(0.0, 10.0);
  std::vector<double> data(n * C * H * W);
  for (double& v : data)
    v = float_exact ? static_cast<double>(static_cast<float>(g(rng))) : g(rng);
  std::string name = "layer_" + std::to_string(rng() % 1000);
  return LayerActivations(name, H, W, C, n, std::move(data));
}

TEST(ActivationFile, GoldenFixturesMatchByteForByte) {
  const auto f32 = io::read_file(DEEPDIM_TEST_DATA "/golden_f32.actv");
  const auto f64 = io::read_file(DEEPDIM_TEST_DATA "/golden_f64.actv");
  EXPECT_EQ(encode_activations(golden(), ActivationDtype::float32), f32);
  EXPECT_EQ(encode_activations(golden(), ActivationDtype::float64), f64);
  EXPECT_EQ(decode_activations(f32), golden());
  EXPECT_EQ(decode_activations(f64), golden());
  EXPECT_EQ(f32.size(), 42u + 6 + 8 * 4);
  EXPECT_EQ(f64.size(), 42u + 6 + 8 * 8);
}

TEST(ActivationFile, HeaderFields) {
  const auto h = decode_activation_header(io::read_file(DEEPDIM_TEST_DATA "/golden_f32.actv"));
  EXPECT_EQ(h.dtype, ActivationDtype::float32);
  EXPECT_EQ(h.n, 2u);
  EXPECT_EQ(h.channels, 1u);
  EXPECT_EQ(h.height, 2u);
  EXPECT_EQ(h.width, 2u);
  EXPECT_EQ(h.layer_name, "golden");
  EXPECT_EQ(h.payload_offset, 48u);
}

TEST(ActivationFile, RandomRoundTrips) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const auto exact32 = random_layer(rng, true);
    EXPECT_EQ(decode_activations(encode_activations(exact32)), exact32);
    const auto any = random_layer(rng, false);
    EXPECT_EQ(decode_activations(encode_activations(any, ActivationDtype::float64)), any);
  }
}

TEST(ActivationFile, FileRoundTrip) {
  test::TempDir dir;
  write_activations(golden(), dir / "g.actv");
  EXPECT_EQ(read_activations(dir / "g.actv"), golden());
  EXPECT_THROW(read_activations(dir / "missing.actv"), IoError);
}

TEST(ActivationFile, ErrorKinds) {
  const auto good = io::read_file(DEEPDIM_TEST_DATA "/golden_f32.actv");

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(decode_error_kind(bad_magic), FormatErrorKind::bad_magic);

  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(decode_error_kind(bad_version), FormatErrorKind::version_mismatch);

  auto bad_dtype = good;
  bad_dtype[6] = 3;
  EXPECT_EQ(decode_error_kind(bad_dtype), FormatErrorKind::unknown_dtype);

  auto bad_rank = good;
  bad_rank[7] = 3;
  EXPECT_EQ(decode_error_kind(bad_rank), FormatErrorKind::malformed_header);

  const std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 20);
  EXPECT_EQ(decode_error_kind(short_header), FormatErrorKind::malformed_header);

  const std::vector<std::uint8_t> truncated(good.begin(), good.end() - 1);
  EXPECT_EQ(decode_error_kind(truncated), FormatErrorKind::truncated_payload);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(decode_error_kind(trailing), FormatErrorKind::trailing_data);

  auto zero_dim = good;
  std::fill(zero_dim.begin() + 8, zero_dim.begin() + 16, 0);
  EXPECT_EQ(decode_error_kind(zero_dim), FormatErrorKind::malformed_header);
}

TEST(ActivationFile, NonFiniteValuesRejectedOnDecode) {
  auto bytes = io::read_file(DEEPDIM_TEST_DATA "/golden_f32.actv");
  // Overwrite the first float with a quiet NaN.
  bytes[48] = 0x00;
  bytes[49] = 0x00;
  bytes[50] = 0xc0;
  bytes[51] = 0x7f;
  EXPECT_THROW(decode_activations(bytes), Error);
}

TEST(Ppm, WhitePixel) {
  const auto img = decode_ppm(bytes_of(std::string("P6\n1 1\n255\n") + "\xff\xff\xff"));
  EXPECT_EQ(img.height(), 1u);
  EXPECT_EQ(img.width(), 1u);
  for (std::size_t c = 0; c < 3; ++c)
    EXPECT_EQ(img.at(0, 0, c), 1.0f);
}

TEST(Ppm, HeaderCommentsAndLayout) {
  const auto img = decode_ppm(bytes_of("P6 # comment\n2 1 255\n\x00\x80\xff\x10\x20\x30"s));
  EXPECT_EQ(img.width(), 2u);
  EXPECT_FLOAT_EQ(img.at(0, 0, 1), 128.0f / 255.0f);
  EXPECT_FLOAT_EQ(img.at(0, 1, 2), 48.0f / 255.0f);
}

TEST(Ppm, RoundTripIsExactOnByteGrid) {
  std::mt19937_64 rng(5);
  std::vector<float> px(7 * 5 * 3);
  for (float& v : px)
    v = static_cast<float>(rng() % 256) / 255.0f;
  const Image img(7, 5, px);
  EXPECT_EQ(decode_ppm(encode_ppm(img)), img);
  test::TempDir dir;
  write_image(img, dir / "a.ppm");
  EXPECT_EQ(read_image(dir / "a.ppm"), img);
  EXPECT_EQ(encode_ppm(read_image(dir / "a.ppm")), encode_ppm(img));
}

TEST(Ppm, Errors) {
  const auto kind = [](const std::string& s) {
    try {
      decode_ppm(bytes_of(s));
    } catch (const FormatError& e) {
      return e.kind();
    }
    return FormatErrorKind::bad_magic;
  };
  EXPECT_EQ(kind("P3\n1 1\n255\n255 255 255\n"), FormatErrorKind::unsupported_format);
  EXPECT_EQ(kind("\x89PNG\r\n"), FormatErrorKind::unsupported_format);
  EXPECT_EQ(kind("P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00"s), FormatErrorKind::unsupported_format);
  EXPECT_EQ(kind("P6\nx 1\n255\n"), FormatErrorKind::malformed_header);
  EXPECT_EQ(kind("P6\n0 1\n255\n"), FormatErrorKind::malformed_header);
  EXPECT_EQ(kind("P6\n2 2\n255\n\x01\x02"), FormatErrorKind::truncated_payload);
}

DimensionSummary sample_summary() {
  DimensionSummary s;
  s.layer_name = "conv1";
  s.theta = 1e5;
  s.cluster_size = 100;
  s.map_indices = {0, 3, 7};
  s.per_map_dimensions = {5, 9, 0};
  s.estimated = 14;
  s.concatenated = 12;
  return s;
}

TEST(Report, EmptyReport) {
  EXPECT_EQ(report_to_csv({}), std::string(report_csv_header) + "\n");
  const auto j = nlohmann::json::parse(render_report({}, ReportFormat::json));
  EXPECT_EQ(j.at("format"), report_format_tag);
  EXPECT_TRUE(j.at("layers").empty());
}

TEST(Report, CsvRow) {
  EXPECT_EQ(report_to_csv({sample_summary()}),
            std::string(report_csv_header) + "\nconv1,1e+05,100,3,0;3;7,5;9;0,14,12,\n");
}

TEST(Report, JsonRoundTrip) {
  auto s = sample_summary();
  auto t = sample_summary();
  t.layer_name = "fc1";
  t.concatenated.reset();
  t.original = 4;
  t.spectra = {{"map 0", {1.5, 0.25, log_zero_sentinel}}};
  const std::vector<DimensionSummary> all{s, t};
  EXPECT_EQ(report_from_json(nlohmann::json::parse(render_report(all, ReportFormat::json))), all);
  test::TempDir dir;
  write_report(all, ReportFormat::json, dir / "r.json");
  EXPECT_EQ(read_report_json(dir / "r.json"), all);
  EXPECT_THROW(report_from_json(nlohmann::json{{"format", "other"}}), InvalidInput);
}

RunManifest sample_manifest() {
  RunManifest m;
  m.network_ref = "tiny.json";
  m.weights_seed = 7;
  m.augmentation.method = AugmentMethod::crop;
  m.augmentation.seed = 11;
  m.preprocessing = "none";
  m.cluster_size = 2;
  m.confidence_threshold = 0.5;
  m.class_index = 3;
  m.excluded_samples = {4, 9};
  m.activations = {{"golden", "golden.actv", {2, 1, 2, 2}}};
  return m;
}

TEST(Manifest, JsonRoundTrip) {
  const auto m = sample_manifest();
  EXPECT_EQ(manifest_from_json(manifest_to_json(m)), m);
  auto with_net = m;
  with_net.network = NetworkSpec("n", {4, 4, 3}, {{.name = "d", .kind = LayerKind::dense, .units = 2}});
  EXPECT_EQ(manifest_from_json(manifest_to_json(with_net)), with_net);
}

TEST(Manifest, ReadChecksReferencedFiles) {
  test::TempDir dir;
  const auto m = sample_manifest();
  write_manifest(m, dir / "manifest.json");
  EXPECT_THROW(read_manifest(dir / "manifest.json"), IoError);

  write_activations(golden(), dir / "golden.actv");
  EXPECT_EQ(read_manifest(dir / "manifest.json"), m);

  auto wrong = m;
  wrong.activations[0].dims[0] = 3;
  write_manifest(wrong, dir / "manifest.json");
  EXPECT_THROW(read_manifest(dir / "manifest.json"), InvalidInput);

  io::write_text(dir / "manifest.json", "{not json");
  EXPECT_THROW(read_manifest(dir / "manifest.json"), InvalidInput);
  io::write_text(dir / "manifest.json", R"({"format": "deepdim-run-manifest", "version": 9})");
  EXPECT_THROW(read_manifest(dir / "manifest.json"), InvalidInput);
}

} // namespace
} // namespace deepdim
