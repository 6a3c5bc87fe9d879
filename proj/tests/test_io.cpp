#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "support.hpp"

namespace phaseforge {
namespace {

namespace fs = std::filesystem;

template <typename F>
std::string error_text(F&& f, ErrorCode expected) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return {};
}

TEST(FormatDecimal, FixedNotationTrimmed) {
  EXPECT_EQ(io::format_decimal(0.0), "0");
  EXPECT_EQ(io::format_decimal(-0.0), "0");
  EXPECT_EQ(io::format_decimal(1.5), "1.5");
  EXPECT_EQ(io::format_decimal(-2.0), "-2");
  EXPECT_EQ(io::format_decimal(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::format_decimal(8.3127872e-3), "0.0083127872");
  EXPECT_EQ(io::format_decimal(1.23456789e-7), "0.000000123456789");
  EXPECT_EQ(io::format_decimal(98174.7704246810), "98174.7704247");
  EXPECT_EQ(io::format_decimal(1e20).find('e'), std::string::npos);
}

TEST(FormatDecimal, RoundTripsToTwelveDigits) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> mant(1.0, 10.0);
  std::uniform_int_distribution<int> ex(-9, 6);
  for (int k = 0; k < 500; ++k) {
    const double v = mant(rng) * std::pow(10.0, ex(rng)) * (k % 2 ? -1 : 1);
    const double back = std::stod(io::format_decimal(v));
    EXPECT_NEAR(back, v, 1e-11 * std::abs(v));
  }
}

TEST(Csv, ParsesQuotedFieldsAndLineEndings) {
  const auto t = io::parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,2,3\n4,,6");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b,c", "say \"hi\""}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][2].text, "3");
  EXPECT_EQ(t.rows[0][0].offset, 22u);
  EXPECT_EQ(t.rows[1][1].text, "");
}

TEST(Csv, ErrorsCarryByteOffsets) {
  auto ragged = error_text([] { io::parse_csv("a,b\r\n1,2\r\n3\r\n"); }, ErrorCode::FileFormat);
  EXPECT_NE(ragged.find("byte offset 10"), std::string::npos) << ragged;

  auto unterminated = error_text([] { io::parse_csv("a,b\r\n\"1,2\r\n"); }, ErrorCode::FileFormat);
  EXPECT_NE(unterminated.find("byte offset 5"), std::string::npos) << unterminated;

  auto stray = error_text([] { io::parse_csv("a,b\r\n1x\"y,2\r\n"); }, ErrorCode::FileFormat);
  EXPECT_NE(stray.find("byte offset 7"), std::string::npos) << stray;

  error_text([] { io::parse_csv(""); }, ErrorCode::FileFormat);
}

TEST(Csv, NumbersAndHeaders) {
  const auto t = io::parse_csv("delta_drive,shift_m\r\n1.5,abc\r\n");
  EXPECT_EQ(io::parse_number(t.rows[0][0]), 1.5);
  auto bad = error_text([&] { io::parse_number(t.rows[0][1]); }, ErrorCode::FileFormat);
  EXPECT_NE(bad.find("byte offset 25"), std::string::npos) << bad;

  static constexpr std::string_view kWant[] = {"x", "y"};
  error_text([&] { io::expect_header(t, kWant); }, ErrorCode::FileFormat);
}

TEST(LutCsv, RoundTripAndValidation) {
  const PslmModel m = testing::bench_model();
  const DeflectionLut lut = simulate_calibration(m, default_sweep(m));
  const std::string text = io::lut_to_csv(lut);
  EXPECT_EQ(text.rfind("delta_drive,shift_m\r\n", 0), 0u);
  const DeflectionLut back = io::lut_from_csv(text);
  ASSERT_EQ(back.entries().size(), lut.entries().size());
  for (std::size_t k = 0; k < lut.entries().size(); ++k) {
    EXPECT_EQ(back.entries()[k].delta_drive, lut.entries()[k].delta_drive);
    EXPECT_NEAR(back.entries()[k].shift, lut.entries()[k].shift, 1e-11 * std::abs(lut.entries()[k].shift));
  }
  error_text([] { io::lut_from_csv("delta_drive,shift_m\r\n-1,-0.001\r\n0,0\r\n1,-0.0001\r\n"); },
             ErrorCode::NonMonotoneLut);
  error_text([] { io::lut_from_csv("shift_m,delta_drive\r\n0,0\r\n1,1\r\n"); }, ErrorCode::FileFormat);
}

TEST(SimulationCsv, ShiftsRoundTrip) {
  SimulationResult r;
  r.nominal_s = {0.1, 0.2};
  r.target_s = {0.1, 0.25};
  r.achieved_s = {0.1, 0.2499};
  r.target_shift = {0.0, 0.05};
  r.achieved_shift = {0.0, 0.0499};
  const std::string text = io::simulation_to_csv(r);
  EXPECT_EQ(text.rfind("pixel,nominal_s_m,target_s_m,achieved_s_m,target_shift_m,achieved_shift_m\r\n", 0), 0u);
  const auto s = io::shifts_from_simulation_csv(text);
  EXPECT_EQ(s.pixel, (std::vector<double>{0, 1}));
  EXPECT_EQ(s.target_shift, r.target_shift);
  EXPECT_EQ(s.achieved_shift, r.achieved_shift);
}

PhaseImage random_image(std::mt19937_64& rng, int levels) {
  std::uniform_int_distribution<int> dim(1, 40);
  PhaseImage img;
  img.width = dim(rng);
  img.height = dim(rng);
  img.levels = levels;
  std::uniform_int_distribution<int> lvl(0, levels - 1);
  for (int k = 0; k < img.width * img.height; ++k) img.pixels.push_back(static_cast<std::uint16_t>(lvl(rng)));
  return img;
}

TEST(Pgm, RoundTripsEightAndSixteenBit) {
  std::mt19937_64 rng(99);
  for (int levels : {2, 128, 256, 257, 1024, 65536}) {
    for (int k = 0; k < 20; ++k) {
      const PhaseImage img = random_image(rng, levels);
      const std::string bytes = io::encode_pgm(img);
      const PhaseImage back = io::decode_pgm(bytes);
      EXPECT_EQ(back.width, img.width);
      EXPECT_EQ(back.height, img.height);
      EXPECT_EQ(back.levels, img.levels);
      EXPECT_EQ(back.pixels, img.pixels);
      const std::size_t header = bytes.size() - img.pixels.size() * (levels > 256 ? 2u : 1u);
      EXPECT_EQ(bytes.substr(0, header), "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                                             std::to_string(levels - 1) + "\n");
    }
  }
}

TEST(Pgm, SixteenBitSamplesAreBigEndian) {
  PhaseImage img;
  img.width = 1;
  img.height = 1;
  img.levels = 65536;
  img.pixels = {0x1234};
  const std::string bytes = io::encode_pgm(img);
  EXPECT_EQ(bytes.substr(bytes.size() - 2), std::string("\x12\x34"));
}

TEST(Pgm, AcceptsCommentsInHeader) {
  const std::string bytes = std::string("P5\n# made elsewhere\n2 1\n255\n") + '\x07' + '\xff';
  const PhaseImage img = io::decode_pgm(bytes);
  EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{7, 255}));
}

TEST(Pgm, ErrorsCarryByteOffsets) {
  auto magic = error_text([] { io::decode_pgm("P2\n1 1\n255\n\x01"); }, ErrorCode::FileFormat);
  EXPECT_NE(magic.find("PGM byte offset 0"), std::string::npos);

  auto width = error_text([] { io::decode_pgm("P5\nx 1\n255\n\x01"); }, ErrorCode::FileFormat);
  EXPECT_NE(width.find("PGM byte offset 3"), std::string::npos) << width;

  auto short_raster = error_text([] { io::decode_pgm("P5\n2 2\n255\n\x01\x02\x03"); }, ErrorCode::FileFormat);
  EXPECT_NE(short_raster.find("expected 4"), std::string::npos) << short_raster;

  auto over = error_text([] { io::decode_pgm(std::string("P5\n2 1\n100\n") + '\x05' + '\x65'); }, ErrorCode::FileFormat);
  EXPECT_NE(over.find("PGM byte offset 12"), std::string::npos) << over;
}

TEST(WriteFileAtomic, ReplacesContentsAndLeavesNoTemporary) {
  const fs::path dir = fs::temp_directory_path() / "phaseforge_io_test";
  fs::create_directories(dir);
  const fs::path p = dir / "out.txt";
  io::write_file_atomic(p, "first");
  io::write_file_atomic(p, "second");
  EXPECT_EQ(io::read_file(p), "second");
  EXPECT_FALSE(fs::exists(dir / "out.txt.tmp"));
  error_text([&] { io::read_file(dir / "missing.txt"); }, ErrorCode::IoError);
  error_text([&] { io::write_file_atomic(dir / "no_such_dir" / "x.txt", "x"); }, ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST(Config, DemoRoundTripsThroughJson) {
  const auto cfg = testing::demo_scenario();
  const auto again = parse_config(config_to_json(cfg));
  EXPECT_EQ(config_to_json(again), config_to_json(cfg));
  EXPECT_EQ(again.projector.n_cols, 240);
  EXPECT_EQ(again.compile.rows, 32);
}

TEST(Config, ShippedConfigsMatchTheBuiltInDemos) {
  for (const char* name : {"bent-surface", "flat"}) {
    const fs::path p = fs::path(PHASEFORGE_CONFIG_DIR) / (std::string(name) + ".json");
    EXPECT_EQ(config_to_json(load_config(p)), config_to_json(parse_config(cli::demo_config_json(name)))) << p;
  }
}

TEST(Config, ErrorsNameTheField) {
  auto with = [](auto&& edit) {
    auto j = cli::demo_config_json("bent-surface");
    edit(j);
    return error_text([&] { parse_config(j); }, ErrorCode::ConfigError);
  };
  EXPECT_EQ(with([](auto& j) { j["pslm"]["levels"] = 1; }).rfind("ConfigError: pslm.levels", 0), 0u);
  EXPECT_NE(with([](auto& j) { j["pslm"]["levels"] = 2.5; }).find("pslm.levels"), std::string::npos);
  EXPECT_NE(with([](auto& j) { j["pslm"]["colour"] = 1; }).find("pslm.colour: unknown key"), std::string::npos);
  EXPECT_NE(with([](auto& j) { j.erase("surface"); }).find("surface: missing"), std::string::npos);
  EXPECT_NE(with([](auto& j) { j["projector"]["n_cols"] = 1; }).find("projector.n_cols"), std::string::npos);
  EXPECT_NE(with([](auto& j) { j["surface"]["vertices"][1] = {0.0}; }).find("surface.vertices[1]"),
            std::string::npos);
  EXPECT_NE(with([](auto& j) { j["compile"]["wrap_mode"] = "fold"; }).find("compile.wrap_mode"), std::string::npos);
  EXPECT_NE(with([](auto& j) { j["compile"]["sweep_steps"] = 4; }).find("compile.sweep_steps"), std::string::npos);
  EXPECT_NE(with([](auto& j) { j["surface"]["vertices"] = {{-0.1, 1.0}, {0.1, 1.0}}; }).find("surface.vertices"),
            std::string::npos);
}

TEST(Config, MalformedJsonIsAConfigError) {
  const fs::path p = fs::temp_directory_path() / "phaseforge_bad_config.json";
  io::write_file_atomic(p, "{\"projector\": ");
  error_text([&] { load_config(p); }, ErrorCode::ConfigError);
  fs::remove(p);
}

TEST(Svg, PlotContainsBothSeries) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> ty = {0.0, 1e-3, 2e-3, 0.0};
  const std::vector<double> ay = {0.0, 0.9e-3, 2.1e-3, 0.0};
  const svg::Series target{"target", "#1f77b4", ty};
  const svg::Series achieved{"achieved", "#d62728", ay};
  const std::string doc = svg::shift_plot(x, target, achieved);
  EXPECT_EQ(doc.rfind("<?xml", 0), 0u);
  EXPECT_NE(doc.find("<svg"), std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t p = doc.find("<polyline"); p != std::string::npos; p = doc.find("<polyline", p + 1)) ++polylines;
  EXPECT_EQ(polylines, 2u);
  EXPECT_NE(doc.find(">target<"), std::string::npos);
  EXPECT_NE(doc.find(">achieved<"), std::string::npos);
  EXPECT_THROW(svg::shift_plot(std::span<const double>{}, target, achieved), Error);
}

}  // namespace
}  // namespace phaseforge
