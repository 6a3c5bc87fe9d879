#pragma once

// File formats: RFC-4180 CSV with a header row, binary PGM (P5), and atomic
// writes (temp file + rename).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "phaseforge/compiler.hpp"
#include "phaseforge/device.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/simulator.hpp"

namespace phaseforge::io {

/// Plain decimal (never exponent) with `significant` significant digits,
/// trailing zeros trimmed.
inline std::string format_decimal(double v, int significant = 12) {
  if (v == 0.0 || !std::isfinite(v)) return v == 0.0 ? "0" : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const int decimals = std::max(0, significant - 1 - magnitude);
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

// ---------------------------------------------------------------------------
// CSV

struct CsvField {
  std::string text;
  std::size_t offset = 0;  // byte offset of the field start
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvField>> rows;
};

inline CsvTable parse_csv(std::string_view data) {
  std::vector<std::vector<CsvField>> records;
  std::vector<CsvField> record;
  std::size_t i = 0;
  const std::size_t n = data.size();
  auto fail = [](std::size_t at, const std::string& what) {
    throw Error(ErrorCode::FileFormat, "CSV byte offset " + std::to_string(at) + ": " + what);
  };
  while (i < n) {
    CsvField field;
    field.offset = i;
    if (data[i] == '"') {
      ++i;
      while (true) {
        if (i >= n) fail(field.offset, "unterminated quoted field");
        if (data[i] == '"') {
          if (i + 1 < n && data[i + 1] == '"') {
            field.text += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field.text += data[i++];
      }
      if (i < n && data[i] != ',' && data[i] != '\r' && data[i] != '\n') fail(i, "garbage after quoted field");
    } else {
      while (i < n && data[i] != ',' && data[i] != '\r' && data[i] != '\n') {
        if (data[i] == '"') fail(i, "quote inside unquoted field");
        field.text += data[i++];
      }
    }
    record.push_back(std::move(field));
    if (i < n && data[i] == ',') {
      ++i;
      if (i == n) record.push_back({"", i});
      continue;
    }
    if (i < n && data[i] == '\r') ++i;
    if (i < n && data[i] == '\n') ++i;
    records.push_back(std::move(record));
    record.clear();
  }
  if (!record.empty()) records.push_back(std::move(record));
  if (records.empty()) fail(0, "empty file");
  CsvTable table;
  for (auto& f : records.front()) table.header.push_back(f.text);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      fail(records[r].front().offset, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                          std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

inline double parse_number(const CsvField& f) {
  double v = 0.0;
  const char* begin = f.text.data();
  const char* end = begin + f.text.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || f.text.empty()) {
    throw Error(ErrorCode::FileFormat,
                "CSV byte offset " + std::to_string(f.offset) + ": '" + f.text + "' is not a number");
  }
  return v;
}

inline void expect_header(const CsvTable& t, std::span<const std::string_view> expected) {
  bool ok = t.header.size() == expected.size();
  for (std::size_t k = 0; ok && k < expected.size(); ++k) ok = t.header[k] == expected[k];
  if (!ok) {
    std::string want;
    for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
    throw Error(ErrorCode::FileFormat, "CSV byte offset 0: header must be '" + want + "'");
  }
}

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << "\r\n";
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << "\r\n";
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_decimal(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }

  std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// LUT CSV: delta_drive,shift_m

inline std::string lut_to_csv(const DeflectionLut& lut) {
  CsvWriter w{"delta_drive", "shift_m"};
  for (const auto& e : lut.entries()) w.row(e.delta_drive, e.shift);
  return w.str();
}

inline DeflectionLut lut_from_csv(std::string_view data) {
  const CsvTable t = parse_csv(data);
  static constexpr std::string_view kHeader[] = {"delta_drive", "shift_m"};
  expect_header(t, kHeader);
  std::vector<LutEntry> entries;
  for (const auto& row : t.rows) entries.push_back({parse_number(row[0]), parse_number(row[1])});
  return DeflectionLut(std::move(entries));
}

// ---------------------------------------------------------------------------
// Plan CSV: pixel,deflection_rad,delta_drive,slope_rad_per_m

inline std::string plan_to_csv(const TargetPlan& targets, const SlopePlan& slopes) {
  CsvWriter w{"pixel", "deflection_rad", "delta_drive", "slope_rad_per_m"};
  for (std::size_t i = 0; i < slopes.size(); ++i) w.row(i, targets.deflection[i], slopes.delta_drive[i], slopes.slope[i]);
  return w.str();
}

// ---------------------------------------------------------------------------
// Simulation CSV

inline constexpr std::string_view kSimHeader[] = {"pixel",        "nominal_s_m",    "target_s_m",
                                                  "achieved_s_m", "target_shift_m", "achieved_shift_m"};

inline std::string simulation_to_csv(const SimulationResult& r) {
  CsvWriter w{kSimHeader[0], kSimHeader[1], kSimHeader[2], kSimHeader[3], kSimHeader[4], kSimHeader[5]};
  for (std::size_t i = 0; i < r.size(); ++i) {
    w.row(i, r.nominal_s[i], r.target_s[i], r.achieved_s[i], r.target_shift[i], r.achieved_shift[i]);
  }
  return w.str();
}

struct ShiftSeries {
  std::vector<double> pixel;
  std::vector<double> target_shift;
  std::vector<double> achieved_shift;
};

inline ShiftSeries shifts_from_simulation_csv(std::string_view data) {
  const CsvTable t = parse_csv(data);
  expect_header(t, kSimHeader);
  ShiftSeries s;
  for (const auto& row : t.rows) {
    s.pixel.push_back(parse_number(row[0]));
    s.target_shift.push_back(parse_number(row[4]));
    s.achieved_shift.push_back(parse_number(row[5]));
  }
  return s;
}

inline std::string cells_to_csv(std::span<const double> cells, int cell_px) {
  CsvWriter w{"cell", "first_pixel", "length_m"};
  for (std::size_t j = 0; j < cells.size(); ++j) w.row(j, j * static_cast<std::size_t>(cell_px), cells[j]);
  return w.str();
}

// ---------------------------------------------------------------------------
// PGM (P5)

inline std::string encode_pgm(const PhaseImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n" +
                    std::to_string(image.maxval()) + "\n";
  const bool wide = image.maxval() > 255;
  out.reserve(out.size() + image.pixels.size() * (wide ? 2 : 1));
  for (std::uint16_t v : image.pixels) {
    if (wide) out += static_cast<char>(v >> 8);
    out += static_cast<char>(v & 0xff);
  }
  return out;
}

inline PhaseImage decode_pgm(std::string_view data) {
  std::size_t pos = 0;
  auto fail = [](std::size_t at, const std::string& what) -> void {
    throw Error(ErrorCode::FileFormat, "PGM byte offset " + std::to_string(at) + ": " + what);
  };
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (data[pos] == ' ' || data[pos] == '\t' || data[pos] == '\r' || data[pos] == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) -> long {
    skip_space();
    const std::size_t start = pos;
    long v = 0;
    auto res = std::from_chars(data.data() + pos, data.data() + data.size(), v);
    if (res.ec != std::errc() || v <= 0) fail(start, std::string("expected positive ") + what);
    pos = static_cast<std::size_t>(res.ptr - data.data());
    return v;
  };
  if (data.substr(0, 2) != "P5") fail(0, "missing P5 magic");
  pos = 2;
  const long width = read_uint("width");
  const long height = read_uint("height");
  const long maxval = read_uint("maxval");
  if (maxval > 65535) fail(pos, "maxval above 65535");
  if (pos >= data.size() || !(data[pos] == ' ' || data[pos] == '\n' || data[pos] == '\r' || data[pos] == '\t')) {
    fail(pos, "expected single whitespace before raster");
  }
  ++pos;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data.size() - pos != count * bytes_per) {
    fail(std::min(data.size(), pos + count * bytes_per), "raster size " + std::to_string(data.size() - pos) +
                                                             " bytes, expected " + std::to_string(count * bytes_per));
  }
  PhaseImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.levels = static_cast<int>(maxval) + 1;
  img.pixels.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t at = pos + k * bytes_per;
    std::uint16_t v = static_cast<unsigned char>(data[at]);
    if (bytes_per == 2) v = static_cast<std::uint16_t>((v << 8) | static_cast<unsigned char>(data[at + 1]));
    if (v > maxval) fail(at, "sample " + std::to_string(v) + " above maxval");
    img.pixels[k] = v;
  }
  return img;
}

}  // namespace phaseforge::io
