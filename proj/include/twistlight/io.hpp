#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "twistlight/analysis.hpp"
#include "twistlight/doe.hpp"
#include "twistlight/field.hpp"

namespace twistlight::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// 8-byte magic of the raw complex field format.
inline constexpr char kFieldMagic[9] = "TWLFIELD";

enum class FileKind { raw_field, pgm16, pbm, unknown };

/// Identifies a file from its leading bytes.
FileKind sniff(const fs::path& path);

// PBM P4: 1 bit per pixel, rows padded to whole bytes, most significant bit first.
void write_pbm(const fs::path& path, const BinaryMask<double>& mask);
MaskArray read_pbm(const fs::path& path);

using Gray16 = Eigen::Array<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Pgm16 {
  Gray16 pixels;
  double scale_min = 0;  // value of gray level 0
  double scale_max = 1;  // value of gray level 65535

  /// Pixel values mapped back to physical units.
  RealArray<double> values() const;
};

/// Linear quantisation of [min, max] onto 0..65535, big-endian, with a
/// `# scale min max` comment line.
Pgm16 quantize(const RealArray<double>& values);
void write_pgm16(const fs::path& path, const Pgm16& image);
void write_pgm16(const fs::path& path, const RealArray<double>& values);
Pgm16 read_pgm16(const fs::path& path);

// Raw field: magic, uint32 nx, uint32 ny (little-endian), then nx*ny pairs of
// little-endian float64 (re, im), row-major. The grid pitch and wavelength go
// to a JSON sidecar at <path>.json.
void write_field(const fs::path& path, const Field<double>& field);
Field<double> read_field(const fs::path& path, std::optional<GridSpec<double>> grid = {});
fs::path sidecar_path(const fs::path& path);
/// (nx, ny) from a raw field header.
std::pair<Index, Index> field_shape(const fs::path& path);

void write_profile_csv(const fs::path& path, const RadialProfile& profile);
void write_spectrum_csv(const fs::path& path, const OamSpectrum& spectrum);

/// Writes via a temporary file and rename so readers never see a partial file.
void write_text_atomic(const fs::path& path, const std::string& text);
void write_bytes_atomic(const fs::path& path, const std::string& bytes);
std::string read_bytes(const fs::path& path);

json to_json(const GridSpec<double>& grid);
GridSpec<double> grid_from_json(const json& j);
json to_json(const OamSpectrum& s);
json to_json(const RadialProfile& p);
json to_json(const LobeReport& r);
json to_json(const FringeReport& r);

}  // namespace twistlight::io
