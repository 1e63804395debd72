#include "twistlight/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace twistlight::io {
namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw IoError(path.string() + ": " + what);
}

// Minimal Netpbm header reader. Collects comment lines so the PGM scale can be recovered.
struct NetpbmHeader {
  std::string magic;
  long width = 0, height = 0, maxval = 1;
  std::vector<std::string> comments;
  std::size_t data_offset = 0;
};

NetpbmHeader parse_netpbm(const fs::path& path, const std::string& bytes, bool has_maxval) {
  NetpbmHeader h;
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        const std::size_t end = bytes.find('\n', pos);
        if (end == std::string::npos) fail(path, "truncated header");
        h.comments.push_back(bytes.substr(pos + 1, end - pos - 1));
        pos = end + 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_number = [&]() -> long {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos++] - '0');
      if (++digits > 9) fail(path, "header number too large");
    }
    if (digits == 0) fail(path, "malformed or truncated header");
    return v;
  };
  if (bytes.size() < 2) fail(path, "truncated header");
  h.magic = bytes.substr(0, 2);
  pos = 2;
  h.width = read_number();
  h.height = read_number();
  if (has_maxval) h.maxval = read_number();
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    fail(path, "truncated header");
  h.data_offset = pos + 1;
  if (h.width <= 0 || h.height <= 0) fail(path, "non-positive image size");
  return h;
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(char((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32le(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= std::uint32_t(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}

void put_f64le(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int b = 0; b < 8; ++b) out.push_back(char((v >> (8 * b)) & 0xff));
}

double get_f64le(const char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(v);
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) fail(path, "read error");
  return s.str();
}

void write_bytes_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(path, "write error");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(path, "cannot move into place");
  }
}

void write_text_atomic(const fs::path& path, const std::string& text) { write_bytes_atomic(path, text); }

FileKind sniff(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  char head[8] = {};
  in.read(head, 8);
  const auto n = in.gcount();
  if (n == 8 && std::memcmp(head, kFieldMagic, 8) == 0) return FileKind::raw_field;
  if (n >= 2 && head[0] == 'P' && head[1] == '5') return FileKind::pgm16;
  if (n >= 2 && head[0] == 'P' && head[1] == '4') return FileKind::pbm;
  return FileKind::unknown;
}

// ---------------------------------------------------------------- PBM

void write_pbm(const fs::path& path, const BinaryMask<double>& mask) {
  const Index w = mask.bits.cols(), h = mask.bits.rows();
  std::string out = "P4\n" + std::to_string(w) + " " + std::to_string(h) + "\n";
  const Index stride = (w + 7) / 8;
  std::string row(std::size_t(stride), '\0');
  for (Index j = 0; j < h; ++j) {
    std::fill(row.begin(), row.end(), '\0');
    for (Index i = 0; i < w; ++i)
      if (mask.bits(j, i)) row[std::size_t(i / 8)] |= char(0x80u >> (i % 8));
    out += row;
  }
  write_bytes_atomic(path, out);
}

MaskArray read_pbm(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  if (bytes.rfind("P4", 0) != 0) fail(path, "not a PBM file (expected magic bytes 'P4')");
  const NetpbmHeader h = parse_netpbm(path, bytes, false);
  const std::size_t stride = std::size_t((h.width + 7) / 8);
  if (bytes.size() < h.data_offset + stride * std::size_t(h.height)) fail(path, "truncated PBM payload");
  MaskArray m(h.height, h.width);
  for (long j = 0; j < h.height; ++j) {
    const char* row = bytes.data() + h.data_offset + stride * std::size_t(j);
    for (long i = 0; i < h.width; ++i)
      m(j, i) = (static_cast<unsigned char>(row[i / 8]) >> (7 - i % 8)) & 1u;
  }
  return m;
}

// ---------------------------------------------------------------- PGM16

RealArray<double> Pgm16::values() const {
  const double span = scale_max - scale_min;
  return scale_min + pixels.cast<double>() * (span / 65535.0);
}

Pgm16 quantize(const RealArray<double>& values) {
  if (!values.allFinite()) throw std::invalid_argument("cannot quantise non-finite values");
  Pgm16 img;
  img.scale_min = values.minCoeff();
  img.scale_max = values.maxCoeff();
  const double span = img.scale_max - img.scale_min;
  img.pixels.resize(values.rows(), values.cols());
  for (Index j = 0; j < values.rows(); ++j)
    for (Index i = 0; i < values.cols(); ++i)
      img.pixels(j, i) = span > 0 ? std::uint16_t(std::lround((values(j, i) - img.scale_min) / span * 65535.0))
                                  : std::uint16_t(0);
  return img;
}

void write_pgm16(const fs::path& path, const Pgm16& image) {
  const Index w = image.pixels.cols(), h = image.pixels.rows();
  std::string out = "P5\n# scale " + format_double(image.scale_min) + " " +
                    format_double(image.scale_max) + "\n" + std::to_string(w) + " " +
                    std::to_string(h) + "\n65535\n";
  out.reserve(out.size() + std::size_t(2 * w * h));
  for (Index j = 0; j < h; ++j)
    for (Index i = 0; i < w; ++i) {
      out.push_back(char(image.pixels(j, i) >> 8));
      out.push_back(char(image.pixels(j, i) & 0xff));
    }
  write_bytes_atomic(path, out);
}

void write_pgm16(const fs::path& path, const RealArray<double>& values) {
  write_pgm16(path, quantize(values));
}

Pgm16 read_pgm16(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  if (bytes.rfind("P5", 0) != 0) fail(path, "not a PGM file (expected magic bytes 'P5')");
  const NetpbmHeader h = parse_netpbm(path, bytes, true);
  if (h.maxval != 65535) fail(path, "only 16-bit PGM (maxval 65535) is supported");
  if (bytes.size() < h.data_offset + std::size_t(2 * h.width * h.height)) fail(path, "truncated PGM payload");
  Pgm16 img;
  for (const std::string& c : h.comments) {
    std::istringstream s(c);
    std::string key;
    double lo, hi;
    if (s >> key >> lo >> hi && key == "scale") {
      img.scale_min = lo;
      img.scale_max = hi;
    }
  }
  img.pixels.resize(h.height, h.width);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + h.data_offset);
  for (long j = 0; j < h.height; ++j)
    for (long i = 0; i < h.width; ++i, p += 2) img.pixels(j, i) = std::uint16_t((p[0] << 8) | p[1]);
  return img;
}

// ---------------------------------------------------------------- raw field

fs::path sidecar_path(const fs::path& path) {
  fs::path s = path;
  s += ".json";
  return s;
}

void write_field(const fs::path& path, const Field<double>& field) {
  const GridSpec<double>& g = field.grid();
  std::string out(kFieldMagic, 8);
  put_u32le(out, std::uint32_t(g.nx));
  put_u32le(out, std::uint32_t(g.ny));
  out.reserve(out.size() + std::size_t(16 * g.nx * g.ny));
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      put_f64le(out, field(j, i).real());
      put_f64le(out, field(j, i).imag());
    }
  json side = {{"format", "twistlight-field"}, {"grid", to_json(g)}};
  write_text_atomic(sidecar_path(path), side.dump(2) + "\n");
  write_bytes_atomic(path, out);
}

std::pair<Index, Index> field_shape(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::string head(16, '\0');
  in.read(head.data(), 16);
  if (in.gcount() != 16 || std::memcmp(head.data(), kFieldMagic, 8) != 0)
    fail(path, "not a raw field (expected magic bytes 'TWLFIELD')");
  return {Index(get_u32le(head, 8)), Index(get_u32le(head, 12))};
}

Field<double> read_field(const fs::path& path, std::optional<GridSpec<double>> grid) {
  const std::string bytes = read_bytes(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFieldMagic, 8) != 0)
    fail(path, "not a raw field (expected magic bytes 'TWLFIELD')");
  const std::uint32_t nx = get_u32le(bytes, 8), ny = get_u32le(bytes, 12);
  const std::size_t expect = 16 + std::size_t(nx) * std::size_t(ny) * 16;
  if (bytes.size() != expect) {
    std::ostringstream msg;
    msg << (bytes.size() < expect ? "truncated" : "oversized") << " raw field: expected " << expect
        << " bytes for " << nx << "x" << ny << ", found " << bytes.size();
    fail(path, msg.str());
  }
  if (!grid) {
    const fs::path side = sidecar_path(path);
    if (!fs::exists(side)) fail(path, "missing grid sidecar " + side.string());
    try {
      grid = grid_from_json(json::parse(read_bytes(side)).at("grid"));
    } catch (const json::exception& e) {
      fail(side, std::string("bad sidecar: ") + e.what());
    }
  }
  if (grid->nx != Index(nx) || grid->ny != Index(ny)) fail(path, "header size disagrees with the grid");
  ComplexArray<double> v(ny, nx);
  const char* p = bytes.data() + 16;
  for (Index j = 0; j < Index(ny); ++j)
    for (Index i = 0; i < Index(nx); ++i, p += 16) v(j, i) = {get_f64le(p), get_f64le(p + 8)};
  return Field<double>(*grid, std::move(v));
}

// ---------------------------------------------------------------- CSV

void write_profile_csv(const fs::path& path, const RadialProfile& profile) {
  std::ostringstream s;
  s << "r_m,intensity,count\n" << std::setprecision(17);
  for (std::size_t k = 0; k < profile.values.size(); ++k)
    s << profile.bin_centers[k] << "," << profile.values[k] << "," << profile.counts[k] << "\n";
  write_text_atomic(path, s.str());
}

void write_spectrum_csv(const fs::path& path, const OamSpectrum& spectrum) {
  std::ostringstream s;
  s << "ell,power\n" << std::setprecision(17);
  for (int ell = spectrum.ell_min; ell <= spectrum.ell_max; ++ell) s << ell << "," << spectrum.at(ell) << "\n";
  write_text_atomic(path, s.str());
}

// ---------------------------------------------------------------- JSON

json to_json(const GridSpec<double>& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy}, {"wavelength", g.wavelength}};
}

GridSpec<double> grid_from_json(const json& j) {
  return GridSpec<double>(j.at("nx").get<Index>(), j.at("ny").get<Index>(), j.at("dx").get<double>(),
                          j.at("dy").get<double>(), j.at("wavelength").get<double>());
}

json to_json(const OamSpectrum& s) {
  json power = json::object();
  for (int ell = s.ell_min; ell <= s.ell_max; ++ell) power[std::to_string(ell)] = s.at(ell);
  return {{"ell_min", s.ell_min},
          {"ell_max", s.ell_max},
          {"dominant_ell", s.dominant_ell},
          {"dominant_power", s.at(s.dominant_ell)},
          {"mean_ell", s.mean_ell},
          {"bandwidth", s.bandwidth},
          {"in_range_fraction", s.in_range_fraction},
          {"range_warning", s.range_warning},
          {"power", power}};
}

json to_json(const RadialProfile& p) {
  return {{"center", {p.center.x, p.center.y}},
          {"bin_width", p.bin_width},
          {"bins", p.values.size()},
          {"peak_radius", p.peak_radius()},
          {"peak_value", p.values[p.peak_bin()]},
          {"center_value", p.values.front()}};
}

json to_json(const LobeReport& r) {
  return {{"n_lobes", r.n_lobes},
          {"ring_radius", r.ring_radius},
          {"lobe_angles", r.lobe_angles},
          {"prominence_threshold", r.prominence_threshold},
          {"modulation", r.modulation}};
}

json to_json(const FringeReport& r) {
  return {{"count", r.count},
          {"correlation", r.correlation},
          {"tilt", r.tilt},
          {"eigen_ratio", r.eigen_ratio},
          {"contrast", r.contrast}};
}

}  // namespace twistlight::io
