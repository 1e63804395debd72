#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "twistlight/io.hpp"

using namespace twistlight;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("twl_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void truncate_to(const fs::path& p, std::uintmax_t n) { fs::resize_file(p, n); }
}  // namespace

TEST_CASE("pbm round trip with odd widths") {
  TempDir dir;
  std::mt19937 rng(5);
  const GridSpec<double> g(34, 20, 1e-6, 1e-6, 1e-6);  // 34 columns: rows padded to 5 bytes
  MaskArray bits(g.ny, g.nx);
  for (Index k = 0; k < bits.size(); ++k) bits(k) = std::uint8_t(rng() & 1);
  io::write_pbm(dir / "m.pbm", BinaryMask<double>(g, bits));
  CHECK(fs::file_size(dir / "m.pbm") == std::string("P4\n34 20\n").size() + 5 * 20);
  CHECK((io::read_pbm(dir / "m.pbm") == bits).all());
  CHECK(io::sniff(dir / "m.pbm") == io::FileKind::pbm);
}

TEST_CASE("pbm bit order is most significant first") {
  TempDir dir;
  const GridSpec<double> g(16, 16, 1e-6, 1e-6, 1e-6);
  MaskArray bits = MaskArray::Zero(16, 16);
  bits(0, 0) = 1;
  bits(0, 9) = 1;
  io::write_pbm(dir / "b.pbm", BinaryMask<double>(g, bits));
  const std::string raw = io::read_bytes(dir / "b.pbm");
  const std::string header = "P4\n16 16\n";
  CHECK((unsigned char)raw[header.size()] == 0x80);
  CHECK((unsigned char)raw[header.size() + 1] == 0x40);
}

TEST_CASE("pgm16 quantisation and round trip") {
  TempDir dir;
  RealArray<double> v(16, 32);
  for (Index k = 0; k < v.size(); ++k) v(k) = -2.0 + 0.01 * double(k);
  io::write_pgm16(dir / "p.pgm", v);
  const auto img = io::read_pgm16(dir / "p.pgm");
  CHECK(img.pixels.rows() == 16);
  CHECK(img.pixels.cols() == 32);
  CHECK(img.scale_min == doctest::Approx(v.minCoeff()));
  CHECK(img.scale_max == doctest::Approx(v.maxCoeff()));
  CHECK(img.pixels.minCoeff() == 0);
  CHECK(img.pixels.maxCoeff() == 65535);
  const double step = (v.maxCoeff() - v.minCoeff()) / 65535;
  CHECK((img.values() - v).abs().maxCoeff() <= 0.5 * step + 1e-12);
  CHECK(io::sniff(dir / "p.pgm") == io::FileKind::pgm16);
  // Constant maps survive without a division by zero.
  io::write_pgm16(dir / "c.pgm", RealArray<double>::Constant(16, 16, 0.7));
  CHECK((io::read_pgm16(dir / "c.pgm").values() == 0.7).all());
}

TEST_CASE("raw fields round trip bit for bit") {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(8, 40);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    const GridSpec<double> g(2 * size(rng), 2 * size(rng), 1e-6 * (1 + trial), 2e-6, 300e-9 + 1e-9 * trial);
    ComplexArray<double> v(g.ny, g.nx);
    for (Index k = 0; k < v.size(); ++k) v(k) = {n(rng) * 1e3, n(rng) * 1e-7};
    const Field<double> f(g, v);
    io::write_field(dir / "f.bin", f);
    const auto back = io::read_field(dir / "f.bin");
    CHECK(back.grid() == g);
    CHECK(std::memcmp(back.values().data(), v.data(), sizeof(std::complex<double>) * std::size_t(v.size())) == 0);
  }
  CHECK(fs::exists(io::sidecar_path(dir / "f.bin")));
  CHECK(io::sniff(dir / "f.bin") == io::FileKind::raw_field);
}

TEST_CASE("raw field header layout") {
  TempDir dir;
  const auto g = GridSpec<double>(32, 16, 1e-6, 1e-6, 500e-9);
  io::write_field(dir / "f.bin", Field<double>(g));
  const std::string raw = io::read_bytes(dir / "f.bin");
  CHECK(raw.size() == 16 + 32 * 16 * 16);
  CHECK(raw.substr(0, 8) == "TWLFIELD");
  CHECK((unsigned char)raw[8] == 32);
  CHECK((unsigned char)raw[12] == 16);
  const auto shape = io::field_shape(dir / "f.bin");
  CHECK(shape.first == 32);
  CHECK(shape.second == 16);
}

TEST_CASE("damaged raw fields are reported") {
  TempDir dir;
  const auto g = GridSpec<double>::square(16, 1e-6, 500e-9);
  io::write_field(dir / "f.bin", Field<double>(g));
  truncate_to(dir / "f.bin", 16 + 100);
  CHECK_THROWS_AS(io::read_field(dir / "f.bin"), IoError);
  truncate_to(dir / "f.bin", 5);
  CHECK_THROWS_AS(io::read_field(dir / "f.bin"), IoError);
  CHECK(io::sniff(dir / "f.bin") == io::FileKind::unknown);
  // Oversized.
  io::write_field(dir / "g.bin", Field<double>(g));
  {
    std::ofstream out(dir / "g.bin", std::ios::binary | std::ios::app);
    out << "extra";
  }
  CHECK_THROWS_AS(io::read_field(dir / "g.bin"), IoError);
  // Missing sidecar without an explicit grid.
  io::write_field(dir / "h.bin", Field<double>(g));
  fs::remove(io::sidecar_path(dir / "h.bin"));
  CHECK_THROWS_AS(io::read_field(dir / "h.bin"), IoError);
  CHECK_NOTHROW(io::read_field(dir / "h.bin", g));
  CHECK_THROWS_AS(io::read_field(dir / "missing.bin"), IoError);
}

TEST_CASE("unknown bytes sniff as unknown") {
  TempDir dir;
  io::write_text_atomic(dir / "t.txt", "hello");
  CHECK(io::sniff(dir / "t.txt") == io::FileKind::unknown);
  CHECK_THROWS_AS(io::read_pbm(dir / "t.txt"), IoError);
  CHECK_THROWS_AS(io::read_pgm16(dir / "t.txt"), IoError);
}

TEST_CASE("csv headers") {
  TempDir dir;
  RadialProfile p;
  p.bin_centers = {1e-6, 3e-6};
  p.values = {0.5, 0.25};
  p.counts = {4, 12};
  io::write_profile_csv(dir / "p.csv", p);
  const std::string prof = io::read_bytes(dir / "p.csv");
  CHECK(prof.rfind("r_m,intensity,count\n", 0) == 0);
  CHECK(std::count(prof.begin(), prof.end(), '\n') == 3);
  OamSpectrum s;
  s.ell_min = -1;
  s.ell_max = 1;
  s.power = {0.25, 0.5, 0.25};
  io::write_spectrum_csv(dir / "s.csv", s);
  const std::string spec = io::read_bytes(dir / "s.csv");
  CHECK(spec.rfind("ell,power\n-1,", 0) == 0);
}

TEST_CASE("atomic writes leave no partial file") {
  TempDir dir;
  io::write_text_atomic(dir / "a.json", "{}\n");
  io::write_text_atomic(dir / "a.json", "[1]\n");
  CHECK(io::read_bytes(dir / "a.json") == "[1]\n");
  for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().extension() != ".partial");
  CHECK_THROWS(io::write_text_atomic(dir / "no_such_dir" / "x.json", "{}"));
}

TEST_CASE("grid json round trip") {
  const GridSpec<double> g(64, 32, 2.5e-6, 3e-6, 532e-9);
  CHECK(io::grid_from_json(io::to_json(g)) == g);
  CHECK_THROWS(io::grid_from_json(nlohmann::json{{"nx", 64}}));
}
