#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include <sys/wait.h>

#include "twistlight/io.hpp"

using namespace twistlight;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
const fs::path kWork = fs::temp_directory_path() / ("twl_cli_" + std::to_string(std::random_device{}()));

int cli(const std::string& args, const std::string& tag = "last") {
  fs::create_directories(kWork);
  const std::string cmd = std::string("\"") + TWISTLIGHT_CLI + "\" " + args + " > \"" +
                          (kWork / (tag + ".out")).string() + "\" 2> \"" + (kWork / (tag + ".err")).string() + "\"";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string err(const std::string& tag = "last") { return io::read_bytes(kWork / (tag + ".err")); }
json load(const fs::path& p) { return json::parse(io::read_bytes(p)); }
std::string w(const std::string& name) { return (kWork / name).string(); }
}  // namespace

TEST_CASE("mask fork writes a half-filled mask") {
  REQUIRE(cli("mask fork --nx 512 --dx 10e-6 --m 2 --period 100e-6 --out " + w("fork")) == 0);
  const json side = load(kWork / "fork.json");
  CHECK(std::abs(side["fill_factor"].get<double>() - 0.5) <= 0.02);
  const auto bits = io::read_pbm(kWork / "fork.pbm");
  CHECK(bits.rows() == 512);
  CHECK(std::abs(bits.cast<double>().mean() - 0.5) <= 0.02);
  CHECK(io::sniff(kWork / "fork_phase.pgm") == io::FileKind::pgm16);
}

TEST_CASE("mask spp reports fabrication heights") {
  REQUIRE(cli("mask spp --nx 256 --dx 10e-6 --ell 64 --sectors 64 --n 1.49 --out " + w("spp")) == 0);
  const json side = load(kWork / "spp.json");
  CHECK(side["total_height"].get<double>() == doctest::Approx(34.74e-6).epsilon(1e-3));
  CHECK(side["step_height"].get<double>() == doctest::Approx(542.9e-9).epsilon(1e-3));
  const auto h = io::read_pgm16(kWork / "spp_height.pgm");
  CHECK(h.scale_max == doctest::Approx(side["total_height"].get<double>() * 63 / 64).epsilon(1e-9));
}

TEST_CASE("mask axicon is two-level") {
  REQUIRE(cli("mask axicon --nx 1024 --dx 10e-6 --m 3 --period 100e-6 --out " + w("ax")) == 0);
  const auto img = io::read_pgm16(kWork / "ax_phase.pgm");
  std::set<std::uint16_t> levels(img.pixels.data(), img.pixels.data() + img.pixels.size());
  CHECK(levels.size() == 2);
  const json side = load(kWork / "ax.json");
  CHECK(side["layer_thickness"].get<double>() == doctest::Approx(201.5e-9).epsilon(1e-3));
}

TEST_CASE("mask rejects undersampled gratings") {
  CHECK(cli("mask fork --nx 256 --dx 10e-6 --period 20e-6 --out " + w("bad")) != 0);
  CHECK(err().find("sampl") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "bad.pbm"));
}

TEST_CASE("run, then analyze the stored converted field") {
  REQUIRE(cli(std::string("run ") + TWISTLIGHT_CONFIGS + "/mode_conversion_1024.json --out-dir " + w("mode")) == 0);
  const json rep = load(kWork / "mode" / "report.json");
  CHECK(rep["analysis"][0]["fringes"]["count"] == 3);
  REQUIRE(cli("analyze " + w("mode/converted.bin") + " --fringes --oam -4 4 --report " + w("an.json")) == 0);
  const json an = load(kWork / "an.json");
  CHECK(an["fringes"]["count"] == 3);
  // The intensity image carries no grid; pitch must be supplied.
  CHECK(cli("analyze " + w("mode/converted.pgm") + " --fringes") != 0);
  REQUIRE(cli("analyze " + w("mode/converted.pgm") + " --fringes --dx 2.5e-6 --wavelength 266e-9", "pgm") == 0);
  CHECK(json::parse(io::read_bytes(kWork / "pgm.out"))["fringes"]["count"] == 3);
}

TEST_CASE("analyze a stored gaussian") {
  const auto g = GridSpec<double>::square(256, 10e-6, 266e-9);
  fs::create_directories(kWork);
  io::write_field(kWork / "gauss.bin", gaussian_source(g, 300e-6));
  REQUIRE(cli("analyze " + w("gauss.bin") + " --oam -3 3 --profile --csv-prefix " + w("gauss"), "gauss") == 0);
  const json out = json::parse(io::read_bytes(kWork / "gauss.out"));
  CHECK(out["oam"]["dominant_ell"] == 0);
  CHECK(io::read_bytes(kWork / "gauss_profile.csv").rfind("r_m,intensity,count", 0) == 0);
  CHECK(io::read_bytes(kWork / "gauss_spectrum.csv").rfind("ell,power", 0) == 0);
}

TEST_CASE("truncated input fails cleanly without a report") {
  const auto g = GridSpec<double>::square(64, 10e-6, 266e-9);
  fs::create_directories(kWork);
  io::write_field(kWork / "t.bin", gaussian_source(g, 100e-6));
  fs::resize_file(kWork / "t.bin", 1000);
  CHECK(cli("analyze " + w("t.bin") + " --oam -2 2 --report " + w("t.json")) == 1);
  CHECK(err().find("truncated") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "t.json"));
  io::write_text_atomic(kWork / "junk.bin", "not a field at all");
  CHECK(cli("analyze " + w("junk.bin")) == 1);
  CHECK(err().find("TWLFIELD") != std::string::npos);
}

TEST_CASE("invalid configurations exit with status 2") {
  fs::create_directories(kWork);
  io::write_text_atomic(kWork / "empty.json",
                        R"({"grid": {"nx": 64, "dx": 10e-6, "wavelength": 266e-9}, "source": {"w0": 1e-4}, "elements": []})");
  CHECK(cli("run " + w("empty.json") + " --out-dir " + w("empty_out")) == 2);
  CHECK(err().find("empty") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "empty_out" / "report.json"));
  fs::remove_all(kWork);
}
