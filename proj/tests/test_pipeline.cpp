#include <doctest.h>

#include <filesystem>
#include <random>

#include "twistlight/io.hpp"
#include "twistlight/pipeline.hpp"

using namespace twistlight;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
json small_fork() {
  return json::parse(R"({
    "grid": {"nx": 256, "dx": 10e-6, "wavelength": 266e-9},
    "source": {"type": "gaussian", "w0": 0.6e-3},
    "elements": [
      {"type": "fork", "m": 1, "period": 100e-6},
      {"type": "lens", "f": 0.2},
      {"type": "propagate", "z": 0.2}
    ],
    "analysis": [
      {"type": "orders", "orders": [-1, 0, 1], "period": 100e-6, "f": 0.2, "span": 4},
      {"type": "efficiency"}
    ],
    "output": {"report": ""}
  })");
}

json vortex() {
  return json::parse(R"({
    "grid": {"nx": 256, "dx": 10e-6, "wavelength": 266e-9},
    "source": {"type": "laguerre_gauss", "w0": 300e-6, "ell": 2},
    "elements": [{"type": "propagate", "z": 0.05, "band_limit": "auto"}],
    "analysis": [
      {"type": "oam", "ell_min": -4, "ell_max": 4, "csv": "spec.csv"},
      {"type": "profile", "csv": "prof.csv"},
      {"type": "lobes"}
    ],
    "output": {"intensity": "out.pgm", "field": "out.bin"}
  })");
}

std::vector<std::string> problems_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& s) {
  for (const auto& p : ps)
    if (p.find(s) != std::string::npos) return true;
  return false;
}
}  // namespace

TEST_CASE("a valid configuration parses") {
  const auto cfg = parse_config(small_fork());
  CHECK(cfg.grid.nx == 256);
  CHECK(cfg.grid.ny == 256);
  CHECK(cfg.elements.size() == 3);
  CHECK(cfg.analysis.size() == 2);
  CHECK(std::get<ForkElement>(cfg.elements[0]).spec.threshold == 0.5);
}

TEST_CASE("every schema problem is reported at once") {
  json j = small_fork();
  j["grid"]["nx"] = 255;
  j["source"]["w0"] = -1;
  j["elements"][0]["m"] = "two";
  j["elements"][1]["focal"] = 0.2;
  j["elements"][2]["method"] = "fresnel";
  j["analysis"][1]["region"] = "ring";
  j["colour"] = "blue";
  const auto ps = problems_of(j);
  CHECK(mentions(ps, "grid"));
  CHECK(mentions(ps, "source.w0"));
  CHECK(mentions(ps, "elements[0].m"));
  CHECK(mentions(ps, "elements[1].focal: unknown key"));
  CHECK(mentions(ps, "elements[2].method"));
  CHECK(mentions(ps, "analysis[1].region"));
  CHECK(mentions(ps, "config.colour: unknown key"));
  CHECK(ps.size() >= 7);
}

TEST_CASE("empty or missing element lists are rejected") {
  json j = small_fork();
  j["elements"] = json::array();
  CHECK(mentions(problems_of(j), "empty"));
  j.erase("elements");
  CHECK(mentions(problems_of(j), "elements"));
  CHECK(mentions(problems_of(json::parse(R"({"elements": [{"type": "mirror"}]})")), "unknown element type"));
}

TEST_CASE("axicon needs exactly one of period and k_r") {
  json j = small_fork();
  j["elements"][0] = {{"type", "axicon"}, {"m", 3}, {"aperture", 2e-3}};
  CHECK(mentions(problems_of(j), "exactly one"));
  j["elements"][0]["period"] = 100e-6;
  CHECK(problems_of(j).empty());
}

TEST_CASE("configurations survive a json round trip") {
  for (const json& j : {small_fork(), vortex()}) {
    const auto a = parse_config(j);
    const auto b = parse_config(to_json(a));
    CHECK(to_json(a) == to_json(b));
    const auto ra = execute(a), rb = execute(b);
    CHECK((ra.output.values() == rb.output.values()).all());
    CHECK(ra.report == rb.report);
  }
}

TEST_CASE("fork pipeline reports the predicted orders") {
  const auto r = execute(parse_config(small_fork()));
  const auto& orders = r.report["analysis"][0]["orders"];
  REQUIRE(orders.size() == 3);
  for (const auto& o : orders) CHECK(o["dominant_ell"] == o["predicted_ell"]);
  CHECK(r.report["analysis"][1]["efficiency"].get<double>() <= 1.0 + 1e-9);
  CHECK(r.report["energy_out"].get<double>() <= r.report["energy_in"].get<double>());
}

TEST_CASE("runtime failures name the element") {
  json j = small_fork();
  j["elements"][1]["f"] = 1e-4;  // lens aliasing
  try {
    execute(parse_config(j));
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "element");
    CHECK(e.index() == 1);
    CHECK(std::string(e.what()).find("lens") != std::string::npos);
  }
  json k = vortex();
  k["source"]["ell"] = 0;  // round gaussian: no fringes to count
  k["analysis"] = json::array({{{"type", "fringes"}}});
  CHECK_THROWS_AS(execute(parse_config(k)), StageError);
}

TEST_CASE("runs are deterministic and write the requested files") {
  const fs::path dir = fs::temp_directory_path() / ("twl_pipe_" + std::to_string(std::random_device{}()));
  const auto cfg = parse_config(vortex());
  const json a = run_pipeline(cfg, dir / "a");
  const json b = run_pipeline(cfg, dir / "b");
  CHECK(a == b);
  for (const char* name : {"report.json", "spec.csv", "prof.csv", "out.pgm", "out.bin"})
    CHECK(io::read_bytes(dir / "a" / name) == io::read_bytes(dir / "b" / name));
  CHECK(a["analysis"][0]["spectrum"]["dominant_ell"] == 2);
  CHECK(a["analysis"][2]["lobes"]["n_lobes"] == 0);
  const auto f = io::read_field(dir / "a" / "out.bin");
  CHECK((f.values() == execute(cfg).output.values()).all());
  fs::remove_all(dir);
}

TEST_CASE("load_config reports invalid json") {
  const fs::path p = fs::temp_directory_path() / "twl_bad_config.json";
  io::write_text_atomic(p, "{ not json");
  CHECK_THROWS_AS(load_config(p), ConfigError);
  fs::remove(p);
}
