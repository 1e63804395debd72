// twistlight command-line front end: mask synthesis, pipeline runs, stored-field analysis.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twistlight/analysis.hpp"
#include "twistlight/doe.hpp"
#include "twistlight/io.hpp"
#include "twistlight/pipeline.hpp"

namespace tl = twistlight;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GridArgs {
  long nx = 1024;
  long ny = 0;  // 0: same as nx
  double dx = 10e-6;
  double dy = 0;  // 0: same as dx
  double wavelength = 266e-9;

  tl::GridSpec<double> grid() const {
    return tl::GridSpec<double>(nx, ny ? ny : nx, dx, dy > 0 ? dy : dx, wavelength);
  }
};

void add_grid_options(CLI::App* app, GridArgs& g) {
  app->add_option("--nx", g.nx, "samples along x")->capture_default_str();
  app->add_option("--ny", g.ny, "samples along y (default: nx)");
  app->add_option("--dx", g.dx, "pixel pitch along x [m]")->capture_default_str();
  app->add_option("--dy", g.dy, "pixel pitch along y [m] (default: dx)");
  app->add_option("--wavelength", g.wavelength, "wavelength [m]")->capture_default_str();
}

// Phase folded into [0, 2 pi); values within 1e-9 rad of 2 pi fold to 0.
tl::RealArray<double> wrap_phase(const tl::RealArray<double>& phi) {
  const double two_pi = tl::kTwoPi<double>;
  return phi.unaryExpr([two_pi](double v) {
    double w = std::fmod(v, two_pi);
    if (w < 0) w += two_pi;
    if (two_pi - w < 1e-9 || w < 1e-9) w = 0;
    return w;
  });
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

struct MaskArgs {
  GridArgs grid;
  std::string out;
  // fork
  int m = 2;
  double period = 100e-6;
  double alpha = 1.0;
  std::optional<double> threshold;
  std::string encoding = "amplitude";
  // spp
  int ell = 64;
  int sectors = 64;
  double n_plate = 1.49;
  double n_medium = 1.0;
  double h0 = 0.0;
  std::optional<double> aperture;
  std::string profile = "stepped";
  // axicon
  double n_layer = 1.66;
};

int cmd_mask_fork(const MaskArgs& a) {
  const auto g = a.grid.grid();
  tl::ForkGratingSpec s;
  s.m = a.m;
  s.period = a.period;
  s.alpha = a.alpha;
  s.threshold = a.threshold.value_or(0.5 * a.alpha);
  s.encoding = a.encoding == "phase" ? tl::GratingEncoding::phase : tl::GratingEncoding::amplitude;
  const auto phase = tl::fork_phase(g, s);
  const auto mask = tl::binarize(phase, s.alpha, s.threshold);
  tl::io::write_pbm(with_suffix(a.out, ".pbm"), mask);
  tl::io::write_pgm16(with_suffix(a.out, "_phase.pgm"), wrap_phase(phase.radians));
  json side = {{"kind", "fork"},
               {"grid", tl::io::to_json(g)},
               {"spec", {{"m", s.m}, {"period", s.period}, {"alpha", s.alpha}, {"threshold", s.threshold},
                         {"encoding", a.encoding}}},
               {"fill_factor", mask.fill_factor()},
               {"files", {a.out + ".pbm", a.out + "_phase.pgm"}}};
  tl::io::write_text_atomic(with_suffix(a.out, ".json"), side.dump(2) + "\n");
  return 0;
}

int cmd_mask_spp(const MaskArgs& a) {
  const auto g = a.grid.grid();
  tl::SppSpec s;
  s.ell = a.ell;
  s.sectors = a.sectors;
  s.wavelength = a.grid.wavelength;
  s.n_plate = a.n_plate;
  s.n_medium = a.n_medium;
  s.h0 = a.h0;
  s.aperture_d = a.aperture.value_or(0.9 * std::min(g.window_x(), g.window_y()));
  s.profile = a.profile == "ramped" ? tl::SppProfile::ramped : tl::SppProfile::stepped;
  const auto maps = tl::spp_phase(g, s);
  tl::io::write_pgm16(with_suffix(a.out, "_phase.pgm"), wrap_phase(maps.phase.radians));
  tl::io::write_pgm16(with_suffix(a.out, "_height.pgm"), maps.height.meters);
  json side = {{"kind", "spp"},
               {"grid", tl::io::to_json(g)},
               {"spec", {{"ell", s.ell}, {"sectors", s.sectors}, {"wavelength", s.wavelength},
                         {"n_plate", s.n_plate}, {"n_medium", s.n_medium}, {"h0", s.h0},
                         {"aperture", s.aperture_d}, {"profile", a.profile}}},
               {"total_height", s.total_height()},
               {"step_height", s.step_height()},
               {"files", {a.out + "_phase.pgm", a.out + "_height.pgm"}}};
  tl::io::write_text_atomic(with_suffix(a.out, ".json"), side.dump(2) + "\n");
  return 0;
}

int cmd_mask_axicon(const MaskArgs& a) {
  const auto g = a.grid.grid();
  const auto s = tl::AxiconSpec::from_period(a.m, a.period, a.aperture.value_or(6e-3));
  const auto phase = tl::axicon_phase(g, s);
  // Bit set where the pi level is etched.
  tl::BinaryMask<double> mask(g, (phase.radians > 1.0).cast<std::uint8_t>());
  tl::io::write_pbm(with_suffix(a.out, ".pbm"), mask);
  tl::io::write_pgm16(with_suffix(a.out, "_phase.pgm"), phase.radians);
  json side = {{"kind", "axicon"},
               {"grid", tl::io::to_json(g)},
               {"spec", {{"m", s.m}, {"period", s.period()}, {"k_r", s.k_r}, {"aperture", s.aperture_d}}},
               {"levels", {0.0, tl::kPi<double>}},
               {"layer_index", a.n_layer},
               {"layer_thickness", tl::binary_layer_thickness(g.wavelength, a.n_layer)},
               {"fill_factor", mask.fill_factor()},
               {"files", {a.out + ".pbm", a.out + "_phase.pgm"}}};
  tl::io::write_text_atomic(with_suffix(a.out, ".json"), side.dump(2) + "\n");
  return 0;
}

struct AnalyzeArgs {
  std::string input;
  std::vector<int> oam;
  int oam_samples = 720;
  bool profile = false;
  int bins = 0;
  bool lobes = false;
  double prominence = 0.3;
  bool fringes = false;
  std::vector<double> center;
  std::string report;
  std::string csv_prefix;
  GridArgs grid;
  bool grid_given = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const fs::path in(a.input);
  const tl::io::FileKind kind = tl::io::sniff(in);
  std::optional<tl::Field<double>> field;
  std::optional<tl::IntensityMap<double>> map;
  std::optional<tl::Point> center;
  if (!a.center.empty()) center = tl::Point{a.center.at(0), a.center.at(1)};

  if (kind == tl::io::FileKind::raw_field) {
    if (a.grid_given) {
      const auto [nx, ny] = tl::io::field_shape(in);
      GridArgs g = a.grid;
      g.nx = long(nx);
      g.ny = long(ny);
      field = tl::io::read_field(in, g.grid());
    } else {
      field = tl::io::read_field(in);
    }
    map = tl::intensity(*field);
  } else if (kind == tl::io::FileKind::pgm16) {
    const tl::io::Pgm16 img = tl::io::read_pgm16(in);
    tl::GridSpec<double> g;
    if (a.grid_given) {
      g = a.grid.grid();
    } else if (fs::exists(tl::io::sidecar_path(in))) {
      g = tl::io::grid_from_json(json::parse(tl::io::read_bytes(tl::io::sidecar_path(in))).at("grid"));
    } else {
      throw tl::IoError(in.string() + ": image has no grid sidecar; pass --dx/--dy/--wavelength");
    }
    if (g.nx != img.pixels.cols() || g.ny != img.pixels.rows()) {
      g.nx = img.pixels.cols();
      g.ny = img.pixels.rows();
      g.validate();
    }
    map.emplace(g, img.values().max(0.0));
  } else {
    throw tl::IoError(in.string() +
                      ": unrecognised format (expected magic bytes 'TWLFIELD' for a raw field or 'P5' for a 16-bit PGM)");
  }

  json report = {{"input", a.input}, {"grid", tl::io::to_json(map->grid)}};
  std::vector<std::pair<fs::path, std::string>> csvs;
  const bool any = !a.oam.empty() || a.profile || a.lobes || a.fringes;
  if (!a.oam.empty()) {
    if (!field) throw tl::AnalysisError("OAM spectrum needs a complex field, not an intensity image");
    const auto s = tl::oam_spectrum(*field, a.oam.at(0), a.oam.at(1), tl::OamOptions{a.oam_samples, center});
    report["oam"] = tl::io::to_json(s);
    if (!a.csv_prefix.empty()) {
      std::ostringstream csv;
      csv << "ell,power\n" << std::setprecision(17);
      for (int ell = s.ell_min; ell <= s.ell_max; ++ell) csv << ell << "," << s.at(ell) << "\n";
      csvs.emplace_back(a.csv_prefix + "_spectrum.csv", csv.str());
    }
  }
  if (a.profile || !any) {
    const auto norm = tl::IntensityMap<double>(map->grid, map->values / std::max(map->values.maxCoeff(), 1e-300));
    const auto p = a.bins ? tl::radial_profile(norm, center, a.bins) : tl::radial_profile(norm, center);
    report["profile"] = tl::io::to_json(p);
    if (!a.csv_prefix.empty()) {
      std::ostringstream csv;
      csv << "r_m,intensity,count\n" << std::setprecision(17);
      for (std::size_t k = 0; k < p.values.size(); ++k)
        csv << p.bin_centers[k] << "," << p.values[k] << "," << p.counts[k] << "\n";
      csvs.emplace_back(a.csv_prefix + "_profile.csv", csv.str());
    }
  }
  if (a.lobes) report["lobes"] = tl::io::to_json(tl::count_ring_lobes(*map, tl::LobeOptions{720, a.prominence, center}));
  if (a.fringes) report["fringes"] = tl::io::to_json(tl::hg_fringe_analysis(*map));

  // Everything is computed before anything is written.
  for (const auto& [path, text] : csvs) tl::io::write_text_atomic(path, text);
  const std::string text = report.dump(2) + "\n";
  if (a.report.empty()) std::cout << text;
  else tl::io::write_text_atomic(a.report, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twistlight: diffractive OAM element synthesis, propagation and analysis"};
  app.require_subcommand(1);

  MaskArgs mask_args;
  CLI::App* mask = app.add_subcommand("mask", "synthesise a DOE and export PBM/PGM16 plus a JSON sidecar");
  mask->require_subcommand(1);
  CLI::App* fork = mask->add_subcommand("fork", "binary fork grating");
  CLI::App* spp = mask->add_subcommand("spp", "spiral phase plate");
  CLI::App* axicon = mask->add_subcommand("axicon", "binary spiral axicon");
  for (CLI::App* sub : {fork, spp, axicon}) {
    add_grid_options(sub, mask_args.grid);
    sub->add_option("--out", mask_args.out, "output path prefix")->required();
  }
  fork->add_option("--m", mask_args.m, "topological charge")->capture_default_str();
  fork->add_option("--period", mask_args.period, "grating period x0 [m]")->capture_default_str();
  fork->add_option("--alpha", mask_args.alpha, "modulation depth")->capture_default_str();
  fork->add_option("--threshold", mask_args.threshold, "binarisation threshold (default alpha/2)");
  fork->add_option("--encoding", mask_args.encoding, "amplitude or phase")
      ->check(CLI::IsMember({"amplitude", "phase"}))
      ->capture_default_str();
  spp->add_option("--ell", mask_args.ell, "topological charge")->capture_default_str();
  spp->add_option("--sectors", mask_args.sectors, "azimuthal sectors")->capture_default_str();
  spp->add_option("--n", mask_args.n_plate, "plate refractive index")->capture_default_str();
  spp->add_option("--n0", mask_args.n_medium, "surrounding refractive index")->capture_default_str();
  spp->add_option("--h0", mask_args.h0, "base thickness [m]")->capture_default_str();
  spp->add_option("--aperture", mask_args.aperture, "aperture diameter [m] (default 0.9 window)");
  spp->add_option("--profile", mask_args.profile, "stepped or ramped")
      ->check(CLI::IsMember({"stepped", "ramped"}))
      ->capture_default_str();
  axicon->add_option("--m", mask_args.m, "topological charge")->capture_default_str();
  axicon->add_option("--period", mask_args.period, "spiral period p [m]")->capture_default_str();
  axicon->add_option("--aperture", mask_args.aperture, "aperture diameter [m] (default 6e-3)");
  axicon->add_option("--n", mask_args.n_layer, "layer refractive index for the thickness report")
      ->capture_default_str();

  std::string config_path, out_dir;
  CLI::App* run = app.add_subcommand("run", "execute a JSON pipeline configuration");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--out-dir", out_dir, "directory for outputs (default: output.dir of the config)");

  AnalyzeArgs an;
  CLI::App* analyze = app.add_subcommand("analyze", "diagnose a stored field or intensity image");
  analyze->add_option("input", an.input, "raw field or 16-bit PGM")->required();
  analyze->add_option("--oam", an.oam, "OAM spectrum over ELL_MIN ELL_MAX")->expected(2);
  analyze->add_option("--oam-samples", an.oam_samples, "azimuthal samples per ring")->capture_default_str();
  analyze->add_flag("--profile", an.profile, "radial profile");
  analyze->add_option("--bins", an.bins, "radial bins (0: one per pixel)");
  analyze->add_flag("--lobes", an.lobes, "count ring lobes");
  analyze->add_option("--prominence", an.prominence, "lobe prominence threshold")->capture_default_str();
  analyze->add_flag("--fringes", an.fringes, "count HG fringes");
  analyze->add_option("--center", an.center, "analysis centre X Y [m]")->expected(2);
  analyze->add_option("--report", an.report, "JSON report path (default: stdout)");
  analyze->add_option("--csv-prefix", an.csv_prefix, "write <prefix>_profile.csv / <prefix>_spectrum.csv");
  GridArgs& ag = an.grid;
  CLI::Option* gx = analyze->add_option("--dx", ag.dx, "pixel pitch along x [m] (overrides sidecar)");
  analyze->add_option("--dy", ag.dy, "pixel pitch along y [m]");
  analyze->add_option("--wavelength", ag.wavelength, "wavelength [m]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*mask) {
      if (*fork) return cmd_mask_fork(mask_args);
      if (*spp) return cmd_mask_spp(mask_args);
      return cmd_mask_axicon(mask_args);
    }
    if (*run) {
      const tl::PipelineConfig cfg = tl::load_config(config_path);
      const json report =
          tl::run_pipeline(cfg, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir));
      std::cerr << "twistlight: wrote " << report["files"].size() + (cfg.output.report.empty() ? 0 : 1) << " file(s)\n";
      return 0;
    }
    an.grid_given = gx->count() > 0;
    return cmd_analyze(an);
  } catch (const tl::ConfigError& e) {
    std::cerr << "twistlight: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "twistlight: error: " << e.what() << "\n";
    return 1;
  }
}
