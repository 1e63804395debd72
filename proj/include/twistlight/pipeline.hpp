#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "twistlight/analysis.hpp"
#include "twistlight/doe.hpp"
#include "twistlight/propagation.hpp"

namespace twistlight {

/// Every schema problem found in a configuration, reported together.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// A runtime failure inside one pipeline element or analysis step.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, std::size_t index, const std::string& what);
  const std::string& stage() const { return stage_; }
  std::size_t index() const { return index_; }

 private:
  std::string stage_;
  std::size_t index_;
};

enum class SourceKind { gaussian, laguerre_gauss };

struct SourceConfig {
  SourceKind kind = SourceKind::gaussian;
  double w0 = 1e-3;
  double e0 = 1.0;
  int ell = 0;  // laguerre_gauss only
};

struct ForkElement { ForkGratingSpec spec; };
struct SppElement { SppSpec spec; };  // applied with its aperture window
struct AxiconElement { AxiconSpec spec; };  // applied with its aperture window
struct ApodizationElement { ApodizationSpec spec; };
struct ApertureElement { double diameter = 0; };
struct LensElement { LensSpec lens; };
struct PropagateElement { PropagationPlan plan; };

using Element = std::variant<ForkElement, SppElement, AxiconElement, ApodizationElement,
                             ApertureElement, LensElement, PropagateElement>;

/// A diffraction order cut from a focal-plane field.
struct OrderSelect {
  int order = 1;
  double period = 100e-6;
  double focal_length = 0.2;
  std::optional<Index> half_width;
};

struct OamAnalysis {
  int ell_min = -10;
  int ell_max = 10;
  int samples = 720;
  std::optional<Point> center;
  std::optional<OrderSelect> order;
  std::string csv;
};

struct ProfileAnalysis {
  int bins = 0;  // 0: one bin per pixel pitch
  std::optional<Point> center;
  std::string csv;
};

struct LobeAnalysis {
  double prominence = 0.3;
  int samples = 720;
  std::optional<Point> center;
};

struct FringeAnalysis {};

/// OAM spectrum of several orders, each over predicted ell +- span.
struct OrdersAnalysis {
  std::vector<int> orders;
  int m = 0;  // 0: taken from the first fork element
  double period = 100e-6;
  double focal_length = 0.2;
  int span = 8;
  std::optional<Index> half_width;
};

enum class EfficiencyRegion { all, annulus, order };

struct EfficiencyAnalysis {
  EfficiencyRegion region = EfficiencyRegion::all;
  double floor = 0.01;  // annulus edge, fraction of the ring peak
  std::optional<OrderSelect> order;
};

using Analysis = std::variant<OamAnalysis, ProfileAnalysis, LobeAnalysis, FringeAnalysis,
                              OrdersAnalysis, EfficiencyAnalysis>;

struct OutputConfig {
  std::string dir = ".";
  std::string intensity;  // normalised PGM16 of the final plane
  std::string field;  // raw complex field of the final plane
  std::string report = "report.json";
};

struct PipelineConfig {
  GridSpec<double> grid;
  SourceConfig source;
  std::vector<Element> elements;
  std::vector<Analysis> analysis;
  OutputConfig output;
};

PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

struct RunResult {
  Field<double> input;  // source plane
  Field<double> output;  // after the last element
  nlohmann::json report;
};

/// Runs source, elements and analyses without touching the filesystem.
RunResult execute(const PipelineConfig& cfg);

/// execute() plus the files requested by the output block, written under
/// out_dir (or output.dir when not given). Returns the report.
nlohmann::json run_pipeline(const PipelineConfig& cfg,
                            const std::optional<std::filesystem::path>& out_dir = {});

}  // namespace twistlight
