#include "twistlight/pipeline.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "twistlight/io.hpp"

namespace twistlight {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

// Walks the JSON document, collecting every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> problems;

  void problem(const std::string& path, const std::string& what) { problems.push_back(path + ": " + what); }

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      problem(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        problem(path + "." + key, "unknown key");
    }
    return true;
  }

  std::optional<double> number(const json& j, const char* key, const std::string& path,
                               std::optional<double> def = {}) {
    if (!j.contains(key)) {
      if (!def) problem(path + "." + key, "missing required number");
      return def;
    }
    const json& v = j.at(key);
    if (!v.is_number()) {
      problem(path + "." + key, "expected a number");
      return def;
    }
    return v.get<double>();
  }

  std::optional<long long> integer(const json& j, const char* key, const std::string& path,
                                   std::optional<long long> def = {}) {
    if (!j.contains(key)) {
      if (!def) problem(path + "." + key, "missing required integer");
      return def;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer()) {
      problem(path + "." + key, "expected an integer");
      return def;
    }
    return v.get<long long>();
  }

  std::optional<std::string> text(const json& j, const char* key, const std::string& path,
                                  std::optional<std::string> def = {},
                                  std::initializer_list<const char*> choices = {}) {
    if (!j.contains(key)) {
      if (!def) problem(path + "." + key, "missing required string");
      return def;
    }
    const json& v = j.at(key);
    if (!v.is_string()) {
      problem(path + "." + key, "expected a string");
      return def;
    }
    std::string s = v.get<std::string>();
    if (choices.size() &&
        std::none_of(choices.begin(), choices.end(), [&](const char* c) { return s == c; })) {
      std::string list;
      for (const char* c : choices) list += std::string(list.empty() ? "" : ", ") + c;
      problem(path + "." + key, "must be one of: " + list);
      return def;
    }
    return s;
  }

  std::optional<Point> point(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      problem(path + "." + key, "expected [x, y] in meters");
      return std::nullopt;
    }
    return Point{v[0].get<double>(), v[1].get<double>()};
  }

  template <typename F>
  void check(const std::string& path, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      problem(path, e.what());
    }
  }
};

const char* method_name(PropagationMethod m) { return m == PropagationMethod::exact ? "exact" : "paraxial"; }
const char* axis_name(Axis a) { return a == Axis::y ? "y" : "x"; }

std::optional<OrderSelect> read_order(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path, {"n", "period", "f", "half_width"})) return std::nullopt;
  OrderSelect o;
  o.order = int(r.integer(j, "n", path).value_or(1));
  o.period = r.number(j, "period", path).value_or(1);
  o.focal_length = r.number(j, "f", path).value_or(1);
  if (j.contains("half_width")) o.half_width = Index(r.integer(j, "half_width", path).value_or(2));
  return o;
}

json order_json(const OrderSelect& o) {
  json j = {{"n", o.order}, {"period", o.period}, {"f", o.focal_length}};
  if (o.half_width) j["half_width"] = *o.half_width;
  return j;
}

json point_json(const std::optional<Point>& p) { return json::array({p->x, p->y}); }

Element read_element(Reader& r, const json& e, const std::string& path, const GridSpec<double>& grid) {
  const std::string type = e.is_object() && e.contains("type") && e["type"].is_string()
                               ? e["type"].get<std::string>()
                               : std::string();
  if (type == "fork") {
    r.object(e, path, {"type", "m", "period", "alpha", "threshold", "encoding"});
    ForkGratingSpec s;
    s.m = int(r.integer(e, "m", path).value_or(s.m));
    s.period = r.number(e, "period", path).value_or(s.period);
    s.alpha = r.number(e, "alpha", path, 1.0).value();
    s.threshold = r.number(e, "threshold", path, 0.5 * s.alpha).value();
    s.encoding = r.text(e, "encoding", path, "amplitude", {"amplitude", "phase"}).value() == "phase"
                     ? GratingEncoding::phase
                     : GratingEncoding::amplitude;
    r.check(path, [&] { s.validate(grid); });
    return ForkElement{s};
  }
  if (type == "spp") {
    r.object(e, path, {"type", "ell", "sectors", "wavelength", "n_plate", "n_medium", "h0", "aperture", "profile"});
    SppSpec s;
    s.ell = int(r.integer(e, "ell", path).value_or(s.ell));
    s.sectors = int(r.integer(e, "sectors", path).value_or(s.sectors));
    s.wavelength = r.number(e, "wavelength", path, grid.wavelength).value();
    s.n_plate = r.number(e, "n_plate", path, s.n_plate).value();
    s.n_medium = r.number(e, "n_medium", path, s.n_medium).value();
    s.h0 = r.number(e, "h0", path, 0.0).value();
    s.aperture_d = r.number(e, "aperture", path).value_or(s.aperture_d);
    s.profile = r.text(e, "profile", path, "stepped", {"stepped", "ramped"}).value() == "ramped"
                    ? SppProfile::ramped
                    : SppProfile::stepped;
    r.check(path, [&] {
      s.validate();
      if (s.aperture_d > std::min(grid.window_x(), grid.window_y()))
        throw std::invalid_argument("aperture exceeds the grid window");
    });
    return SppElement{s};
  }
  if (type == "axicon") {
    r.object(e, path, {"type", "m", "period", "k_r", "aperture"});
    AxiconSpec s;
    s.m = int(r.integer(e, "m", path).value_or(s.m));
    if (e.contains("k_r") == e.contains("period")) {
      r.problem(path, "give exactly one of period, k_r");
    } else if (e.contains("k_r")) {
      s.k_r = r.number(e, "k_r", path).value_or(s.k_r);
    } else {
      const double p = r.number(e, "period", path).value_or(s.period());
      if (p > 0) s.k_r = kTwoPi<double> / p;
      else r.problem(path + ".period", "must be positive");
    }
    s.aperture_d = r.number(e, "aperture", path).value_or(s.aperture_d);
    r.check(path, [&] { s.validate(grid); });
    return AxiconElement{s};
  }
  if (type == "apodization") {
    r.object(e, path, {"type", "r0", "p", "rc", "q"});
    ApodizationSpec s;
    s.r0 = r.number(e, "r0", path).value_or(s.r0);
    s.p_out = r.number(e, "p", path, s.p_out).value();
    s.rc = r.number(e, "rc", path).value_or(s.rc);
    s.q_in = r.number(e, "q", path, s.q_in).value();
    r.check(path, [&] { s.validate(); });
    return ApodizationElement{s};
  }
  if (type == "aperture") {
    r.object(e, path, {"type", "diameter"});
    ApertureElement a{r.number(e, "diameter", path).value_or(1)};
    if (!(a.diameter > 0)) r.problem(path + ".diameter", "must be positive");
    return a;
  }
  if (type == "lens" || type == "cylindrical_lens") {
    const bool cyl = type == "cylindrical_lens";
    if (cyl) r.object(e, path, {"type", "f", "axis"});
    else r.object(e, path, {"type", "f"});
    LensSpec l;
    l.focal_length = r.number(e, "f", path).value_or(l.focal_length);
    l.kind = cyl ? LensKind::cylindrical : LensKind::spherical;
    if (cyl) l.axis = r.text(e, "axis", path, "x", {"x", "y"}).value() == "y" ? Axis::y : Axis::x;
    r.check(path, [&] { l.validate(); });
    return LensElement{l};
  }
  if (type == "propagate") {
    r.object(e, path, {"type", "z", "method", "band_limit"});
    PropagationPlan p;
    p.distance = r.number(e, "z", path).value_or(0);
    p.method = r.text(e, "method", path, "paraxial", {"paraxial", "exact"}).value() == "exact"
                   ? PropagationMethod::exact
                   : PropagationMethod::paraxial;
    if (e.contains("band_limit")) {
      const json& b = e["band_limit"];
      if (b.is_boolean()) p.band_limit = b.get<bool>();
      else if (!(b.is_string() && b.get<std::string>() == "auto"))
        r.problem(path + ".band_limit", "expected true, false or \"auto\"");
    }
    if (!std::isfinite(p.distance)) r.problem(path + ".z", "must be finite");
    return PropagateElement{p};
  }
  r.problem(path + ".type",
            type.empty() ? "missing element type"
                         : "unknown element type '" + type +
                               "' (fork, spp, axicon, apodization, aperture, lens, cylindrical_lens, propagate)");
  return ApertureElement{1};
}

Analysis read_analysis(Reader& r, const json& a, const std::string& path) {
  const std::string type = a.is_object() && a.contains("type") && a["type"].is_string()
                               ? a["type"].get<std::string>()
                               : std::string();
  if (type == "oam") {
    r.object(a, path, {"type", "ell_min", "ell_max", "samples", "center", "order", "csv"});
    OamAnalysis o;
    o.ell_min = int(r.integer(a, "ell_min", path).value_or(o.ell_min));
    o.ell_max = int(r.integer(a, "ell_max", path).value_or(o.ell_max));
    o.samples = int(r.integer(a, "samples", path, 720).value());
    o.center = r.point(a, "center", path);
    if (a.contains("order")) o.order = read_order(r, a["order"], path + ".order");
    o.csv = r.text(a, "csv", path, "").value();
    if (o.ell_max < o.ell_min) r.problem(path, "ell_max < ell_min");
    if (o.samples < 16) r.problem(path + ".samples", "must be >= 16");
    return o;
  }
  if (type == "profile") {
    r.object(a, path, {"type", "bins", "center", "csv"});
    ProfileAnalysis p;
    p.bins = int(r.integer(a, "bins", path, 0).value());
    p.center = r.point(a, "center", path);
    p.csv = r.text(a, "csv", path, "").value();
    if (p.bins != 0 && p.bins < 8) r.problem(path + ".bins", "must be >= 8 (or 0 for automatic)");
    return p;
  }
  if (type == "lobes") {
    r.object(a, path, {"type", "prominence", "samples", "center"});
    LobeAnalysis l;
    l.prominence = r.number(a, "prominence", path, 0.3).value();
    l.samples = int(r.integer(a, "samples", path, 720).value());
    l.center = r.point(a, "center", path);
    if (!(l.prominence >= 0 && l.prominence <= 1)) r.problem(path + ".prominence", "must lie in [0, 1]");
    if (l.samples < 16) r.problem(path + ".samples", "must be >= 16");
    return l;
  }
  if (type == "fringes") {
    r.object(a, path, {"type"});
    return FringeAnalysis{};
  }
  if (type == "orders") {
    r.object(a, path, {"type", "orders", "m", "period", "f", "span", "half_width"});
    OrdersAnalysis o;
    if (!a.contains("orders") || !a["orders"].is_array() || a["orders"].empty()) {
      r.problem(path + ".orders", "expected a non-empty integer list");
    } else {
      for (const json& n : a["orders"]) {
        if (n.is_number_integer()) o.orders.push_back(n.get<int>());
        else r.problem(path + ".orders", "expected integers");
      }
    }
    o.m = int(r.integer(a, "m", path, 0).value());
    o.period = r.number(a, "period", path).value_or(o.period);
    o.focal_length = r.number(a, "f", path).value_or(o.focal_length);
    o.span = int(r.integer(a, "span", path, 8).value());
    if (a.contains("half_width")) o.half_width = Index(r.integer(a, "half_width", path).value_or(2));
    return o;
  }
  if (type == "efficiency") {
    r.object(a, path, {"type", "region", "floor", "order"});
    EfficiencyAnalysis e;
    const std::string region = r.text(a, "region", path, "all", {"all", "annulus", "order"}).value();
    e.region = region == "annulus" ? EfficiencyRegion::annulus
               : region == "order" ? EfficiencyRegion::order
                                   : EfficiencyRegion::all;
    e.floor = r.number(a, "floor", path, 0.01).value();
    if (a.contains("order")) e.order = read_order(r, a["order"], path + ".order");
    if (e.region == EfficiencyRegion::order && !e.order) r.problem(path + ".order", "required for region 'order'");
    return e;
  }
  r.problem(path + ".type", type.empty() ? "missing analysis type"
                                         : "unknown analysis type '" + type +
                                               "' (oam, profile, lobes, fringes, orders, efficiency)");
  return FringeAnalysis{};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join_problems(problems)), problems_(std::move(problems)) {}

StageError::StageError(std::string stage, std::size_t index, const std::string& what)
    : std::runtime_error(stage + " " + std::to_string(index) + ": " + what), stage_(std::move(stage)), index_(index) {}

PipelineConfig parse_config(const json& j) {
  Reader r;
  PipelineConfig cfg;
  if (!r.object(j, "config", {"grid", "source", "elements", "analysis", "output"})) throw ConfigError(r.problems);

  if (!j.contains("grid")) {
    r.problem("grid", "missing");
  } else if (r.object(j["grid"], "grid", {"nx", "ny", "dx", "dy", "wavelength"})) {
    const json& g = j["grid"];
    const long long nx = r.integer(g, "nx", "grid").value_or(1024);
    const long long ny = r.integer(g, "ny", "grid", nx).value();
    const double dx = r.number(g, "dx", "grid").value_or(5e-6);
    const double dy = r.number(g, "dy", "grid", dx).value();
    const double lam = r.number(g, "wavelength", "grid").value_or(266e-9);
    r.check("grid", [&] { cfg.grid = GridSpec<double>(Index(nx), Index(ny), dx, dy, lam); });
  }

  if (!j.contains("source")) {
    r.problem("source", "missing");
  } else if (r.object(j["source"], "source", {"type", "w0", "e0", "ell"})) {
    const json& s = j["source"];
    const std::string kind = r.text(s, "type", "source", "gaussian", {"gaussian", "laguerre_gauss"}).value();
    cfg.source.kind = kind == "laguerre_gauss" ? SourceKind::laguerre_gauss : SourceKind::gaussian;
    cfg.source.w0 = r.number(s, "w0", "source").value_or(cfg.source.w0);
    cfg.source.e0 = r.number(s, "e0", "source", 1.0).value();
    cfg.source.ell = int(r.integer(s, "ell", "source", 0).value());
    if (cfg.source.kind == SourceKind::gaussian && cfg.source.ell != 0)
      r.problem("source.ell", "only valid for laguerre_gauss sources");
    if (!(cfg.source.w0 > 0)) r.problem("source.w0", "must be positive");
    else if (cfg.source.w0 < 4 * cfg.grid.max_pitch()) r.problem("source.w0", "waist resolved by fewer than 4 pixels");
  }

  if (!j.contains("elements") || !j["elements"].is_array()) {
    r.problem("elements", "expected a list of elements");
  } else if (j["elements"].empty()) {
    r.problem("elements", "element list is empty");
  } else {
    for (std::size_t i = 0; i < j["elements"].size(); ++i)
      cfg.elements.push_back(read_element(r, j["elements"][i], "elements[" + std::to_string(i) + "]", cfg.grid));
  }

  if (j.contains("analysis")) {
    if (!j["analysis"].is_array()) {
      r.problem("analysis", "expected a list");
    } else {
      for (std::size_t i = 0; i < j["analysis"].size(); ++i)
        cfg.analysis.push_back(read_analysis(r, j["analysis"][i], "analysis[" + std::to_string(i) + "]"));
    }
  }

  if (j.contains("output") && r.object(j["output"], "output", {"dir", "intensity", "field", "report"})) {
    const json& o = j["output"];
    cfg.output.dir = r.text(o, "dir", "output", ".").value();
    cfg.output.intensity = r.text(o, "intensity", "output", "").value();
    cfg.output.field = r.text(o, "field", "output", "").value();
    cfg.output.report = r.text(o, "report", "output", "report.json").value();
  }

  if (!r.problems.empty()) throw ConfigError(r.problems);
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_bytes(path));
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": not valid JSON (" + e.what() + ")"});
  }
  return parse_config(j);
}

json to_json(const PipelineConfig& cfg) {
  json j;
  j["grid"] = io::to_json(cfg.grid);
  j["source"] = {{"type", cfg.source.kind == SourceKind::laguerre_gauss ? "laguerre_gauss" : "gaussian"},
                 {"w0", cfg.source.w0},
                 {"e0", cfg.source.e0}};
  if (cfg.source.kind == SourceKind::laguerre_gauss) j["source"]["ell"] = cfg.source.ell;

  json elements = json::array();
  for (const Element& el : cfg.elements) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, ForkElement>) {
            elements.push_back({{"type", "fork"}, {"m", e.spec.m}, {"period", e.spec.period},
                                {"alpha", e.spec.alpha}, {"threshold", e.spec.threshold},
                                {"encoding", e.spec.encoding == GratingEncoding::phase ? "phase" : "amplitude"}});
          } else if constexpr (std::is_same_v<T, SppElement>) {
            elements.push_back({{"type", "spp"}, {"ell", e.spec.ell}, {"sectors", e.spec.sectors},
                                {"wavelength", e.spec.wavelength}, {"n_plate", e.spec.n_plate},
                                {"n_medium", e.spec.n_medium}, {"h0", e.spec.h0},
                                {"aperture", e.spec.aperture_d},
                                {"profile", e.spec.profile == SppProfile::ramped ? "ramped" : "stepped"}});
          } else if constexpr (std::is_same_v<T, AxiconElement>) {
            elements.push_back({{"type", "axicon"}, {"m", e.spec.m}, {"k_r", e.spec.k_r},
                                {"aperture", e.spec.aperture_d}});
          } else if constexpr (std::is_same_v<T, ApodizationElement>) {
            elements.push_back({{"type", "apodization"}, {"r0", e.spec.r0}, {"p", e.spec.p_out},
                                {"rc", e.spec.rc}, {"q", e.spec.q_in}});
          } else if constexpr (std::is_same_v<T, ApertureElement>) {
            elements.push_back({{"type", "aperture"}, {"diameter", e.diameter}});
          } else if constexpr (std::is_same_v<T, LensElement>) {
            if (e.lens.kind == LensKind::cylindrical)
              elements.push_back({{"type", "cylindrical_lens"}, {"f", e.lens.focal_length}, {"axis", axis_name(e.lens.axis)}});
            else
              elements.push_back({{"type", "lens"}, {"f", e.lens.focal_length}});
          } else {
            json p = {{"type", "propagate"}, {"z", e.plan.distance}, {"method", method_name(e.plan.method)}};
            p["band_limit"] = e.plan.band_limit ? json(*e.plan.band_limit) : json("auto");
            elements.push_back(p);
          }
        },
        el);
  }
  j["elements"] = elements;

  json analysis = json::array();
  for (const Analysis& an : cfg.analysis) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          json o;
          if constexpr (std::is_same_v<T, OamAnalysis>) {
            o = {{"type", "oam"}, {"ell_min", a.ell_min}, {"ell_max", a.ell_max}, {"samples", a.samples}};
            if (a.center) o["center"] = point_json(a.center);
            if (a.order) o["order"] = order_json(*a.order);
            if (!a.csv.empty()) o["csv"] = a.csv;
          } else if constexpr (std::is_same_v<T, ProfileAnalysis>) {
            o = {{"type", "profile"}, {"bins", a.bins}};
            if (a.center) o["center"] = point_json(a.center);
            if (!a.csv.empty()) o["csv"] = a.csv;
          } else if constexpr (std::is_same_v<T, LobeAnalysis>) {
            o = {{"type", "lobes"}, {"prominence", a.prominence}, {"samples", a.samples}};
            if (a.center) o["center"] = point_json(a.center);
          } else if constexpr (std::is_same_v<T, FringeAnalysis>) {
            o = {{"type", "fringes"}};
          } else if constexpr (std::is_same_v<T, OrdersAnalysis>) {
            o = {{"type", "orders"}, {"orders", a.orders}, {"m", a.m}, {"period", a.period},
                 {"f", a.focal_length}, {"span", a.span}};
            if (a.half_width) o["half_width"] = *a.half_width;
          } else {
            o = {{"type", "efficiency"},
                 {"region", a.region == EfficiencyRegion::annulus ? "annulus"
                            : a.region == EfficiencyRegion::order ? "order"
                                                                  : "all"},
                 {"floor", a.floor}};
            if (a.order) o["order"] = order_json(*a.order);
          }
          analysis.push_back(o);
        },
        an);
  }
  j["analysis"] = analysis;
  j["output"] = {{"dir", cfg.output.dir}, {"intensity", cfg.output.intensity},
                 {"field", cfg.output.field}, {"report", cfg.output.report}};
  return j;
}

namespace {

const char* element_name(const Element& e) {
  static const char* names[] = {"fork", "spp", "axicon", "apodization", "aperture", "lens", "propagate"};
  return names[e.index()];
}

Field<double> apply_element(const Field<double>& f, const Element& el) {
  const GridSpec<double>& g = f.grid();
  return std::visit(
      [&](const auto& e) -> Field<double> {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ForkElement>) {
          const Transmission<double> t = fork_transmission(g, e.spec);
          return apply_mask(f, t.phase, t.window);
        } else if constexpr (std::is_same_v<T, SppElement>) {
          return apply_mask(f, spp_phase(g, e.spec).phase, aperture_window(g, e.spec.aperture_d));
        } else if constexpr (std::is_same_v<T, AxiconElement>) {
          return apply_mask(f, axicon_phase(g, e.spec), aperture_window(g, e.spec.aperture_d));
        } else if constexpr (std::is_same_v<T, ApodizationElement>) {
          return apply_window(f, apodization_window(g, e.spec));
        } else if constexpr (std::is_same_v<T, ApertureElement>) {
          return apply_window(f, aperture_window(g, e.diameter));
        } else if constexpr (std::is_same_v<T, LensElement>) {
          return apply_lens(f, e.lens);
        } else {
          return propagate(f, e.plan);
        }
      },
      el);
}

const char* analysis_name(const Analysis& a) {
  static const char* names[] = {"oam", "profile", "lobes", "fringes", "orders", "efficiency"};
  return names[a.index()];
}

int first_fork_charge(const PipelineConfig& cfg) {
  for (const Element& e : cfg.elements)
    if (const auto* f = std::get_if<ForkElement>(&e)) return f->spec.m;
  return 0;
}

// Files named by analyses are collected here and written by run_pipeline.
struct PendingFile {
  std::string name;
  std::string bytes;
};

json run_analysis(const PipelineConfig& cfg, const Analysis& an, const Field<double>& input,
                  const Field<double>& output, std::vector<PendingFile>& files) {
  return std::visit(
      [&](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        json o = {{"type", analysis_name(an)}};
        if constexpr (std::is_same_v<T, OamAnalysis>) {
          const Field<double> target =
              a.order ? extract_order(output, a.order->order, a.order->period, a.order->focal_length, a.order->half_width)
                      : output;
          const OamSpectrum s = oam_spectrum(target, a.ell_min, a.ell_max, OamOptions{a.samples, a.center});
          o["spectrum"] = io::to_json(s);
          if (a.order) o["order"] = order_json(*a.order);
          if (!a.csv.empty()) {
            std::ostringstream csv;
            csv << "ell,power\n" << std::setprecision(17);
            for (int ell = s.ell_min; ell <= s.ell_max; ++ell) csv << ell << "," << s.at(ell) << "\n";
            files.push_back({a.csv, csv.str()});
          }
        } else if constexpr (std::is_same_v<T, ProfileAnalysis>) {
          const IntensityMap<double> map = intensity(output, true);
          const RadialProfile p = a.bins ? radial_profile(map, a.center, a.bins) : radial_profile(map, a.center);
          o["profile"] = io::to_json(p);
          if (!a.csv.empty()) {
            std::ostringstream csv;
            csv << "r_m,intensity,count\n" << std::setprecision(17);
            for (std::size_t k = 0; k < p.values.size(); ++k)
              csv << p.bin_centers[k] << "," << p.values[k] << "," << p.counts[k] << "\n";
            files.push_back({a.csv, csv.str()});
          }
        } else if constexpr (std::is_same_v<T, LobeAnalysis>) {
          o["lobes"] = io::to_json(count_ring_lobes(intensity(output, true), LobeOptions{a.samples, a.prominence, a.center}));
        } else if constexpr (std::is_same_v<T, FringeAnalysis>) {
          o["fringes"] = io::to_json(hg_fringe_analysis(intensity(output)));
        } else if constexpr (std::is_same_v<T, OrdersAnalysis>) {
          const int m = a.m ? a.m : first_fork_charge(cfg);
          json list = json::array();
          for (int n : a.orders) {
            const Field<double> cut = extract_order(output, n, a.period, a.focal_length, a.half_width);
            const int expect = predicted_charge(n, m);
            const OamSpectrum s = oam_spectrum(cut, expect - a.span, expect + a.span);
            list.push_back({{"order", n},
                            {"predicted_ell", expect},
                            {"dominant_ell", s.dominant_ell},
                            {"predicted_power", s.at(expect)},
                            {"efficiency", conversion_efficiency(input, cut)},
                            {"spectrum", io::to_json(s)}});
          }
          o["orders"] = list;
          o["m"] = m;
        } else {
          Region region = RegionAll{};
          if (a.region == EfficiencyRegion::annulus)
            region = main_ring_annulus(intensity(output), std::optional<Point>(Point{}), a.floor);
          else if (a.region == EfficiencyRegion::order)
            region = order_region(output.grid(), order_window(output.grid(), a.order->order, a.order->period,
                                                              a.order->focal_length, a.order->half_width));
          o["efficiency"] = conversion_efficiency(input, output, region);
          if (const auto* ann = std::get_if<RegionAnnulus>(&region)) o["annulus"] = {ann->r_in, ann->r_out};
        }
        return o;
      },
      an);
}

RunResult execute_impl(const PipelineConfig& cfg, std::vector<PendingFile>& files) {
  if (cfg.elements.empty()) throw ConfigError({"elements: element list is empty"});
  const Field<double> input =
      cfg.source.kind == SourceKind::laguerre_gauss
          ? laguerre_gauss_source(cfg.grid, cfg.source.w0, cfg.source.ell, cfg.source.e0)
          : gaussian_source(cfg.grid, cfg.source.w0, cfg.source.e0);
  Field<double> f = input;
  for (std::size_t i = 0; i < cfg.elements.size(); ++i) {
    try {
      f = apply_element(f, cfg.elements[i]);
    } catch (const std::exception& e) {
      throw StageError(std::string("element"), i, std::string(element_name(cfg.elements[i])) + ": " + e.what());
    }
  }
  json report;
  report["grid"] = io::to_json(cfg.grid);
  report["elements"] = cfg.elements.size();
  report["energy_in"] = energy(input);
  report["energy_out"] = energy(f);
  json results = json::array();
  for (std::size_t i = 0; i < cfg.analysis.size(); ++i) {
    try {
      results.push_back(run_analysis(cfg, cfg.analysis[i], input, f, files));
    } catch (const std::exception& e) {
      throw StageError(std::string("analysis"), i, std::string(analysis_name(cfg.analysis[i])) + ": " + e.what());
    }
  }
  report["analysis"] = results;
  return RunResult{input, std::move(f), std::move(report)};
}

}  // namespace

RunResult execute(const PipelineConfig& cfg) {
  std::vector<PendingFile> ignored;
  return execute_impl(cfg, ignored);
}

json run_pipeline(const PipelineConfig& cfg, const std::optional<fs::path>& out_dir) {
  std::vector<PendingFile> files;
  RunResult r = execute_impl(cfg, files);
  const fs::path dir = out_dir ? *out_dir : fs::path(cfg.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": cannot create output directory");
  json written = json::array();
  for (const PendingFile& p : files) {
    io::write_text_atomic(dir / p.name, p.bytes);
    written.push_back(p.name);
  }
  if (!cfg.output.intensity.empty()) {
    io::write_pgm16(dir / cfg.output.intensity, intensity(r.output, true).values);
    written.push_back(cfg.output.intensity);
  }
  if (!cfg.output.field.empty()) {
    io::write_field(dir / cfg.output.field, r.output);
    written.push_back(cfg.output.field);
  }
  r.report["files"] = written;
  if (!cfg.output.report.empty()) io::write_text_atomic(dir / cfg.output.report, r.report.dump(2) + "\n");
  return r.report;
}

}  // namespace twistlight
