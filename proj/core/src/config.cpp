#include "advmg/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

struct NamedId {
  ExperimentId id;
  const char* name;
};

constexpr NamedId kExperimentNames[] = {
    {ExperimentId::Table2, "table2"}, {ExperimentId::Table3, "table3"},
    {ExperimentId::Table5, "table5"}, {ExperimentId::Table6, "table6"},
    {ExperimentId::TableB, "tableB"}, {ExperimentId::Fig1, "fig1"},
    {ExperimentId::Fig2, "fig2"},     {ExperimentId::Fig3, "fig3"},
    {ExperimentId::Fig4, "fig4"},     {ExperimentId::Fig5, "fig5"},
    {ExperimentId::Custom, "custom"},
};

struct NamedMethod {
  PsiMethod method;
  const char* name;
};

constexpr NamedMethod kMethodNames[] = {
    {PsiMethod::Ideal, "ideal"},         {PsiMethod::Rediscretize, "rediscretize"},
    {PsiMethod::PhiPattern, "phi-pattern"}, {PsiMethod::Lsq, "lsq"},
    {PsiMethod::Nonlinear, "nonlinear"}, {PsiMethod::Threshold, "threshold"},
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_power_of_two(std::size_t v) { return v && !(v & (v - 1)); }

std::size_t parse_size(const std::string& v) {
  std::size_t pos = 0;
  const unsigned long long out = std::stoull(v, &pos);
  if (pos != v.size()) throw InvalidArgument("expected an integer, got '" + v + "'");
  return static_cast<std::size_t>(out);
}

GridSize parse_grid(const std::string& v) {
  const auto x = v.find('x');
  if (x == std::string::npos) return {parse_size(v), 0};
  return {parse_size(trim(v.substr(0, x))), parse_size(trim(v.substr(x + 1)))};
}

bool parse_bool(const std::string& v) {
  const auto s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw InvalidArgument("expected a boolean, got '" + v + "'");
}

std::vector<SchemeId> family_schemes(Family family) {
  std::vector<SchemeId> out;
  for (const auto& s : all_schemes())
    if (s.family == family) out.push_back(s);
  return out;
}

std::vector<SchemeId> erk_orders(std::initializer_list<int> orders) {
  std::vector<SchemeId> out;
  for (int p : orders) out.push_back({Family::ERK, p});
  return out;
}

std::size_t positive(std::size_t v, const std::string& key) {
  if (v == 0) throw InvalidArgument(key + " must be positive");
  return v;
}

}  // namespace

std::string to_string(ExperimentId id) {
  for (const auto& n : kExperimentNames)
    if (n.id == id) return n.name;
  return "custom";
}

ExperimentId parse_experiment_id(const std::string& s) {
  for (const auto& n : kExperimentNames)
    if (lower(n.name) == lower(trim(s))) return n.id;
  throw InvalidArgument("unknown experiment id '" + s + "'");
}

std::string to_string(PsiMethod method) {
  for (const auto& n : kMethodNames)
    if (n.method == method) return n.name;
  return "lsq";
}

PsiMethod parse_psi_method(const std::string& s) {
  for (const auto& n : kMethodNames)
    if (n.name == lower(trim(s))) return n.method;
  throw InvalidArgument("unknown coarse operator method '" + s + "'");
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig config;
  bool has_id = false;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", number);
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", number);
    try {
      if (key == "experiment") {
        config.id = parse_experiment_id(value);
        has_id = true;
      } else if (key == "scheme") {
        config.schemes.push_back(SchemeId::parse(value));
      } else if (key == "grid" || key == "nx") {
        const auto g = parse_grid(value);
        if (!is_power_of_two(g.nx) || (g.nt != 0 && !is_power_of_two(g.nt)))
          throw InvalidArgument("grid sizes must be powers of two");
        config.grids.push_back(g);
      } else if (key == "m") {
        config.m.push_back(positive(parse_size(value), key));
      } else if (key == "levels") {
        config.levels.push_back(positive(parse_size(value), key));
      } else if (key == "tol") {
        config.tol = std::stod(value);
        if (!(config.tol > 0.0)) throw InvalidArgument("tol must be positive");
      } else if (key == "seed") {
        config.seed = parse_size(value);
      } else if (key == "max_iters") {
        config.max_iters = positive(parse_size(value), key);
      } else if (key == "output_dir") {
        config.output_dir = value;
      } else if (key == "threads") {
        config.threads = static_cast<unsigned>(parse_size(value));
      } else if (key == "plots") {
        config.plots = parse_bool(value);
      } else if (key == "large") {
        config.large = parse_bool(value);
      } else if (key == "cycle") {
        const auto v = lower(value);
        if (v != "v" && v != "f") throw InvalidArgument("cycle must be V or F");
        config.cycle = v == "v" ? Cycle::V : Cycle::F;
      } else if (key == "relaxation") {
        const auto v = lower(value);
        if (v != "f" && v != "fcf") throw InvalidArgument("relaxation must be F or FCF");
        config.relaxation = v == "f" ? Relaxation::F : Relaxation::FCF;
      } else if (key == "psi") {
        config.psi = parse_psi_method(value);
      } else {
        throw InvalidArgument("unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), number);
    }
  }
  if (!has_id) throw ConfigError("missing 'experiment' key", 0);
  config.complete();
  try {
    config.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0);
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), 0);
  return parse(in);
}

ExperimentConfig ExperimentConfig::defaults(ExperimentId id, bool large) {
  ExperimentConfig c;
  c.id = id;
  c.large = large;
  const std::vector<std::size_t> all_m{2, 4, 8, 16, 32, 64};
  switch (id) {
    case ExperimentId::Table2:
      c.schemes = family_schemes(Family::SDIRK);
      c.grids = large ? std::vector<GridSize>{{1024, 0}, {4096, 0}} : std::vector<GridSize>{{1024, 0}};
      c.m = {2, 4};
      break;
    case ExperimentId::Table3:
      c.schemes = family_schemes(Family::ERK);
      c.grids = large ? std::vector<GridSize>{{256, 0}, {1024, 0}, {4096, 0}}
                      : std::vector<GridSize>{{256, 0}, {1024, 0}};
      c.m = all_m;
      break;
    case ExperimentId::Table5:
      c.schemes = erk_orders({1, 3, 5});
      c.grids = large ? std::vector<GridSize>{{256, 0}, {1024, 0}, {4096, 0}}
                      : std::vector<GridSize>{{256, 0}, {1024, 0}};
      c.m = {4};
      c.levels = {2, 3, 4, 5, 6, 7};
      break;
    case ExperimentId::Table6:
      c.schemes = family_schemes(Family::SDIRK);
      c.grids = large ? std::vector<GridSize>{{1024, 0}, {4096, 0}} : std::vector<GridSize>{{1024, 0}};
      c.m = all_m;
      c.psi = PsiMethod::Threshold;
      break;
    case ExperimentId::TableB:
      c.schemes = family_schemes(Family::ERK);
      c.grids = large ? std::vector<GridSize>{{256, 0}, {1024, 0}, {4096, 0}}
                      : std::vector<GridSize>{{256, 0}};
      c.m = all_m;
      c.psi = PsiMethod::Nonlinear;
      break;
    case ExperimentId::Fig1:
      c.schemes = all_schemes();
      c.grids = {{64, 0}, {128, 0}, {256, 0}, {512, 0}};
      if (large) c.grids.push_back({1024, 0});
      break;
    case ExperimentId::Fig2:
      c.schemes = {{Family::SDIRK, 3}};
      c.grids = {{128, 512}};
      c.m = {2};
      c.psi = PsiMethod::Rediscretize;
      break;
    case ExperimentId::Fig3:
      c.schemes = family_schemes(Family::ERK);
      c.grids = {{256, 0}};
      c.m = {16, 64};
      break;
    case ExperimentId::Fig4:
      c.schemes = family_schemes(Family::ERK);
      c.grids = {{256, 0}};
      c.m = all_m;
      break;
    case ExperimentId::Fig5:
      c.schemes = {{Family::ERK, 3}};
      c.grids = {{256, 0}};
      c.m = {8};
      break;
    case ExperimentId::Custom:
      c.schemes = {{Family::ERK, 3}};
      c.grids = {{256, 0}};
      c.m = {4};
      c.levels = {2};
      break;
  }
  return c;
}

void ExperimentConfig::complete() {
  const auto d = defaults(id, large);
  if (schemes.empty()) schemes = d.schemes;
  if (grids.empty()) grids = d.grids;
  if (m.empty()) m = d.m;
  if (levels.empty()) levels = d.levels;
}

void ExperimentConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (max_iters == 0) throw InvalidArgument("max_iters must be positive");
  for (const auto& g : grids) {
    if (!is_power_of_two(g.nx)) throw InvalidArgument("nx must be a power of two");
    if (g.nt != 0 && !is_power_of_two(g.nt)) throw InvalidArgument("nt must be a power of two");
    if (!large && (g.nx > 1024 || g.nt > 4096))
      throw InvalidArgument("grid exceeds the desk-scale cap; set large = true");
  }
  for (auto v : m)
    if (v == 0) throw InvalidArgument("m must be positive");
  for (auto v : levels)
    if (v == 0) throw InvalidArgument("levels must be positive");
}

void ExperimentConfig::write(std::ostream& out) const {
  out << "experiment = " << to_string(id) << '\n';
  for (const auto& s : schemes) out << "scheme = " << s.name() << '\n';
  for (const auto& g : grids) {
    out << "grid = " << g.nx;
    if (g.nt) out << 'x' << g.nt;
    out << '\n';
  }
  for (auto v : m) out << "m = " << v << '\n';
  for (auto v : levels) out << "levels = " << v << '\n';
  out << "tol = " << tol << '\n';
  out << "seed = " << seed << '\n';
  out << "max_iters = " << max_iters << '\n';
  out << "cycle = " << (cycle == Cycle::V ? "V" : "F") << '\n';
  out << "relaxation = " << (relaxation == Relaxation::FCF ? "FCF" : "F") << '\n';
  out << "psi = " << to_string(psi) << '\n';
  out << "large = " << (large ? "true" : "false") << '\n';
}

std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& flag,
                                         const ExperimentConfig& config) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("ADVMG_OUTPUT_DIR"); env && *env) return env;
  if (!config.output_dir.empty()) return config.output_dir;
  return "advmg-out";
}

}  // namespace advmg
