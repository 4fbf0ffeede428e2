#include "treeheat/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "treeheat/csv_io.hpp"

namespace treeheat {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

bool RunConfig::has(const std::string& sec, const std::string& key) const {
  auto it = sections.find(sec);
  return it != sections.end() && it->second.count(key) > 0;
}

std::string RunConfig::get(const std::string& sec, const std::string& key) const {
  if (!has(sec, key))
    throw std::invalid_argument("config: missing key '" + key + "' in section [" + sec + "]");
  return sections.at(sec).at(key);
}

std::string RunConfig::get_or(const std::string& sec, const std::string& key,
                              const std::string& fallback) const {
  return has(sec, key) ? sections.at(sec).at(key) : fallback;
}

double RunConfig::number(const std::string& sec, const std::string& key) const {
  const std::string v = get(sec, key);
  size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size())
    throw std::invalid_argument("config: key '" + key + "' is not a number: " + v);
  return x;
}

double RunConfig::number_or(const std::string& sec, const std::string& key,
                            double fallback) const {
  return has(sec, key) ? number(sec, key) : fallback;
}

std::vector<double> RunConfig::list(const std::string& sec, const std::string& key) const {
  std::istringstream in(get(sec, key));
  std::vector<double> out;
  double x;
  while (in >> x) out.push_back(x);
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.raw = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw config_error("unterminated section header", lineno,
                           static_cast<int>(line.find('[')) + 1);
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw config_error("empty section name", lineno, 1);
      cfg.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value'", lineno,
                         static_cast<int>(line.find(t.front())) + 1);
    if (section.empty()) throw config_error("key outside any [section]", lineno, 1);
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty()) throw config_error("empty key", lineno, 1);
    cfg.sections[section][key] = val;
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

TreeSpec tree_from_config(const RunConfig& cfg) {
  const std::string gen = cfg.get_or("tree", "generator", "explicit");
  if (gen == "explicit") {
    std::vector<double> radii = cfg.list("tree", "radii");
    std::vector<double> blist = cfg.list("tree", "branchings");
    std::vector<int> branchings;
    for (double b : blist) branchings.push_back(static_cast<int>(std::llround(b)));
    return explicit_tree(std::move(radii), std::move(branchings),
                         cfg.get_or("tree", "name", "explicit"));
  }
  const double horizon = cfg.number_or("tree", "horizon", 4096.0);
  if (gen == "homogeneous")
    return homogeneous_tree(static_cast<int>(cfg.number("tree", "b")), horizon,
                            cfg.get_or("tree", "name", ""));
  if (gen == "dyadic")
    return dyadic_tree(cfg.number("tree", "d"), horizon, cfg.get_or("tree", "name", ""));
  throw std::invalid_argument("config: unknown tree generator '" + gen + "'");
}

std::string tree_to_config(const TreeSpec& spec) {
  std::ostringstream out;
  out << "[tree]\n";
  if (spec.tail == TailModel::exponential) {
    out << "generator = homogeneous\n";
    out << "b = " << spec.tail_branching << "\n";
    out << "horizon = " << format_g17(spec.horizon_radius) << "\n";
  } else if (spec.tail == TailModel::polynomial) {
    out << "generator = dyadic\n";
    out << "d = " << format_g17(spec.tail_dimension) << "\n";
    out << "horizon = " << format_g17(spec.horizon_radius) << "\n";
  } else {
    out << "generator = explicit\n";
    out << "radii =";
    for (double r : spec.radii) out << " " << format_g17(r);
    out << "\nbranchings =";
    for (int b : spec.branchings) out << " " << b;
    out << "\n";
  }
  out << "name = " << spec.name << "\n";
  return out.str();
}

SolverConfig solver_from_config(const RunConfig& cfg, double refine) {
  SolverConfig s;
  s.domain_cut = cfg.number("solver", "domain_cut");
  s.points_per_unit = cfg.number("solver", "points_per_unit") * refine;
  s.t_max = cfg.number("solver", "t_max");
  s.n_modes = static_cast<int>(cfg.number_or("solver", "n_modes", 0.0));
  s.validate();
  return s;
}

PotentialSpec potential_from_config(const RunConfig& cfg, const std::string& base_dir) {
  const std::string kind = cfg.get_or("potential", "kind", "zero");
  if (kind == "zero") return zero_potential();
  if (kind == "radial_power")
    return radial_power(cfg.number("potential", "v0"), cfg.number("potential", "p"));
  if (kind == "radial_table") {
    PotentialSpec V;
    V.kind = PotentialSpec::Kind::radial_table;
    V.table_r = cfg.list("potential", "r");
    V.table_v = cfg.list("potential", "v");
    V.validate();
    return V;
  }
  if (kind == "per_edge") {
    const std::string file = cfg.get("potential", "file");
    const auto path = std::filesystem::path(base_dir) / file;
    TreeSpec spec = tree_from_config(cfg);
    return load_per_edge_potential(spec, path.string());
  }
  throw std::invalid_argument("config: unknown potential kind '" + kind + "'");
}

SweepSpec sweep_from_config(const RunConfig& cfg, const TreeSpec& spec) {
  SweepSpec s;
  const double t_lo = cfg.number_or("sweep", "t_lo", 0.01);
  const double t_hi = cfg.number_or("sweep", "t_hi", 1.0);
  const int nt = static_cast<int>(cfg.number_or("sweep", "t_count", 8.0));
  for (int i = 0; i < nt; ++i)
    s.times.push_back(t_lo * std::pow(t_hi / t_lo, nt == 1 ? 0.0 : double(i) / (nt - 1)));
  if (cfg.has("sweep", "x")) {
    for (double r : cfg.list("sweep", "x")) {
      std::vector<int> path;
      for (int j = 1; j <= spec.generations() && spec.radii[j] < r; ++j) path.push_back(1);
      s.points.push_back(point_at(spec, path, r));
    }
  }
  return s;
}

PotentialSpec load_per_edge_potential(const TreeSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open per-edge potential file: " + path);
  PotentialSpec V;
  V.kind = PotentialSpec::Kind::per_edge;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (lineno == 1 && t.find("edge_id") != std::string::npos) continue;  // header row
    std::istringstream row(t);
    std::string edge, off, val;
    if (!std::getline(row, edge, ',') || !std::getline(row, off, ',') ||
        !std::getline(row, val, ','))
      throw std::runtime_error("per-edge potential: bad row at line " + std::to_string(lineno));
    std::vector<int> pathv;
    if (trim(edge) != "o") {
      std::istringstream ep(trim(edge));
      std::string part;
      while (std::getline(ep, part, '.')) pathv.push_back(std::stoi(part));
    }
    const int gen = static_cast<int>(pathv.size());
    if (gen > spec.generations())
      throw std::runtime_error("per-edge potential: edge deeper than tree");
    const double r = spec.radii[gen] + std::stod(off);
    V.edges[pathv].emplace_back(r, std::stod(val));
  }
  for (auto& [p, tab] : V.edges) std::sort(tab.begin(), tab.end());
  V.validate();
  return V;
}

// ---------------------------------------------------------------------------
// command runner
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_output(const std::string& out_dir, const std::string& name,
                          const std::string& digest) {
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / name;
  std::ofstream out(path, std::ios::binary);  // LF line endings on all platforms
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << "# treeheat " << kToolVersion << " config_digest=" << digest << "\n";
  return out;
}

int cmd_geometry(const RunConfig& cfg, const std::string& out_dir) {
  TreeSpec spec = tree_from_config(cfg);
  const double d = cfg.number_or("params", "d", 2.0);
  const double delta = cfg.number_or("params", "delta", 3.0);
  const double r_max =
      std::min(cfg.number_or("params", "scan_r_max", 200.0), spec.horizon_radius);
  const int n_scan = static_cast<int>(cfg.number_or("params", "n_scan", 2000.0));
  GeometryReport rep = geometry_scan(spec, d, delta, r_max, n_scan);
  auto out = open_output(out_dir, "geometry.csv", digest_hex(cfg.raw));
  out << "quantity,name,value,grid_step\n";
  auto row = [&](const std::string& q, double v) {
    out << q << "," << spec.name << "," << format_g17(v) << "," << format_g17(rep.grid_step)
        << "\n";
  };
  row("doubling_constant", rep.doubling_constant);
  row("dim_inf", rep.dim_inf);
  row("dim_sup", rep.dim_sup);
  row("sobolev_S", rep.sobolev_S);
  row("sobolev_S_tilde", rep.sobolev_S_tilde);
  row("sobolev_divergent", rep.sobolev_divergent ? 1.0 : 0.0);
  row("non_polynomial_growth", rep.non_polynomial_growth ? 1.0 : 0.0);
  if (rep.non_polynomial_growth)
    std::cout << "geometry: dim_sup diverges on the scan range (non-polynomial growth)\n";
  return 0;
}

int cmd_heat(const RunConfig& cfg, const std::string& out_dir, double refine) {
  TreeSpec spec = tree_from_config(cfg);
  SolverConfig solver = solver_from_config(cfg, refine);
  SweepSpec sweep = sweep_from_config(cfg, spec);
  if (sweep.points.empty())
    throw std::invalid_argument("heat: [sweep] x samples required");
  HeatKernelEvaluator eval(spec, solver);
  auto out = open_output(out_dir, "heat.csv", digest_hex(cfg.raw));
  out << "x_id,t,k,envelope,universal_bound\n";
  for (size_t xi = 0; xi < sweep.points.size(); ++xi) {
    const PointAddress& x = sweep.points[xi];
    for (double t : sweep.times) {
      const KernelSample s = eval.diagonal(x, t);
      const double k0 = eval.system(0).kernel(x.radial, x.radial, t);
      const double envelope = k0 * branching_function(spec, 0, x.radial);
      const double universal = 1.0 / std::sqrt(std::numbers::pi * t);
      out << xi << "," << format_g17(t) << "," << format_g17(s.value) << ","
          << format_g17(envelope) << "," << format_g17(universal) << "\n";
    }
  }
  return 0;
}

int cmd_bounds(const RunConfig& cfg, const std::string& out_dir, double refine) {
  TreeSpec spec = tree_from_config(cfg);
  SolverConfig solver = solver_from_config(cfg, refine);
  VerifyParams params;
  params.d = cfg.number_or("params", "d", 2.0);
  params.delta = cfg.number_or("params", "delta", 3.0);
  params.scan_r_max = std::min(cfg.number_or("params", "scan_r_max", 200.0),
                               spec.horizon_radius);
  params.n_scan = static_cast<int>(cfg.number_or("params", "n_scan", 2000.0));
  SweepSpec sweep = sweep_from_config(cfg, spec);
  if (sweep.points.empty())
    sweep = default_sweep(spec, 0.01, solver.t_max,
                          static_cast<int>(sweep.times.size()),
                          solver.domain_cut - 6.0 * std::sqrt(solver.t_max));

  GeometryReport geo = geometry_scan(spec, params.d, params.delta, params.scan_r_max,
                                     params.n_scan);
  std::vector<BoundKind> kinds{BoundKind::universal, BoundKind::volume_doubling,
                               BoundKind::poincare, BoundKind::log_sobolev,
                               BoundKind::k0_two_sided};
  if (!geo.non_polynomial_growth) {
    kinds.push_back(BoundKind::two_sided);
    kinds.push_back(BoundKind::dim_bound);
  }
  if (!geo.sobolev_divergent) {
    kinds.push_back(BoundKind::no_vd);
    kinds.push_back(BoundKind::nash);
  }
  bool homog = spec.generations() >= 1 && spec.tail == TailModel::exponential;
  for (int l = 1; l <= spec.generations(); ++l)
    if (spec.branchings[l] != spec.branchings[1] || std::abs(spec.radii[l] - l) > 1e-12)
      homog = false;
  if (homog) kinds.push_back(BoundKind::homogeneous);

  auto out = open_output(out_dir, "bounds.csv", digest_hex(cfg.raw));
  out << "kind,samples,worst_margin,empirical_constant,constant_lower,constant_upper,"
         "violated\n";
  bool any_violation = false;
  std::cout << "bound verdicts for " << spec.name << ":\n";
  for (BoundKind k : kinds) {
    BoundReport rep = verify_bound(k, spec, solver, sweep, params);
    rep.config_digest = digest_hex(cfg.raw);
    any_violation = any_violation || rep.violated;
    out << bound_kind_name(k) << "," << rep.samples << "," << format_g17(rep.worst_margin)
        << "," << format_g17(rep.empirical_constant) << ","
        << format_g17(rep.constant_lower) << "," << format_g17(rep.constant_upper) << ","
        << (rep.violated ? 1 : 0) << "\n";
    std::printf("  %-16s %-8s worst_margin=%-12.4g constant=%.6g\n", bound_kind_name(k),
                rep.violated ? "VIOLATED" : "holds", rep.worst_margin,
                rep.empirical_constant);
  }
  return any_violation ? 1 : 0;
}

int cmd_schrodinger(const RunConfig& cfg, const std::string& out_dir, double refine,
                    const std::string& base_dir) {
  TreeSpec spec = tree_from_config(cfg);
  SolverConfig solver = solver_from_config(cfg, refine);
  PotentialSpec V = potential_from_config(cfg, base_dir);
  BoundParams params;
  params.gamma = cfg.number_or("params", "gamma", 1.0);
  params.beta = cfg.number_or("params", "beta", 1.0);
  params.d = cfg.number_or("params", "d", 2.0);
  params.a = cfg.number_or("params", "a", 0.0);
  const double C_env = cfg.number_or("params", "c_envelope",
                                     1.0 / std::sqrt(std::numbers::pi));

  const MomentRoute route = V.is_radial() ? MomentRoute::radial : MomentRoute::oracle;
  MomentResult mom = negative_moments(spec, V, params.gamma, solver, route);

  auto out = open_output(out_dir, "schrodinger.csv", digest_hex(cfg.raw));
  out << "kind,gamma,beta,lhs,rhs,margin,flags\n";
  bool violated = false;
  auto emit = [&](const std::string& kind, double lhs, const RhsResult& rhs) {
    const double margin = rhs.divergent ? std::numeric_limits<double>::infinity()
                                        : (rhs.value - lhs) / std::max(rhs.value, 1e-300);
    if (!rhs.divergent && lhs > rhs.value * (1.0 + 1e-9) + 1e-12) violated = true;
    out << kind << "," << format_g17(params.gamma) << "," << format_g17(params.beta) << ","
        << format_g17(lhs) << ","
        << (rhs.divergent ? "inf" : format_g17(rhs.value)) << "," << format_g17(margin)
        << "," << (rhs.divergent ? "divergent" : "") << "\n";
  };
  const std::string kind = cfg.get_or("params", "kind", "half_sharp");
  RhsKind rk;
  if (kind == "lieb") rk = RhsKind::lieb;
  else if (kind == "two_term_1") rk = RhsKind::two_term_1;
  else if (kind == "two_term_2") rk = RhsKind::two_term_2;
  else if (kind == "lt_ext") rk = RhsKind::lt_ext;
  else if (kind == "half_sharp") rk = RhsKind::half_sharp;
  else if (kind == "half_small") rk = RhsKind::half_small;
  else if (kind == "homogeneous") rk = RhsKind::homogeneous;
  else throw std::invalid_argument("config: unknown schrodinger bound kind '" + kind + "'");

  double shift = 0.0;
  double C_used = C_env;
  if (rk == RhsKind::homogeneous) {
    if (spec.tail != TailModel::exponential)
      throw std::invalid_argument("schrodinger: homogeneous kind needs a homogeneous tree");
    shift = lambda_closed_form(spec.branchings[1]).first;
    mom = negative_moments(spec, V, params.gamma, solver, route, shift);
  }
  emit(kind, mom.value, bound_rhs(rk, spec, V, params, solver, C_used));
  const double riesz =
      params.gamma > 0.0 ? riesz_crosscheck(mom.eigenvalues, params.gamma) : 0.0;
  out << "riesz_discrepancy," << format_g17(params.gamma) << ",,"
      << format_g17(riesz) << ",,,\n";
  std::cout << "schrodinger: moment=" << format_g17(mom.value) << " count=" << mom.count
            << " flagged=" << mom.flagged << " riesz=" << format_g17(riesz) << "\n";
  return violated ? 1 : 0;
}

int cmd_oracle_compare(const RunConfig& cfg, const std::string& out_dir, double refine) {
  TreeSpec spec = tree_from_config(cfg);
  SolverConfig solver = solver_from_config(cfg, refine);
  SweepSpec sweep = sweep_from_config(cfg, spec);
  const int maxgen = static_cast<int>(cfg.number_or("params", "max_generation", 3.0));
  HeatKernelEvaluator eval(spec, solver);
  GraphOracle oracle(spec, maxgen, solver);
  auto out = open_output(out_dir, "oracle.csv", digest_hex(cfg.raw));
  out << "x_id,y_id,t,decomposed,oracle,rel_err\n";
  double worst = 0.0;
  for (size_t xi = 0; xi < sweep.points.size(); ++xi) {
    for (size_t yi = 0; yi < sweep.points.size(); ++yi) {
      for (double t : sweep.times) {
        const double kd = eval.full(sweep.points[xi], sweep.points[yi], t).value;
        const double ko = oracle.kernel(sweep.points[xi], sweep.points[yi], t);
        const double rel = std::abs(kd - ko) / std::max(std::abs(ko), 1e-300);
        worst = std::max(worst, rel);
        out << xi << "," << yi << "," << format_g17(t) << "," << format_g17(kd) << ","
            << format_g17(ko) << "," << format_g17(rel) << "\n";
      }
    }
  }
  out << "# max_rel_err=" << format_g17(worst) << "\n";
  std::cout << "oracle-compare: max relative error " << format_g17(worst) << "\n";
  return 0;
}

}  // namespace

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, double refine) {
  RunConfig cfg = load_config(config_path);
  const std::string base_dir =
      std::filesystem::path(config_path).parent_path().string();
  if (command == "geometry") return cmd_geometry(cfg, out_dir);
  if (command == "heat") return cmd_heat(cfg, out_dir, refine);
  if (command == "bounds") return cmd_bounds(cfg, out_dir, refine);
  if (command == "schrodinger") return cmd_schrodinger(cfg, out_dir, refine, base_dir);
  if (command == "oracle-compare") return cmd_oracle_compare(cfg, out_dir, refine);
  throw std::invalid_argument("unknown command: " + command);
}

}  // namespace treeheat
