#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "treeheat/csv_io.hpp"
#include "treeheat/tree_model.hpp"
#include "treeheat/run_config.hpp"

using namespace treeheat;
namespace fs = std::filesystem;

namespace {

fs::path sandbox() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "treeheat_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = sandbox() / name;
  std::ofstream out(p);
  out << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kHalfLineHeat =
    "[tree]\n"
    "generator = explicit\n"
    "radii = 0\n"
    "branchings = 1\n"
    "name = half-line\n"
    "[solver]\n"
    "domain_cut = 20\n"
    "points_per_unit = 32\n"
    "t_max = 4\n"
    "[sweep]\n"
    "x = 0 1 2\n"
    "t_lo = 0.05\n"
    "t_hi = 4\n"
    "t_count = 8\n";

}  // namespace

TEST_CASE("config parser basics") {
  RunConfig c = parse_config("# comment\n[tree]\nb = 2 # inline\nlist = 1 2 3.5\n");
  CHECK(c.number("tree", "b") == 2.0);
  CHECK(c.list("tree", "list") == std::vector<double>{1.0, 2.0, 3.5});
  CHECK(c.get_or("tree", "missing", "x") == "x");
  CHECK_THROWS_AS(c.get("tree", "missing"), std::invalid_argument);
}

TEST_CASE("config parser reports line and column") {
  try {
    parse_config("[tree]\nkey value\n");
    FAIL("expected a parse error");
  } catch (const config_error& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("key = 1\n"), config_error);        // outside a section
  CHECK_THROWS_AS(parse_config("[tree\nb = 2\n"), config_error);   // unterminated header
}

TEST_CASE("tree and solver from config") {
  RunConfig c = parse_config(
      "[tree]\ngenerator = dyadic\nd = 2\nhorizon = 100\n"
      "[solver]\ndomain_cut = 10\npoints_per_unit = 16\nt_max = 1\n");
  TreeSpec t = tree_from_config(c);
  CHECK(t.name == "dyadic-d2");
  CHECK(t.branchings[1] == 2);
  SolverConfig s = solver_from_config(c, 2.0);
  CHECK(s.points_per_unit == 32.0);
  RunConfig bad = parse_config("[tree]\ngenerator = weird\n");
  CHECK_THROWS_AS(tree_from_config(bad), std::invalid_argument);
}

TEST_CASE("heat command writes the expected kernel values") {
  const std::string cfg = write_file("heat.cfg", kHalfLineHeat);
  const std::string out = (sandbox() / "heat_out").string();
  CHECK(run_command("heat", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "heat.csv");
  CHECK(text.find("# treeheat " + std::string(kToolVersion)) != std::string::npos);
  CHECK(text.find("x_id,t,k,envelope,universal_bound") != std::string::npos);
  // column k at x = 0 equals (pi t)^{-1/2} within 1e-3
  std::istringstream in(text);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    std::istringstream row(line);
    std::string xid, ts, ks;
    std::getline(row, xid, ',');
    std::getline(row, ts, ',');
    std::getline(row, ks, ',');
    if (xid != "0") continue;
    const double t = std::stod(ts), k = std::stod(ks);
    const double expect = 1.0 / std::sqrt(std::acos(-1.0) * t);
    CHECK(std::abs(k - expect) / expect <= 1e-3);
    ++checked;
  }
  CHECK(checked == 8);
}

TEST_CASE("outputs are byte-identical across reruns") {
  const std::string cfg = write_file("det.cfg", kHalfLineHeat);
  const std::string out1 = (sandbox() / "det1").string();
  const std::string out2 = (sandbox() / "det2").string();
  REQUIRE(run_command("heat", cfg, out1) == 0);
  REQUIRE(run_command("heat", cfg, out2) == 0);
  CHECK(slurp(fs::path(out1) / "heat.csv") == slurp(fs::path(out2) / "heat.csv"));
}

TEST_CASE("tree config round trip") {
  for (TreeSpec t : {explicit_tree({0.0, 1.0, 2.5}, {1, 2, 3}, "b123"),
                     homogeneous_tree(3, 24.0), dyadic_tree(2.0, 100.0)}) {
    RunConfig cfg = parse_config(tree_to_config(t));
    TreeSpec back = tree_from_config(cfg);
    CHECK(back.radii == t.radii);
    CHECK(back.branchings == t.branchings);
    CHECK(back.name == t.name);
    CHECK(back.tail == t.tail);
  }
}

TEST_CASE("refine flag multiplies the grid density") {
  const std::string cfg = write_file("refine.cfg", kHalfLineHeat);
  const std::string out = (sandbox() / "refine_out").string();
  CHECK(run_command("heat", cfg, out, 2.0) == 0);
  CHECK(slurp(fs::path(out) / "heat.csv").find("x_id,") != std::string::npos);
}

TEST_CASE("geometry command emits the report rows") {
  const std::string cfg = write_file("geo.cfg",
                                     "[tree]\n"
                                     "generator = dyadic\nd = 2\nhorizon = 600\n"
                                     "[params]\nd = 2\ndelta = 3\nscan_r_max = 200\n");
  const std::string out = (sandbox() / "geo_out").string();
  CHECK(run_command("geometry", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "geometry.csv");
  CHECK(text.find("doubling_constant,dyadic-d2,2") != std::string::npos);
  CHECK(text.find("dim_inf,dyadic-d2,0.5") != std::string::npos);
  CHECK(text.find("sobolev_divergent,dyadic-d2,1") != std::string::npos);
}

TEST_CASE("bounds command verdicts") {
  const std::string cfg = write_file("bounds.cfg",
                                     "[tree]\n"
                                     "generator = explicit\nradii = 0 1\nbranchings = 1 2\n"
                                     "name = b12\n"
                                     "[solver]\n"
                                     "domain_cut = 14\npoints_per_unit = 16\nt_max = 2\n"
                                     "[sweep]\nx = 0.5 1.5 2.5\nt_lo = 0.05\nt_hi = 2\n"
                                     "t_count = 5\n");
  const std::string out = (sandbox() / "bounds_out").string();
  CHECK(run_command("bounds", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "bounds.csv");
  CHECK(text.find("universal,") != std::string::npos);
  CHECK(text.find("poincare,") != std::string::npos);
  for (const auto& line : {std::string("k0_two_sided")}) CHECK(text.find(line) != std::string::npos);
}

TEST_CASE("bounds command on the dyadic tree includes the doubling kinds") {
  const std::string cfg = write_file("bounds_dy.cfg",
                                     "[tree]\n"
                                     "generator = dyadic\nd = 2\nhorizon = 400\n"
                                     "[solver]\n"
                                     "domain_cut = 20\npoints_per_unit = 16\nt_max = 4\n"
                                     "[sweep]\nx = 0.5 1.5 2.5\nt_lo = 0.05\nt_hi = 4\n"
                                     "t_count = 5\n"
                                     "[params]\nd = 2\ndelta = 3\nscan_r_max = 200\n");
  const std::string out = (sandbox() / "bounds_dy_out").string();
  CHECK(run_command("bounds", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "bounds.csv");
  for (const char* kind : {"universal,", "two_sided,", "dim_bound,"}) {
    const auto pos = text.find(kind);
    REQUIRE(pos != std::string::npos);
    // violated column is the last field of the row
    const auto eol = text.find('\n', pos);
    CHECK(text.substr(eol - 2, 2) == ",0");
  }
}

TEST_CASE("geometry command flags exponential growth") {
  const std::string cfg = write_file("geo_homog.cfg",
                                     "[tree]\n"
                                     "generator = homogeneous\nb = 2\nhorizon = 300\n"
                                     "[params]\nd = 2\ndelta = 3\nscan_r_max = 250\n");
  const std::string out = (sandbox() / "geo_homog_out").string();
  CHECK(run_command("geometry", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "geometry.csv");
  CHECK(text.find("non_polynomial_growth,homogeneous-b2,1") != std::string::npos);
  CHECK(text.find("sobolev_divergent,homogeneous-b2,0") != std::string::npos);
}

TEST_CASE("bounds command runs the fast-growth kinds where admissible") {
  const std::string cfg = write_file("bounds_d3.cfg",
                                     "[tree]\n"
                                     "generator = dyadic\nd = 3\nhorizon = 2000\n"
                                     "[solver]\n"
                                     "domain_cut = 10\npoints_per_unit = 16\nt_max = 1\n"
                                     "[sweep]\nx = 0.5 1.2 2.2\nt_lo = 0.1\nt_hi = 1\n"
                                     "t_count = 4\n"
                                     "[params]\nd = 3\ndelta = 3\nscan_r_max = 800\n");
  const std::string out = (sandbox() / "bounds_d3_out").string();
  CHECK(run_command("bounds", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "bounds.csv");
  CHECK(text.find("no_vd,") != std::string::npos);
  CHECK(text.find("nash,") != std::string::npos);
  CHECK(text.find("two_sided,") != std::string::npos);
}

TEST_CASE("schrodinger command") {
  const std::string cfg = write_file("schro.cfg",
                                     "[tree]\n"
                                     "generator = explicit\nradii = 0\nbranchings = 1\n"
                                     "[solver]\n"
                                     "domain_cut = 20\npoints_per_unit = 16\nt_max = 1\n"
                                     "[potential]\nkind = radial_power\nv0 = 2\np = 2\n"
                                     "[params]\ngamma = 1\nbeta = 1\nd = 1\n"
                                     "kind = two_term_1\nc_envelope = 0.5641895835477563\n");
  const std::string out = (sandbox() / "schro_out").string();
  CHECK(run_command("schrodinger", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "schrodinger.csv");
  CHECK(text.find("kind,gamma,beta,lhs,rhs,margin,flags") != std::string::npos);
  CHECK(text.find("two_term_1,1,") != std::string::npos);
  CHECK(text.find("riesz_discrepancy") != std::string::npos);
}

TEST_CASE("oracle-compare command reports the max error") {
  const std::string cfg = write_file("oracle.cfg",
                                     "[tree]\n"
                                     "generator = explicit\nradii = 0 1\nbranchings = 1 2\n"
                                     "[solver]\n"
                                     "domain_cut = 12\npoints_per_unit = 16\nt_max = 1\n"
                                     "[sweep]\nx = 0.5 1.5 2.5\nt_lo = 0.5\nt_hi = 1\n"
                                     "t_count = 3\n"
                                     "[params]\nmax_generation = 3\n");
  const std::string out = (sandbox() / "oracle_out").string();
  CHECK(run_command("oracle-compare", cfg, out) == 0);
  const std::string text = slurp(fs::path(out) / "oracle.csv");
  const auto pos = text.find("# max_rel_err=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(text.substr(pos + 14)) <= 1e-2);
}

TEST_CASE("per-edge potential CSV round trip") {
  TreeSpec t = explicit_tree({0.0, 1.0}, {1, 2});
  const std::string file = write_file("pot.csv",
                                      "edge_id,offset,value\n"
                                      "o,0.0,1.0\n"
                                      "o,1.0,1.0\n"
                                      "1,0.0,0.5\n"
                                      "1,2.0,0.0\n");
  PotentialSpec V = load_per_edge_potential(t, file);
  CHECK(V.value({}, 0.5) == 1.0);
  CHECK(V.value({1}, 1.0) == 0.5);
  CHECK(V.value({1}, 2.0) == doctest::Approx(0.25));
  CHECK(V.value({2}, 1.5) == 0.0);  // untabulated edge defaults to zero
}

TEST_CASE("unknown command and missing config") {
  const std::string cfg = write_file("min.cfg", "[tree]\nradii = 0\nbranchings = 1\n");
  CHECK_THROWS_AS(run_command("mystery", cfg, (sandbox() / "x").string()),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_command("heat", (sandbox() / "missing.cfg").string(),
                              (sandbox() / "x").string()),
                  std::runtime_error);
}

#ifdef TREEHEAT_CLI_BIN
TEST_CASE("binary rejects --seed and reports config errors") {
  const std::string cfg = write_file("cli.cfg", kHalfLineHeat);
  const std::string bad = write_file("bad.cfg", "[tree\n");
  const std::string out = (sandbox() / "cli_out").string();
  const std::string base = std::string(TREEHEAT_CLI_BIN);
  CHECK(std::system((base + " heat --config " + cfg + " --out " + out +
                     " --seed 7 > /dev/null 2>&1")
                        .c_str()) != 0);
  CHECK(std::system((base + " heat --config " + bad + " --out " + out +
                     " > /dev/null 2>&1")
                        .c_str()) != 0);
  CHECK(std::system((base + " heat --config " + cfg + " --out " + out +
                     " > /dev/null 2>&1")
                        .c_str()) == 0);
}
#endif
