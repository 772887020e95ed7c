#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mep/config.hpp"
#include "mep/io.hpp"

using namespace mep;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("config parsing and validation", "[cli_io]") {
  // empty file: defaults everywhere, but a scenario is required
  std::istringstream empty("");
  CHECK_THROWS_WITH(parse_config(empty), Catch::Matchers::ContainsSubstring("scenario"));

  std::istringstream ok(
      "[scenario]\nname = diocotron\n[numerics]\ntheta = 0.5\ncfl = 0.2\n# comment\n");
  const SimulationConfig cfg = parse_config(ok);
  CHECK(cfg.scenario == "diocotron");
  CHECK(cfg.theta == 0.5);
  CHECK(cfg.cfl == 0.2);

  std::istringstream unknown("[scenario]\nname = vortex\n[numerics]\nbogus = 1\n");
  CHECK_THROWS_WITH(parse_config(unknown), Catch::Matchers::ContainsSubstring("numerics.bogus"));

  std::istringstream out_of_range("[scenario]\nname = vortex\n[numerics]\ncfl = 1.5\n");
  CHECK_THROWS_WITH(parse_config(out_of_range),
                    Catch::Matchers::ContainsSubstring("numerics.cfl"));

  std::istringstream bad_number("[scenario]\nname = vortex\n[numerics]\ntheta = abc\n");
  CHECK_THROWS_WITH(parse_config(bad_number), Catch::Matchers::ContainsSubstring("numerics.theta"));
}

TEST_CASE("scenario presets", "[cli_io]") {
  SimulationConfig v;
  v.scenario = "vortex";
  apply_scenario_preset(v);
  CHECK(v.vortex_speed_x == 1.0);
  CHECK(v.vortex_speed_y == 1.0);
  CHECK(v.vortex_size == 5.0);
  CHECK(v.alpha == 1.0);
  CHECK(v.cfl == 0.1);
  CHECK(v.t_final == 1.0);
  CHECK(v.theta == 1.0);
  CHECK(v.integrator == "forward_euler");

  SimulationConfig d;
  d.scenario = "diocotron";
  d.dio_mode = 3;
  apply_scenario_preset(d);
  CHECK(d.dio_r0 == 6.0);
  CHECK(d.dio_r1 == 8.0);
  CHECK(d.dio_radius == 16.0);
  CHECK(d.dio_rho_min == 1e-6);
  CHECK(d.dio_rho_max == 1.0);
  CHECK(d.dio_beta == 1e6);
  CHECK(d.dio_delta == 0.1);
  CHECK(d.alpha == 2.0 * M_PI * 1e12);  // Davidson-normalized coupling
  CHECK(d.omega == 1e12);
  CHECK(d.theta_t == 1e-4);
  CHECK(d.eos == "isothermal");
  CHECK(d.theta == 0.5);
}

TEST_CASE("config round trip", "[cli_io]") {
  SimulationConfig cfg;
  cfg.scenario = "diocotron";
  apply_scenario_preset(cfg);
  cfg.refinement = 5;
  cfg.solver_tol = 3.25e-11;
  cfg.output_dir = "some/dir";
  cfg.dio_delta = 0.125;
  cfg.threads = 4;

  std::istringstream in(serialize_config(cfg));
  const SimulationConfig back = parse_config(in);
  CHECK(serialize_config(back) == serialize_config(cfg));
  CHECK(back.solver_tol == cfg.solver_tol);
  CHECK(back.refinement == 5);
  CHECK(back.output_dir == "some/dir");
}

TEST_CASE("VTK snapshot round-trips through a structural validator", "[cli_io]") {
  const Mesh mesh = build_rectangle_mesh({0, 0}, {1, 1}, 1, 1);
  const DgLayout dg = build_dg_layout(mesh);
  const CgLayout cg = build_cg_layout(mesh);
  HypState s;
  s.resize(dg.n_nodes, true);
  for (int i = 0; i < dg.n_nodes; ++i) {
    s.rho[i] = 1.0 + 0.1 * i;
    s.mx[i] = 0.5;
    s.my[i] = -0.25;
    s.en[i] = 2.0;
  }
  CgField phi(cg.n_nodes, 0.3);
  const std::string path = temp_path("mep_snapshot_test.vtk");
  write_vtk_snapshot(mesh, dg, s, phi, path);
  CHECK(!std::filesystem::exists(path + ".tmp"));

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# vtk DataFile", 0) == 0);
  std::getline(in, line);  // title
  std::getline(in, line);
  CHECK(line == "ASCII");
  std::getline(in, line);
  CHECK(line == "DATASET UNSTRUCTURED_GRID");

  std::string token;
  int n_points = 0;
  in >> token >> n_points >> token;
  CHECK(n_points == dg.n_nodes);
  for (int i = 0; i < n_points; ++i) {
    double x, y, z;
    in >> x >> y >> z;
    CHECK(z == 0.0);
  }
  int n_cells = 0, n_ints = 0;
  in >> token >> n_cells >> n_ints;
  CHECK(token == "CELLS");
  CHECK(n_cells == mesh.n_cells());
  CHECK(n_ints == 5 * n_cells);
  for (int k = 0; k < n_cells; ++k) {
    int cnt;
    in >> cnt;
    CHECK(cnt == 4);
    for (int c = 0; c < 4; ++c) {
      int id;
      in >> id;
      CHECK(id >= 0);
      CHECK(id < n_points);
    }
  }
  in >> token >> n_cells;
  CHECK(token == "CELL_TYPES");
  for (int k = 0; k < n_cells; ++k) {
    int type;
    in >> type;
    CHECK(type == 9);
  }
  int n_data = 0;
  in >> token >> n_data;
  CHECK(token == "POINT_DATA");
  CHECK(n_data == n_points);
  // five fields follow: density, momentum, energy, potential, schlieren
  int scalar_fields = 0, vector_fields = 0;
  while (in >> token) {
    if (token == "SCALARS") {
      ++scalar_fields;
      std::string name, type;
      int comps;
      in >> name >> type >> comps;
      std::getline(in, line);  // rest
      std::getline(in, line);  // LOOKUP_TABLE
      for (int i = 0; i < n_data; ++i) {
        double v;
        REQUIRE((in >> v));
      }
    } else if (token == "VECTORS") {
      ++vector_fields;
      std::string name, type;
      in >> name >> type;
      for (int i = 0; i < 3 * n_data; ++i) {
        double v;
        REQUIRE((in >> v));
      }
    }
  }
  CHECK(scalar_fields == 4);
  CHECK(vector_fields == 1);
  std::filesystem::remove(path);

  Mesh empty;
  CHECK_THROWS(write_vtk_snapshot(empty, dg, s, phi, path));

  // mesh-only dump round trip
  const std::string mpath = temp_path("mep_mesh_test.vtk");
  write_vtk_mesh(mesh, mpath);
  std::ifstream min(mpath);
  std::string first;
  std::getline(min, first);
  CHECK(first.rfind("# vtk DataFile", 0) == 0);
  std::filesystem::remove(mpath);
  CHECK_THROWS(write_vtk_mesh(empty, mpath));
}

TEST_CASE("CSV series writer", "[cli_io]") {
  const std::string path = temp_path("mep_series_test.csv");

  write_csv_series({}, path);
  {
    std::ifstream in(path);
    std::string header, extra;
    REQUIRE(std::getline(in, header));
    CHECK(header.rfind("t,tau,", 0) == 0);
    CHECK(!std::getline(in, extra));  // header only
  }

  std::mt19937 rng(71);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  std::vector<StepRecord> recs(17);
  for (auto& r : recs) {
    r.t = d(rng);
    r.tau = d(rng);
    r.energy_total = d(rng);
    r.energy_hyperbolic = d(rng);
    r.energy_kinetic = d(rng);
    r.energy_field = d(rng);
    r.gauss_residual = std::abs(d(rng));
    r.solver_iterations = 3;
    r.min_rho = std::abs(d(rng));
    r.min_e = d(rng);
    r.mass = d(rng);
    r.mass_flux = d(rng);
    r.mass_defect = d(rng);
    r.mode_amplitude = d(rng);
  }
  write_csv_series(recs, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    REQUIRE(vals.size() == 14);
    const StepRecord& r = recs[rows];
    CHECK(vals[0] == r.t);  // 17 significant digits round-trip bit-exactly
    CHECK(vals[1] == r.tau);
    CHECK(vals[2] == r.energy_total);
    CHECK(vals[10] == r.mass);
    CHECK(vals[13] == r.mode_amplitude);
    ++rows;
  }
  CHECK(rows == 17);
  std::filesystem::remove(path);
}

TEST_CASE("simulation assembly from config", "[cli_io]") {
  SimulationConfig cfg;
  cfg.scenario = "vortex";
  apply_scenario_preset(cfg);
  cfg.refinement = 0;
  const Simulation sim = build_simulation(cfg);
  CHECK(sim.mesh.n_cells() == 32 * 32);
  CHECK(sim.eos.kind == Eos::Kind::covolume);
  CHECK(sim.state.has_energy);
  CHECK(sim.background.active);
  CHECK(sim.integrator == HypIntegrator::forward_euler);

  SimulationConfig dio;
  dio.scenario = "diocotron";
  apply_scenario_preset(dio);
  dio.refinement = 2;
  const Simulation sd = build_simulation(dio);
  CHECK(sd.mesh.n_cells() == 12 * 16);
  CHECK(!sd.state.has_energy);
  CHECK(sd.sampler.has_value());
  CHECK(sd.sampler_mode == 3);
}
