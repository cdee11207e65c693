#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "parapde/parapde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace parapde;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("parapde_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string base(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PARAPDE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int run_cli_env(const std::string& env, const std::string& args) {
  const std::string cmd =
      env + " " + std::string(PARAPDE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// u_t = 1/16 - u/8 exactly, so discovery should settle on {1, u}. The spatial
// profile exp(cos x) is deliberately not an eigenfunction of d^2/dx^2, else
// u_xx would alias the same dynamics.
void write_wave_dataset(const std::string& base) {
  const Eigen::Index n = 48, m = 24;
  Field1D f;
  f.grid = make_grid1d(0.0, 2.0 * EIGEN_PI / static_cast<double>(n), n, 0.0, 0.05, m, true);
  f.u.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      f.u(i, j) = 2.0 * std::exp(std::cos(f.grid.x[i])) * std::exp(-f.grid.t[j] / 8.0) + 0.5;
  save_dataset(f, base);
}

// w_t = 1 everywhere; only the constant library column can explain it.
void write_flat_2d_dataset(const std::string& base) {
  const Eigen::Index nx = 16, ny = 16, m = 8;
  Field2D f;
  f.grid = make_grid2d(0.0, 2.0 * EIGEN_PI / nx, nx, 0.0, 2.0 * EIGEN_PI / ny, ny, 0.0, 0.1, m,
                       true, true);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::MatrixXd w(nx, ny), u(nx, ny), v(nx, ny);
    for (Eigen::Index ix = 0; ix < nx; ++ix)
      for (Eigen::Index iy = 0; iy < ny; ++iy) {
        w(ix, iy) = 2.0 + f.grid.t[j] + 0.3 * std::sin(f.grid.x[ix] + f.grid.y[iy]);
        u(ix, iy) = std::sin(f.grid.x[ix]) * std::cos(f.grid.y[iy]);
        v(ix, iy) = -std::cos(f.grid.x[ix]) * std::sin(f.grid.y[iy]);
      }
    f.omega.push_back(w);
    f.u.push_back(u);
    f.v.push_back(v);
  }
  save_dataset(f, base);
}

const std::string kSmallLibrary = " --count 8 --max-power 1 --max-derivative 2 ";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  TempDir tmp;
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("generate --model heat --out " + tmp.base("x")) == 2);
  CHECK(run_cli("generate --model burgers") == 2);  // missing --out
  CHECK(run_cli("discover --data " + tmp.base("missing") + " --out " + tmp.base("o")) == 2);

  write_wave_dataset(tmp.base("wave"));
  CHECK(run_cli("discover --data " + tmp.base("wave") + " --method annealing --out " +
                tmp.base("o")) == 2);
  CHECK(run_cli("discover --data " + tmp.base("wave") + " --axis diagonal --out " +
                tmp.base("o")) == 2);
  CHECK(run_cli("discover --data " + tmp.base("wave") + " --fraction 1.5 --out " +
                tmp.base("o")) == 2);
  CHECK(run_cli_env("PARAPDE_THREADS=0",
                    "discover --data " + tmp.base("wave") + " --out " + tmp.base("o")) == 2);
}

TEST_CASE("generate writes the dataset plus its run record") {
  TempDir tmp;
  const std::string base = tmp.base("sim/burgers");
  REQUIRE(run_cli("generate --model burgers --out " + base +
                  " --seed 3 --init sine_wave --t-end 2") == 0);
  REQUIRE(fs::exists(base + ".meta"));
  REQUIRE(fs::exists(base + ".f64"));
  REQUIRE(fs::file_size(base + ".f64") == 256 * 256 * sizeof(double));

  const std::string meta = slurp(base + ".run.meta");
  CHECK(meta.rfind("command=generate\n", 0) == 0);
  CHECK(meta.find("model=burgers\n") != std::string::npos);
  CHECK(meta.find("seed=3\n") != std::string::npos);
  CHECK(meta.find("init=sine_wave\n") != std::string::npos);
  CHECK(meta.find("t_end=2\n") != std::string::npos);

  const Dataset loaded = load_dataset(base);
  REQUIRE(std::holds_alternative<Field1D>(loaded));
  const Field1D& f = std::get<Field1D>(loaded);
  CHECK(f.grid.nx() == 256);
  CHECK(f.grid.nt() == 256);
  CHECK_THAT(f.grid.dt, Catch::Matchers::WithinAbs(2.0 / 255.0, 1e-12));
  // sine_wave start, mean preserved by the flux form
  CHECK_THAT(f.u.col(0).mean(), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("discover identifies the decay law and writes all artifacts") {
  TempDir tmp;
  write_wave_dataset(tmp.base("wave"));
  const std::string out = tmp.base("run1");
  REQUIRE(run_cli("discover --data " + tmp.base("wave") + kSmallLibrary +
                  "--method sgtr --seed 5 --out " + out) == 0);

  const json doc = json::parse(slurp(fs::path(out) / "model.json"));
  CHECK(doc.at("method") == "sgtr");
  CHECK(doc.at("axis") == "time");
  CHECK(doc.at("terms") == json::array({"1", "u"}));
  CHECK(doc.at("k") == 2);
  CHECK(doc.at("seed") == 5);
  CHECK(doc.at("hyperparameter").get<double>() > 0.0);
  CHECK(std::isfinite(doc.at("loss").get<double>()));

  const std::string coeffs = slurp(fs::path(out) / "coeffs.csv");
  CHECK(coeffs.rfind("coord,1,u\n", 0) == 0);
  CHECK(std::count(coeffs.begin(), coeffs.end(), '\n') == 25);  // header + 24 blocks

  const std::string sweep = slurp(fs::path(out) / "sweep.csv");
  CHECK(sweep.rfind("hyperparameter,loss,k\n", 0) == 0);
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 9);  // header + 8 grid points

  const std::string meta = slurp(fs::path(out) / "run.meta");
  CHECK(meta.rfind("command=discover\n", 0) == 0);
  CHECK(meta.find("method=sgtr\n") != std::string::npos);
  CHECK(meta.find("count=8\n") != std::string::npos);
}

TEST_CASE("repeat runs with the same seed are byte-identical") {
  TempDir tmp;
  write_wave_dataset(tmp.base("wave"));
  const std::string args = "discover --data " + tmp.base("wave") + kSmallLibrary +
                           "--method sgtr --seed 11 --out ";
  REQUIRE(run_cli(args + tmp.base("a")) == 0);
  REQUIRE(run_cli(args + tmp.base("b")) == 0);
  CHECK(slurp(tmp.path / "a" / "model.json") == slurp(tmp.path / "b" / "model.json"));
  CHECK(slurp(tmp.path / "a" / "coeffs.csv") == slurp(tmp.path / "b" / "coeffs.csv"));
  CHECK(slurp(tmp.path / "a" / "sweep.csv") == slurp(tmp.path / "b" / "sweep.csv"));

  // The thread cap only reorders the work, never the result.
  REQUIRE(run_cli_env("PARAPDE_THREADS=2", args + tmp.base("c")) == 0);
  CHECK(slurp(tmp.path / "a" / "model.json") == slurp(tmp.path / "c" / "model.json"));
}

TEST_CASE("config files fill in unset options and reject junk") {
  TempDir tmp;
  write_wave_dataset(tmp.base("wave"));

  const std::string cfg = tmp.base("discover.cfg");
  {
    std::ofstream out(cfg);
    out << "command=discover\n"
        << "# comment lines are skipped\n"
        << "data=" << tmp.base("wave") << "\n"
        << "method=glasso\n"
        << "count=8\n"
        << "max_power=1\n"
        << "max_derivative=2\n"
        << "seed=5\n"
        << "out=" << tmp.base("from_config") << "\n";
  }
  REQUIRE(run_cli("discover --config " + cfg) == 0);
  const json doc = json::parse(slurp(fs::path(tmp.base("from_config")) / "model.json"));
  CHECK(doc.at("method") == "glasso");

  // Explicit command-line values beat the file.
  REQUIRE(run_cli("discover --config " + cfg + " --method sgtr --out " +
                  tmp.base("override")) == 0);
  const json doc2 = json::parse(slurp(fs::path(tmp.base("override")) / "model.json"));
  CHECK(doc2.at("method") == "sgtr");

  {
    std::ofstream out(cfg, std::ios::app);
    out << "flux_capacitor=1\n";
  }
  CHECK(run_cli("discover --config " + cfg + " --out " + tmp.base("junk")) == 2);

  const std::string wrong = tmp.base("wrong.cfg");
  {
    std::ofstream out(wrong);
    out << "command=compare\n";
  }
  CHECK(run_cli("discover --config " + wrong + " --data " + tmp.base("wave") + " --out " +
                tmp.base("w")) == 2);
}

TEST_CASE("compare writes both methods side by side") {
  TempDir tmp;
  write_wave_dataset(tmp.base("wave"));
  const std::string out = tmp.base("cmp");
  REQUIRE(run_cli("compare --data " + tmp.base("wave") + kSmallLibrary + "--seed 5 --out " +
                  out) == 0);
  for (const char* name :
       {"model_sgtr.json", "model_glasso.json", "coeffs_sgtr.csv", "coeffs_glasso.csv",
        "sweep_sgtr.csv", "sweep_glasso.csv", "compare.csv", "run.meta"})
    REQUIRE(fs::exists(fs::path(out) / name));

  std::istringstream summary(slurp(fs::path(out) / "compare.csv"));
  std::string line;
  REQUIRE(std::getline(summary, line));
  CHECK(line == "method,k,loss,hyperparameter,terms");
  REQUIRE(std::getline(summary, line));
  CHECK(line.rfind("sgtr,", 0) == 0);
  CHECK(line.find("1;u") != std::string::npos);
  REQUIRE(std::getline(summary, line));
  CHECK(line.rfind("glasso,", 0) == 0);

  const json doc = json::parse(slurp(fs::path(out) / "model_sgtr.json"));
  CHECK(doc.at("terms") == json::array({"1", "u"}));
}

TEST_CASE("2d datasets reject 1d-only switches but discover cleanly") {
  TempDir tmp;
  write_flat_2d_dataset(tmp.base("flow"));
  const std::string data = tmp.base("flow");
  CHECK(run_cli("discover --data " + data + " --coarsen-x 2 --out " + tmp.base("o")) == 2);
  CHECK(run_cli("discover --data " + data + " --lowpass 4 --out " + tmp.base("o")) == 2);
  CHECK(run_cli("discover --data " + data + " --row-stride 2 --out " + tmp.base("o")) == 2);
  CHECK(run_cli("discover --data " + data + " --axis space --out " + tmp.base("o")) == 2);
  // More samples than grid points
  CHECK(run_cli("discover --data " + data + " --samples 1000 --every 1 --out " +
                tmp.base("o")) == 2);

  const std::string out = tmp.base("flow_run");
  REQUIRE(run_cli("discover --data " + data +
                  " --samples 120 --every 1 --count 8 --seed 5 --out " + out) == 0);
  const json doc = json::parse(slurp(fs::path(out) / "model.json"));
  CHECK(doc.at("axis") == "time");
  CHECK(doc.at("terms") == json::array({"1"}));
  CHECK(doc.at("k") == 1);
}
