#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "soligas/json_io.hpp"
#include "soligas_cli/cli.hpp"
#include "soligas_cli/csv.hpp"

namespace fs = std::filesystem;
using soligas::json;
namespace cli = soligas::cli;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("SOLIGAS_TEST_TMP");
  const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "soligas_cli_tests";
  const auto dir = base / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string l;
  std::getline(in, l);
  return l;
}

std::string write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("one-soliton field matches sech^2") {
    const auto dir = scratch("field");
    const auto cfg = write_config(dir, "one.json", R"({"chi": [1.0], "y": [0.0]})");
    const auto out = (dir / "field.csv").string();
    const auto r = run({"field", "--config", cfg, "--xmin", "-10", "--xmax", "10", "--points", "1000", "--order", "2",
                        "--out", out});
    REQUIRE(r.code == 0);
    CHECK(first_line(out) == "x,u,u_x,u_xx,log_tau,representation");
    const auto t = cli::read_csv(out);
    CHECK(t.rows.size() == 1000);
    double err = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double x = t.number(i, 0), s = 1.0 / std::cosh(x);
      err = std::max(err, std::abs(t.number(i, 1) - 2.0 * s * s));
    }
    CHECK(err < 1e-10);
    CHECK(fs::exists(out + ".manifest.json"));
    const auto m = soligas::load_json(out + ".manifest.json");
    CHECK(m.at("command") == "field");
    CHECK(m.at("outputs").at(0).at("path") == out);
    CHECK(m.at("outputs").at(0).at("bytes").get<std::size_t>() == fs::file_size(out));
  }

  TEST_CASE("argument errors exit 2 with usage") {
    auto r = run({"field", "--no-such-flag"});
    CHECK(r.code == cli::kArgumentError);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(run({}).code == cli::kArgumentError);
    CHECK(run({"frobnicate"}).code == cli::kArgumentError);
    CHECK(run({"--help"}).code == 0);

    const auto dir = scratch("argerr");
    const auto bad = write_config(dir, "bad.json", R"({"chi": [2.0, 1.0], "y": [0.0, 0.0]})");
    r = run({"field", "--config", bad});
    CHECK(r.code == cli::kArgumentError);
    CHECK(r.err.find("ordering") != std::string::npos);
    CHECK(run({"field", "--config", (dir / "missing.json").string()}).code == cli::kArgumentError);
  }

  TEST_CASE("expansion cap is a solver failure") {
    const auto dir = scratch("cap");
    json c;
    std::vector<double> chi, y(20, 0.0);
    for (int i = 0; i < 20; ++i) chi.push_back(1.0 + 0.1 * i);
    c["chi"] = chi;
    c["y"] = y;
    const auto cfg = write_config(dir, "big.json", c.dump());
    CHECK(run({"field", "--config", cfg, "--points", "3", "--method", "expansion"}).code == cli::kSolverFailure);
    // 20 solitons piled up at one point: the determinant alone is numerically singular on the left
    CHECK(run({"field", "--config", cfg, "--points", "11", "--method", "determinant"}).code == cli::kSolverFailure);
    // the default path falls back to the centred form; y = 0 makes u even in x
    const auto pile = (dir / "pile.csv").string();
    REQUIRE(run({"field", "--config", cfg, "--points", "21", "--out", pile}).code == 0);
    const auto t = soligas::cli::read_csv(pile);
    const auto cu = t.column("u"), cr = t.column("representation");
    REQUIRE(t.rows.size() == 21);
    bool centred = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      centred = centred || t.rows[r][cr].rfind("centred", 0) == 0;
      CHECK(t.number(r, cu) == doctest::Approx(t.number(20 - r, cu)).epsilon(1e-8));
    }
    CHECK(centred);
    // spread out, the determinant path handles n above the expansion cap
    for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = 6.0 * (i - 10);
    c["y"] = y;
    const auto spread = write_config(dir, "spread.json", c.dump());
    CHECK(run({"field", "--config", spread, "--xmin", "-70", "--xmax", "70", "--points", "141"}).code == 0);
  }

  TEST_CASE("outputs are deterministic") {
    const auto dir = scratch("determinism");
    const auto a = (dir / "a.json").string(), b = (dir / "b.json").string(), c = (dir / "c.json").string();
    REQUIRE(run({"gas", "--kind", "uniform", "--n", "12", "--seed", "5", "--out", a}).code == 0);
    REQUIRE(run({"gas", "--kind", "uniform", "--n", "12", "--seed", "5", "--out", b}).code == 0);
    REQUIRE(run({"gas", "--kind", "uniform", "--n", "12", "--seed", "6", "--out", c}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
    CHECK(soligas::load_json(a + ".manifest.json").at("seed") == 5);

    const auto f1 = (dir / "f1.csv").string(), f2 = (dir / "f2.csv").string();
    REQUIRE(run({"field", "--config", a, "--points", "301", "--out", f1}).code == 0);
    REQUIRE(run({"field", "--config", a, "--points", "301", "--out", f2, "--threads", "1"}).code == 0);
    CHECK(slurp(f1) == slurp(f2));
  }

  TEST_CASE("csv layouts") {
    const auto dir = scratch("layouts");
    const auto cfg = (dir / "gas.json").string();
    REQUIRE(run({"gas", "--n", "3", "--out", cfg}).code == 0);

    const auto pos = (dir / "pos.csv").string();
    REQUIRE(run({"positions", "--config", cfg, "--points", "11", "--out", pos}).code == 0);
    CHECK(first_line(pos) == "x_star,i,X,d,region");
    CHECK(cli::read_csv(pos).rows.size() == 33);

    const auto eff = (dir / "eff.json").string(), traj = (dir / "traj.csv").string();
    REQUIRE(run({"effective", "--config", cfg, "--deltaX", "1.5", "--out", eff, "--trajectory", traj}).code == 0);
    CHECK(first_line(traj) == "x_star,i,X");
    const auto e = soligas::load_json(eff);
    CHECK(e.at("x_eff").size() == 3);
    CHECK(e.at("bethe").at("pass").get<bool>());

    const auto micro = (dir / "micro.csv").string();
    REQUIRE(run({"micro", "--config", cfg, "--times", "0", "0.5", "1.0", "--deltaX", "1.5", "--out", micro}).code == 0);
    CHECK(first_line(micro) == "t,i,x_eff");
    CHECK(cli::read_csv(micro).rows.size() == 9);

    const auto rho0 = (dir / "rho0.csv").string();
    {
      std::ofstream o(rho0);
      o << "chi,x,rho\n";
      for (double chi : {1.0, 1.5, 2.0})
        for (int c = 0; c < 20; ++c) o << chi << ',' << 0.25 + 0.5 * c << ',' << 0.01 * std::exp(-std::pow(0.5 * c - 5, 2)) << '\n';
    }
    const auto rho1 = (dir / "rho1.csv").string();
    REQUIRE(run({"ghd", "--rho0", rho0, "--chi-nodes", "5", "--t-end", "0.2", "--out", rho1}).code == 0);
    CHECK(first_line(rho1) == "chi,x,rho");
    CHECK(cli::read_csv(rho1).rows.size() == 100);

    const auto script = (dir / "plots.gp").string();
    REQUIRE(run({"plot", "--input", pos, traj, micro, rho1, "--out", script}).code == 0);
    const auto gp = slurp(script);
    CHECK(gp.find("set datafile separator ','") != std::string::npos);
    CHECK(gp.find("splot") != std::string::npos);
    CHECK(gp.find(traj) != std::string::npos);
  }

  TEST_CASE("charges and projections") {
    const auto dir = scratch("charges");
    const auto cfg = write_config(dir, "pair.json", R"({"chi": [1.0, 2.0], "y": [0.0, 0.0]})");
    auto r = run({"charges", "--config", cfg});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at(2).at("expected").get<double>() == 33.0);
    CHECK(j.at(2).at("relative_error").get<double>() < 1e-8);

    r = run({"project", "--config", cfg, "--mode", "shift", "--plus", "1"});
    REQUIRE(r.code == 0);
    CHECK(std::abs(json::parse(r.out).at("config").at("y").at(0).get<double>() + 0.5493061443340549) < 1e-14);
    CHECK(run({"project", "--config", cfg, "--plus", "1", "--minus", "1"}).code == cli::kArgumentError);
  }

  TEST_CASE("assumption check exit codes") {
    const auto dir = scratch("check");
    const auto good = (dir / "good.json").string();
    REQUIRE(run({"gas", "--n", "4", "--out", good}).code == 0);
    CHECK(run({"check", "--config", good, "--A", "2", "--out", (dir / "good_report.json").string()}).code == 0);
    const auto low = write_config(dir, "low.json", R"({"chi": [0.5, 0.9], "y": [-20.0, 20.0]})");
    CHECK(run({"check", "--config", low, "--out", (dir / "low_report.json").string()}).code == cli::kFailedVerification);
    CHECK(fs::exists(dir / "low_report.json"));
  }

  TEST_CASE("verify suite on an ultra-dilute fixture") {
    const auto dir = scratch("verify");
    const auto cfg = (dir / "ud.json").string();
    REQUIRE(run({"gas", "--kind", "ultra-dilute", "--n", "6", "--R", "0.8", "--C", "1.1", "--out", cfg}).code == 0);
    const auto out = (dir / "reports").string();
    const auto r = run({"verify", "--suite", "all", "--config", cfg, "--out", out});
    CHECK(r.code == 0);
    for (const char* name : {"local_form", "support", "fluid_cell", "weak_limit"}) {
      const auto p = fs::path(out) / (std::string(name) + ".json");
      REQUIRE(fs::exists(p));
      CHECK(soligas::load_json(p.string()).at("pass").get<bool>());
    }
    CHECK(first_line(fs::path(out) / "summary.csv") == "theorem,pass,quantity,measured,bound");
    CHECK(fs::exists(fs::path(out) / "manifest.json"));

    // a tolerance nobody can meet fails the run with exit 1
    const auto strict = run({"verify", "--suite", "fluid_cell", "--config", cfg, "--tolerance", "1e-30", "--out",
                             (dir / "strict").string()});
    CHECK(strict.code == cli::kFailedVerification);
  }
}
