#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "soligas/error.hpp"
#include "soligas/json_io.hpp"

using namespace soligas;

TEST_SUITE("json") {
  TEST_CASE("config round trip") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    const json j = c;
    CHECK(j.at("chi").size() == 2);
    CHECK(j.get<SolitonConfig>() == c);
  }

  TEST_CASE("bad config") {
    CHECK_THROWS_AS(json::parse(R"({"chi": [1]})").get<SolitonConfig>(), Error);
    CHECK_THROWS_AS(json::parse(R"({"chi": [2, 1], "y": [0, 0]})").get<SolitonConfig>(), Error);
  }

  TEST_CASE("report round trip") {
    TheoremReport r;
    r.theorem = "fluid_cell";
    r.measured = {{"a", 1.5}};
    r.bound = {{"a", 2.0}};
    r.series = {{"L", {1.0, 2.0}}};
    r.metadata = {{"n", "4"}};
    r.pass = true;
    const json j = r;
    CHECK(j.get<TheoremReport>() == r);
  }

  TEST_CASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "soligas_json_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "cfg.json").string();
    save_json(path, json(SolitonConfig({1.0}, {0.5})));
    CHECK(load_config(path).y(0) == 0.5);
    try {
      load_json((dir / "missing.json").string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("solution serialisation") {
    const SolitonConfig c({1.0, 2.0}, {-3.0, 3.0});
    const json j = expand(c, 0.0);
    CHECK(j.at("pattern").size() == 2);
    const json e = scan_effective(c, 0.5);
    CHECK(e.at("scan").at("converged").get<bool>());
  }
}
