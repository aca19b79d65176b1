#include <sstream>

#include "doctest.h"
#include "haarlab/error.hpp"
#include "haarlab/io.hpp"
#include "oracles.hpp"

using namespace haarlab;

TEST_SUITE("io") {
  TEST_CASE("step function CSV round trip is bit exact") {
    Rng rng(41);
    const StepFunction f = oracle::random_function(DyadicGrid(4), rng);
    std::stringstream ss;
    io::write_step_function(ss, f);
    const StepFunction g = io::read_step_function(ss);
    CHECK(g.grid().depth() == 4);
    for (std::size_t j = 0; j < 16; ++j) CHECK(g[j] == f[j]);
  }

  TEST_CASE("CSV validation") {
    std::stringstream three("leaf,value\n0,1\n1,2\n2,3\n");
    CHECK_THROWS_AS(io::read_step_function(three), ValidationError);
    std::stringstream header("cell,value\n0,1\n");
    CHECK_THROWS_AS(io::read_step_function(header), ValidationError);
    std::stringstream order("leaf,value\n1,1\n0,2\n");
    CHECK_THROWS_AS(io::read_step_function(order), ValidationError);
    std::stringstream neg("leaf,value\n0,1\n1,-2\n");
    try {
      io::read_weight(neg);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }

  TEST_CASE("cube function CSV") {
    std::stringstream ss;
    io::write_cube_function(ss, CubeFunction{2, 2, std::vector<double>(16, 0.5)});
    const CubeFunction f = io::read_cube_function(ss, 2);
    CHECK(f.cube_depth == 2);
    std::stringstream bad("cell,value\n0,1\n1,1\n");
    CHECK_THROWS_AS(io::read_cube_function(bad, 2), ValidationError);
  }

  TEST_CASE("shift JSON round trip and first violating Q") {
    Rng rng(42);
    const auto spec = ops::HaarShiftSpec::random(DyadicGrid(4), 2, rng);
    std::stringstream ss;
    io::write_shift(ss, spec);
    const io::ShiftFile file = io::read_shift(ss);
    CHECK(file.kind == "general");
    REQUIRE(file.general);
    CHECK(file.general->entries().size() == spec.entries().size());
    CHECK(file.general->entries()[2].kernel == spec.entries()[2].kernel);

    std::stringstream bad(R"({"kind":"general","depth":3,"n":1,"entries":[
      {"Q":[0,0],"kernel":[1,1,1,1]},{"Q":[1,1],"kernel":[2,2,2,2.5]}]})");
    try {
      io::read_shift(bad);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("Q = 1/1") != std::string::npos);
    }

    const auto el = ops::ElementaryShiftSpec::random(DyadicGrid(4), 1, 0, rng);
    std::stringstream es;
    io::write_shift(es, el);
    const io::ShiftFile efile = io::read_shift(es);
    CHECK(efile.kind == "elementary");
    REQUIRE(efile.elementary);
    CHECK(efile.general->complexity() == 2);
  }

  TEST_CASE("tree JSON round trip and validation") {
    Rng rng(43);
    const ParaTree tree = random_para_tree(2, 4.0, rng);
    std::stringstream ss;
    io::write_tree(ss, tree.tree(), &tree.M());
    const io::TreeFile file = io::read_tree(ss);
    REQUIRE(file.para);
    CHECK(file.tree->nodes() == tree.tree().nodes());
    CHECK(file.para->d() == doctest::Approx(tree.d()).epsilon(1e-15));

    std::stringstream broken(R"({"A":4,"n":1,"nodes":{"0/0":[0,0,1,1,1,1],"1/0":[1,0,1,1,1,1],"1/1":[0,0,1,1,1,1]}})");
    CHECK_THROWS_AS(io::read_tree(broken), ValidationError);
    std::stringstream missing(R"({"A":4,"n":1,"nodes":{"0/0":[0,0,1,1,1,1]}})");
    CHECK_THROWS_AS(io::read_tree(missing), ValidationError);
  }

  TEST_CASE("seventeen significant digits") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(1.0) == "1");
  }
}
