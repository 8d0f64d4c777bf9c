#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "ctrac/product.hpp"
#include "support/fixtures.hpp"

using namespace ctrac;
using namespace ctrac::testing;

TEST_SUITE_BEGIN("cli_formats");

TEST_CASE("chart JSON round trip preserves the chart") {
  for (const char* name : {"flat:d=3", "sphere_stereo:d=2", "circle:mu=-0.5", "product:s2xh2",
                           "scale_singular_product"}) {
    Chart c = catalog_chart(name);
    Chart back = Chart::from_json_string(c.to_json_string());
    CHECK(back.dim() == c.dim());
    CHECK(back.mu() == c.mu());
    CHECK(back.digest() == c.digest());
    for (const auto& p : points(c, 5)) {
      for (int i = 0; i < c.dim() * c.dim(); ++i)
        CHECK(back.metric_entries()[i].eval(p) ==
              doctest::Approx(c.metric_entries()[i].eval(p)).epsilon(1e-14));
    }
    if (c.product()) {
      REQUIRE(back.product().has_value());
      CHECK(back.product()->m1 == c.product()->m1);
    }
  }
}

TEST_CASE("chart file save and load") {
  Chart c = catalog_chart("sphere_stereo:d=3");
  std::string path = "/tmp/ctrac_test_chart.json";
  c.save_file(path);
  Chart back = Chart::load_file(path);
  CHECK(back.digest() == c.digest());
  std::remove(path.c_str());
}

TEST_CASE("malformed chart JSON is rejected") {
  CHECK_THROWS_AS(Chart::from_json_string("not json"), Error);
  CHECK_THROWS_AS(Chart::from_json_string("{\"dim\": 2}"), Error);
  CHECK_THROWS_AS(
      Chart::from_json_string(
          R"({"dim": 2, "box": [[0,1]], "metric": [["1","0"],["0","1"]]})"),
      Error);
  // d = 3 chart must not carry mu
  CHECK_THROWS_AS(
      Chart::from_json_string(
          R"({"dim": 1, "box": [[0,1]], "metric": [["1"]]})")
          .validate(),
      Error);
}

TEST_CASE("documented metric expression strings parse") {
  Chart c = Chart::from_json_string(R"({
    "dim": 2,
    "box": [[-0.8, 0.8], [-0.8, 0.8]],
    "metric": [["4/(1+x1^2+x2^2)^2", "0"], ["0", "4/(1+x1^2+x2^2)^2"]],
    "mu": 0.5
  })");
  c.validate();
  CHECK(scalar_curvature(c, std::vector<double>{0.1, -0.2}) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_SUITE_END();
