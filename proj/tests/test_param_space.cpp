#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "modecfg/param_space.hpp"

using namespace modecfg;

namespace {

ParamSpace one_param(ParamScale scale, std::optional<double> lower = {},
                     std::optional<double> upper = {}) {
  ParamSpec p;
  p.name = "p";
  p.init = scale == ParamScale::Log ? 1.0 : 0.0;
  p.scale = scale;
  p.lower = lower;
  p.upper = upper;
  return ParamSpace({p});
}

Configuration cfg(double v) { return Configuration{{{"p", v}}}; }

}  // namespace

TEST_CASE("log transform is the natural log") {
  const auto space = one_param(ParamScale::Log);
  CHECK(to_search_space(space, cfg(100.0))[0] ==
        doctest::Approx(4.605170).epsilon(1e-6));
  CHECK(to_search_space(space, cfg(1.0))[0] == 0.0);
}

TEST_CASE("linear transform is the identity") {
  const auto space = one_param(ParamScale::Linear);
  CHECK(to_search_space(space, cfg(-3.5))[0] == -3.5);
}

TEST_CASE("log transform rejects non-positive values") {
  const auto space = one_param(ParamScale::Log);
  CHECK_THROWS_AS(to_search_space(space, cfg(0.0)), std::domain_error);
  CHECK_THROWS_AS(to_search_space(space, cfg(-1.0)), std::domain_error);
}

TEST_CASE("decoding inverts the transform") {
  const auto space = one_param(ParamScale::Log);
  SearchPoint pt(1);
  pt[0] = 0.0;
  CHECK(from_search_space(space, pt).values.at("p") == 1.0);
  pt[0] = 4.605170;
  CHECK(from_search_space(space, pt).values.at("p") ==
        doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("decoding clamps into declared bounds") {
  const auto space = one_param(ParamScale::Linear, std::nullopt, 5.0);
  SearchPoint pt(1);
  pt[0] = 9.0;
  CHECK(from_search_space(space, pt).values.at("p") == 5.0);
}

TEST_CASE("round trip is exact to 1e-12 relative error") {
  ParamSpec a{"a", 10.0, ParamScale::Log, 0.5, 2000.0};
  ParamSpec b{"b", -1.0, ParamScale::Linear, {}, {}};
  ParamSpec c{"c", 3.0, ParamScale::Log, {}, {}};
  const ParamSpace space({a, b, c});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Configuration original;
    original.values["a"] = 0.5 + unif(rng) * 1999.5;
    original.values["b"] = -50.0 + unif(rng) * 100.0;
    original.values["c"] = std::exp(-5.0 + 10.0 * unif(rng));
    const auto back = from_search_space(space, to_search_space(space, original));
    for (const auto& [name, v] : original.values) {
      CHECK(std::abs(back.values.at(name) - v) <= 1e-12 * std::abs(v));
    }
  }
}

TEST_CASE("log transform preserves value ordering") {
  const auto space = one_param(ParamScale::Log);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(1e-8, 1e8);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = unif(rng), y = unif(rng);
    const double tx = to_search_space(space, cfg(x))[0];
    const double ty = to_search_space(space, cfg(y))[0];
    CHECK((x < y) == (tx < ty));
  }
}

TEST_CASE("extreme coordinates still decode to valid configurations") {
  const auto bounded = one_param(ParamScale::Log, 0.1, 1000.0);
  const auto unbounded = one_param(ParamScale::Log);
  for (double coord : {-1e6, -800.0, -1.0, 0.0, 1.0, 800.0, 1e6}) {
    SearchPoint pt(1);
    pt[0] = coord;
    const double vb = from_search_space(bounded, pt).values.at("p");
    CHECK(vb >= 0.1);
    CHECK(vb <= 1000.0);
    const double vu = from_search_space(unbounded, pt).values.at("p");
    CHECK(vu > 0.0);
    CHECK(std::isfinite(vu));
  }
}

TEST_CASE("configuration validation matches the space exactly") {
  const auto space = one_param(ParamScale::Log);
  CHECK_THROWS_AS(space.validate(Configuration{{{"q", 1.0}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(space.validate(Configuration{{{"p", 1.0}, {"q", 1.0}}}),
                  std::invalid_argument);
}

TEST_CASE("space file defaults: log scale, sigma 0.5") {
  const auto space =
      parse_space_file(R"({"sigma": 0.5, "params":[{"name":"reg","init":10}]})");
  CHECK(space.dimension() == 1);
  CHECK(space.sigma0() == 0.5);
  CHECK(space.param(0).scale == ParamScale::Log);
  CHECK(space.param(0).init == 10.0);

  const auto defaulted = parse_space_file(R"({"params":[{"name":"r","init":1}]})");
  CHECK(defaulted.sigma0() == 0.5);
}

TEST_CASE("space file errors name the offending field") {
  CHECK_THROWS_WITH_AS(
      parse_space_file(
          R"({"params":[{"name":"a","init":1},{"name":"a","init":2}]})"),
      doctest::Contains("duplicate parameter name 'a'"), SpaceParseError);
  CHECK_THROWS_AS(
      parse_space_file(R"({"params":[{"name":"w","init":0,"scale":"log"}]})"),
      SpaceParseError);
  CHECK_THROWS_WITH_AS(
      parse_space_file(R"({"params":[{"name":"w","init":1,"wat":3}]})"),
      doctest::Contains("unknown key 'wat'"), SpaceParseError);
  CHECK_THROWS_AS(parse_space_file(R"({"sigma": 0.5})"), SpaceParseError);
  CHECK_THROWS_AS(parse_space_file("not json at all"), SpaceParseError);
  CHECK_THROWS_AS(
      parse_space_file(
          R"({"params":[{"name":"w","init":5,"min":1,"max":2}]})"),
      SpaceParseError);
}

TEST_CASE("fingerprints are canonical and order-independent") {
  Configuration a{{{"x", 1.5}, {"y", 2.0}}};
  Configuration b;
  b.values["y"] = 2.0;
  b.values["x"] = 1.5;
  CHECK(a.fingerprint() == b.fingerprint());
  Configuration c{{{"x", 1.5000000000000002}, {"y", 2.0}}};
  CHECK(a.fingerprint() != c.fingerprint());
}
