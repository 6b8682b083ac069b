#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "aloha/config.hpp"

using namespace aloha;

namespace {

const char* kTwoClassSimulate = R"({
  "model": {"lambda": [0.5, 0.5], "p": [1.0, 0.5]},
  "simulate": {"R": 100, "t_max": 2.0, "z0": [0.0, 0.0], "seed": 7}
})";

}  // namespace

TEST_CASE("parse_config accepts a full two-class document", "[config]") {
  const RunConfig cfg = parse_config(kTwoClassSimulate);
  const auto& sim = std::get<SimulateCfg>(cfg.experiment);
  CHECK(sim.R == 100.0);
  CHECK(sim.t_max.value() == 2.0);
  CHECK(sim.seed.value() == 7);
  CHECK(cfg.model.lambda == Vec{0.5, 0.5});
}

TEST_CASE("parse_config errors", "[config]") {
  SECTION("rejects malformed JSON") {
    CHECK_THROWS_AS(parse_config("{not json"), ParseError);
  }
  SECTION("names the missing field") {
    try {
      parse_config(R"({"model": {"lambda": [1.0]}, "equilibrium": {}})");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("model.p") != std::string::npos);
    }
  }
  SECTION("propagates assumption 2 with the threshold named") {
    try {
      parse_config(R"({
        "model": {"lambda": [0.2, 0.1], "p": [0.5, 0.5]},
        "equilibrium": {}
      })");
      FAIL("expected AssumptionViolated");
    } catch (const AssumptionViolated& e) {
      CHECK(e.which() == 2);
      CHECK(std::string(e.what()).find("exceeds the stability threshold") != std::string::npos);
    }
  }
  SECTION("exactly one experiment block") {
    CHECK_THROWS_AS(parse_config(R"({"model": {"lambda": [1.0], "p": [0.5]}})"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({
      "model": {"lambda": [1.0], "p": [0.5]},
      "equilibrium": {},
      "validate": {}
    })"),
                    ParseError);
  }
  SECTION("experiment parameter validation") {
    CHECK_THROWS_AS(parse_config(R"({
      "model": {"lambda": [1.0], "p": [0.5]},
      "converge": {"R_ladder": [10, 20], "reps": 0, "t_max": 1.0, "z0": [0.0]}
    })"),
                    ParseError);
    CHECK_THROWS_AS(parse_config(R"({
      "model": {"lambda": [1.0], "p": [0.5]},
      "simulate": {"R": 10, "z0": [0.0]}
    })"),
                    ParseError);
  }
}

TEST_CASE("categorical arrival configs", "[config]") {
  const RunConfig cfg = parse_config(R"({
    "model": {
      "p": [0.5, 0.5],
      "arrival": {"type": "categorical",
                  "support": [[2, 1], [0, 0]],
                  "probs": [0.5, 0.5]}
    },
    "equilibrium": {}
  })");
  CHECK(cfg.model.lambda[0] == Catch::Approx(1.0));
  CHECK(cfg.model.lambda[1] == Catch::Approx(0.5));

  SECTION("trivial categorical input is rejected as assumption 1") {
    try {
      parse_config(R"({
        "model": {
          "p": [0.5, 0.5],
          "arrival": {"type": "categorical",
                      "support": [[1, 0], [0, 0]],
                      "probs": [0.9, 0.1]}
        },
        "equilibrium": {}
      })");
      FAIL("expected AssumptionViolated");
    } catch (const AssumptionViolated& e) {
      CHECK(e.which() == 1);
    }
  }
}

TEST_CASE("wrong JSON types surface as ParseError", "[config]") {
  CHECK_THROWS_AS(parse_config(R"({
    "model": {"lambda": [1.0], "p": [0.5]},
    "simulate": {"R": 10, "horizon": -3, "z0": [0.0]}
  })"),
                  ParseError);
  CHECK_THROWS_AS(parse_config(R"({
    "model": {"lambda": "one", "p": [0.5]},
    "equilibrium": {}
  })"),
                  ParseError);
}
