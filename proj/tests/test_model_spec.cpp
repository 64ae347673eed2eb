#include <doctest.h>

#include "semann/bundled.hpp"
#include "semann/errors.hpp"
#include "semann/model_spec.hpp"

using namespace semann;

TEST_CASE("minimal measurement line") {
  const ModelSpec spec = parse_model("TSAT =~ TSAT1 + TSAT2\n");
  REQUIRE(spec.measurement.size() == 1);
  CHECK(spec.measurement[0].name == "TSAT");
  CHECK(spec.measurement[0].items ==
        std::vector<std::string>{"TSAT1", "TSAT2"});
}

TEST_CASE("comments and blank lines are ignored, order preserved") {
  const ModelSpec spec = parse_model(
      "# leading comment\n"
      "\n"
      "A =~ a1 + a2   # trailing comment\n"
      "B =~ b1 + b2\n"
      "B ~ A\n");
  REQUIRE(spec.measurement.size() == 2);
  CHECK(spec.measurement[0].name == "A");
  CHECK(spec.measurement[1].name == "B");
  REQUIRE(spec.structural.size() == 1);
  CHECK(spec.structural[0].target == "B");
}

TEST_CASE("bundled model: 11 constructs, 43 items, expected paths") {
  const ModelSpec spec = bundled_model();
  CHECK(spec.measurement.size() == 11);
  CHECK(spec.all_items().size() == 43);
  CHECK(spec.controls.size() == 7);
  CHECK(spec.outcome == "gap_seconds");
  CHECK(spec.hypotheses.size() == 14);
  CHECK(spec.mediations.size() == 8);

  // structural edges of the framework
  auto has_edge = [&](const std::string& target, const std::string& source) {
    for (const auto& r : spec.structural)
      if (r.target == target)
        for (const auto& p : r.predictors)
          if (p == source) return true;
    return false;
  };
  CHECK(has_edge("TST", "UT"));
  CHECK(has_edge("TSADT", "UADT"));
  CHECK(has_edge("TSAT", "UT"));
  CHECK(has_edge("TSAT", "UADT"));
  CHECK(has_edge("TSAT", "TST"));
  CHECK(has_edge("TSAT", "TSADT"));
  CHECK(has_edge("RP", "TSAT"));
  CHECK(has_edge("RP", "Positive"));
  CHECK(has_edge("gap_seconds", "RP"));
  CHECK(has_edge("gap_seconds", "TSAT"));
  CHECK(has_edge("gap_seconds", "Violations"));
  CHECK(!has_edge("gap_seconds", "Lapses"));

  const auto endo = spec.endogenous_constructs();
  CHECK(endo == std::vector<std::string>{"UT", "TST", "UADT", "TSADT", "TSAT",
                                         "RP"});
}

TEST_CASE("cyclic regressions are rejected") {
  CHECK_THROWS_AS(parse_model("A =~ a1 + a2\n"
                              "B =~ b1 + b2\n"
                              "A ~ B\n"
                              "B ~ A\n"),
                  ValidationError);
}

TEST_CASE("self-regression is rejected with the line number") {
  try {
    parse_model("A =~ a1 + a2\nA ~ A\n");
    FAIL("expected ModelParseError");
  } catch (const ModelParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("unknown regression variable carries its line number") {
  try {
    parse_model("A =~ a1 + a2\n\nA ~ Ghost\n");
    FAIL("expected ModelParseError");
  } catch (const ModelParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("Ghost") != std::string::npos);
  }
}

TEST_CASE("duplicate item assignment is rejected") {
  CHECK_THROWS_AS(parse_model("A =~ x1 + x2\nB =~ x2 + x3\n"),
                  ValidationError);
}

TEST_CASE("empty source and malformed lines") {
  CHECK_THROWS_AS(parse_model("   \n  \n"), ModelParseError);
  CHECK_THROWS_AS(parse_model("A =~ a1\nnot a line\n"), ModelParseError);
  CHECK_THROWS_AS(parse_model("control: gender female male\n"),
                  ModelParseError);
  CHECK_THROWS_AS(parse_model("hypothesis: H1 A => B +\n"), ModelParseError);
}

TEST_CASE("model text round-trips through the parser") {
  const ModelSpec spec = bundled_model();
  const ModelSpec reparsed = parse_model(to_model_text(spec));
  CHECK(reparsed.measurement.size() == spec.measurement.size());
  CHECK(reparsed.structural.size() == spec.structural.size());
  CHECK(reparsed.controls.size() == spec.controls.size());
  CHECK(reparsed.hypotheses.size() == spec.hypotheses.size());
  CHECK(reparsed.mediations.size() == spec.mediations.size());
  CHECK(to_model_text(reparsed) == to_model_text(spec));
}
