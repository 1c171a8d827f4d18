#include <algorithm>

#include "core/errors.hpp"
#include "core/lattice.hpp"
#include "doctest.h"

using namespace scaa;
using namespace scaa::lattice;

namespace {

const Lattice& lat() { return Lattice::default_lattice(); }

bool prefix_leq(const Label& a, const Label& b) {
  const auto& pa = a.path();
  const auto& pb = b.path();
  return pb.size() <= pa.size() && std::equal(pb.begin(), pb.end(), pa.begin());
}

}  // namespace

TEST_CASE("default lattice shape") {
  auto c = lat().counts();
  CHECK(c.categories == 5);
  CHECK(lat().contains(lat().label("Hardware/Coil_Write/Unauthenticated_Coil_Write")));
  CHECK(lat().contains(Label::top()));
  CHECK(lat().elements().size() == 1 + c.categories + c.actions + c.risk_labels);
}

TEST_CASE("label parsing and printing") {
  CHECK(Label::parse("TOP").is_top());
  CHECK(Label::parse("Network/Socket_Init").tier() == 2);
  CHECK(lat().label("Network/Socket_Init").str() == "Network/Socket_Init");
  CHECK_THROWS_AS(lat().label("Network/Teleport"), Error);
  try {
    lat().validate(Label::parse("Nope"));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kUnknownLabel);
  }
}

TEST_CASE("order examples") {
  CHECK(lat().leq(lat().label("Hardware/Coil_Write/Unauthenticated_Coil_Write"), lat().label("Hardware/Coil_Write")));
  CHECK_FALSE(lat().leq(lat().label("Network/Socket_Init"), lat().label("Memory")));
  for (const auto& x : lat().elements()) CHECK(lat().leq(x, x));
}

TEST_CASE("join examples") {
  auto a = lat().label("Network/Socket_Init");
  CHECK(lat().join(a, Label::top()).is_top());
  CHECK(lat().join(a, a) == a);
  CHECK(lat().join(a, lat().label("Network/DNS_Resolve")) == lat().label("Network"));
  CHECK(lat().join(a, lat().label("Memory")).is_top());
}

TEST_CASE("covers examples") {
  CHECK(lat().covers(Label::top(), lat().label("Memory")));
  CHECK(lat().covers(lat().label("Hardware/Coil_Write"), lat().label("Hardware/Coil_Write/Unauthenticated_Coil_Write")));
  CHECK_FALSE(lat().covers(lat().label("Memory"), lat().label("Hardware/Register_Read")));
}

TEST_CASE("order agrees with the path-prefix oracle on every pair") {
  auto all = lat().elements();
  for (const auto& a : all) {
    for (const auto& b : all) CHECK(lat().leq(a, b) == prefix_leq(a, b));
  }
}

TEST_CASE("EVR") {
  auto coil = lat().label("Hardware/Coil_Write");
  auto unauth = lat().label("Hardware/Coil_Write/Unauthenticated_Coil_Write");
  auto dns = lat().label("Network/DNS_Resolve");
  std::vector<GoldenRecord> same{{"a", coil, coil}, {"b", dns, dns}};
  CHECK(lat().evr(same, EvrMode::kLatticeCover) == 0.0);

  std::vector<GoldenRecord> four{{"a", coil, coil}, {"b", unauth, coil}, {"c", dns, dns}, {"d", coil, dns}};
  CHECK(lat().evr(four, EvrMode::kLatticeCover) == doctest::Approx(0.25));
  CHECK(lat().evr(four, EvrMode::kExactTierMatch) == doctest::Approx(0.5));

  std::vector<GoldenRecord> none;
  CHECK_THROWS_AS(lat().evr(none, EvrMode::kLatticeCover), Error);
}

TEST_CASE("golden set and custom lattice JSON") {
  auto g = parse_golden_set(lat(), io::Json::parse(R"([{"function_id":"f","truth":"Memory","predicted":"TOP"}])"));
  REQUIRE(g.size() == 1);
  CHECK(g[0].predicted.is_top());

  auto custom = Lattice::from_json(io::Json::parse(R"({"A":{"x":["y"]},"B":{}})"));
  CHECK(custom.counts().categories == 2);
  CHECK(custom.counts().actions == 1);
  CHECK(custom.counts().risk_labels == 1);
  auto again = Lattice::from_json(custom.to_json());
  CHECK(again.elements() == custom.elements());
  CHECK_THROWS_AS(Lattice::from_json(io::Json::parse(R"({"A":{"x":[1]}})")), Error);
}
