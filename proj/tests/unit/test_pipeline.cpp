#include <fstream>

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace scaa;
using namespace scaa::pipeline;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kInternal;
}

}  // namespace

TEST_CASE("defaults and overrides") {
  auto cfg = config_from_json(io::Json::object(), ".");
  CHECK(cfg.seed == 0);
  CHECK(cfg.tau == 0.78);
  CHECK(cfg.risk.beta == 0.15);
  CHECK(cfg.model.layers == 6);
  CHECK(cfg.echo == default_config_json());

  auto toy = load_config(testing::fixture("toy.config.json"));
  CHECK(toy.seed == 7);
  CHECK(toy.annotator.path == testing::fixture("rules_ics.json"));
  CHECK(toy.echo["cves"] == "cves_ics.json");

  auto o = override_config(toy, io::Json::parse(R"({"seed": 3, "risk": {"beta": 0.5}})"), ".");
  CHECK(o.seed == 3);
  CHECK(o.risk.beta == 0.5);
  CHECK(o.cves == toy.cves);
}

TEST_CASE("config errors") {
  CHECK(code_of([] { config_from_json(io::Json::parse(R"({"risk": {"beta": 0}})"), "."); }) == Errc::kConfig);
  CHECK(code_of([] { config_from_json(io::Json::parse(R"({"model": {"heads": 3}})"), "."); }) == Errc::kConfig);
  CHECK(code_of([] { config_from_json(io::Json::parse(R"({"embedding": {"type": "magic"}})"), "."); }) ==
        Errc::kConfig);
  CHECK(code_of([] { config_from_json(io::Json::parse(R"({"seed": "x"})"), "."); }) == Errc::kConfig);
  Context ctx(config_from_json(io::Json::object(), "."));
  CHECK(code_of([&] { ctx.annotator(); }) == Errc::kConfig);
}

TEST_CASE("toy pipeline writes every artifact deterministically") {
  Context ctx(load_config(testing::fixture("toy.config.json")));
  auto a = testing::scratch_dir("pipe_a");
  auto b = testing::scratch_dir("pipe_b");
  auto r = run_pipeline(ctx, testing::fixture("toy_modbus.cpg.json"), a);
  run_pipeline(ctx, testing::fixture("toy_modbus.cpg.json"), b);
  CHECK(r.binary_id == "toy_modbus_plc.bin");
  CHECK(r.alerts == 0);
  for (const char* f : {"cpg.json", "corpus.jsonl", "kg.json", "node_embeddings.json", "risk.json", "alerts.json",
                        "report.json", "kg.dot"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(a / f));
    CHECK(io::read_text(a / f) == io::read_text(b / f));
  }
  auto report = io::read_json(a / "report.json");
  CHECK(report["tool"]["name"] == "scaa");
  CHECK(report["stats"]["entities"] == 5);
  CHECK(report["config"]["seed"] == 7);
}

TEST_CASE("planted taint ranks the coil sink first") {
  Context ctx(load_config(testing::fixture("planted_taint.config.json")));
  auto dir = testing::scratch_dir("planted");
  run_pipeline(ctx, testing::fixture("planted_taint.cpg.json"), dir);
  auto risk = io::read_json(dir / "risk.json");
  CHECK(risk["ranking"][0]["name"] == "write_coil_impl");
  CHECK(risk["ranking"][0]["rho"].get<double>() == doctest::Approx(0.5140357).epsilon(1e-6));
}

TEST_CASE("stage errors name the stage") {
  Context ctx(load_config(testing::fixture("toy.config.json")));
  auto dir = testing::scratch_dir("missing");
  try {
    run_pipeline(ctx, dir / "absent.cpg.json", dir / "out");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kIo);
    CHECK(std::string(e.what()).find("ingest") != std::string::npos);
  }
}

TEST_CASE("batch runs follow input order") {
  Context ctx(load_config(testing::fixture("toy.config.json")));
  auto root = testing::scratch_dir("batch");
  std::vector<std::filesystem::path> cpgs{testing::fixture("toy_modbus.cpg.json"),
                                          testing::fixture("fingerprint_decoy.cpg.json")};
  auto results = run_pipelines(ctx, cpgs, root, 2);
  REQUIRE(results.size() == 2);
  CHECK(results[0].out_dir == root / "toy_modbus.cpg");
  CHECK(std::filesystem::exists(results[1].out_dir / "report.json"));
}
