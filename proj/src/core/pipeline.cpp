#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "core/cpg.hpp"
#include "core/errors.hpp"

namespace scaa::pipeline {
namespace {

namespace fs = std::filesystem;
using io::Json;

fs::path resolve(const Json& v, const fs::path& base) {
  if (v.is_null()) return {};
  if (!v.is_string()) raise(Errc::kConfig, "paths must be strings");
  fs::path p = v.get<std::string>();
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

std::vector<lattice::Label> labels(const Json& j, const char* key) {
  if (!j.is_array()) raise(Errc::kConfig, std::string("ssckg.") + key + " must be a list of labels");
  std::vector<lattice::Label> out;
  for (const auto& s : j) out.push_back(lattice::Label::parse(s.get<std::string>()));
  return out;
}

Json label_list(std::span<const lattice::Label> ls) {
  Json out = Json::array();
  for (const auto& l : ls) out.push_back(l.str());
  return out;
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    raise(Errc::kConfig, std::string("config key '") + key + "': " + e.what());
  }
}

// Merge patches delete keys set to null; put optional keys back as null so
// the effective config always has the full shape.
void restore_nulls(Json& eff, const Json& defaults) {
  for (const auto& [key, v] : defaults.items()) {
    if (!eff.contains(key)) {
      if (v.is_null()) eff[key] = nullptr;
    } else if (v.is_object() && eff[key].is_object()) {
      restore_nulls(eff[key], v);
    }
  }
}

}  // namespace

Json default_config_json() {
  const auto rel = ssckg::RelationConfig::defaults();
  const ssckg::WeightTable w;
  Json weights = Json::object();
  for (std::size_t t = 0; t < ssckg::kRelationTypeCount; ++t) {
    const auto type = static_cast<ssckg::RelationType>(t);
    weights[std::string(ssckg::to_string(type))] = w[type];
  }
  Json ast = Json::object();
  for (const auto& [label, type] : rel.ast_labels) ast[label] = ssckg::to_string(type);
  Json risk_types = Json::array();
  for (auto t : risk::PropagationConfig::default_relation_types()) risk_types.push_back(ssckg::to_string(t));
  const graphormer::ModelConfig m;
  return {
      {"seed", 0},
      {"workers", 1},
      {"lattice", nullptr},
      {"annotator", {{"type", "rules"}, {"path", nullptr}, {"command", nullptr}}},
      {"embedding", {{"type", "hash"}, {"dimension", embedding::kDefaultDimension}, {"path", nullptr}}},
      {"cves", nullptr},
      {"ssckg",
       {{"granularity", "function"},
        {"semantic_clustering", true},
        {"dbscan", {{"eps", 0.3}, {"min_samples", 2}}},
        {"cve_match_threshold", rel.cve_match_threshold},
        {"weights", weights},
        {"ast_labels", ast},
        {"read_labels", label_list(rel.read_labels)},
        {"write_labels", label_list(rel.write_labels)},
        {"taint_sources", label_list(rel.taint_sources)},
        {"taint_sinks", label_list(rel.taint_sinks)}}},
      {"model",
       {{"layers", m.layers},
        {"heads", m.heads},
        {"hidden_dim", m.hidden_dim},
        {"max_dist", m.max_dist},
        {"ffn_multiplier", m.ffn_multiplier},
        {"edge_bias", "sum"},
        {"weights", nullptr}}},
      {"risk", {{"beta", 0.15}, {"tolerance", 1e-6}, {"max_iterations", 100}, {"relation_types", risk_types}}},
      {"fingerprint",
       {{"tau", 0.78}, {"repo", nullptr}, {"grid", {{"lo", 0.5}, {"hi", 0.95}, {"step", 0.01}}}, {"fpr_cap", 0.05}}},
      {"report", {{"risk_bands", {{"high", 0.7}, {"medium", 0.4}}}}},
  };
}

PipelineConfig config_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) raise(Errc::kConfig, "config must be a JSON object");
  const Json defaults = default_config_json();
  Json eff = defaults;
  eff.merge_patch(j);
  restore_nulls(eff, defaults);
  for (const char* section : {"annotator", "embedding", "ssckg", "model", "risk", "fingerprint", "report"}) {
    if (!eff[section].is_object()) raise(Errc::kConfig, std::string("config section '") + section + "' must be an object");
  }

  PipelineConfig c;
  c.echo = eff;
  c.seed = get<std::uint64_t>(eff, "seed");
  c.workers = std::max<std::size_t>(1, get<std::size_t>(eff, "workers"));
  c.lattice = resolve(eff["lattice"], base_dir);

  const auto& a = eff["annotator"];
  c.annotator.type = get<std::string>(a, "type");
  if (c.annotator.type != "rules" && c.annotator.type != "replay" && c.annotator.type != "cmd") {
    raise(Errc::kConfig, "annotator.type must be rules, replay or cmd");
  }
  c.annotator.path = resolve(a.value("path", Json()), base_dir);
  if (a.contains("command") && a["command"].is_string()) c.annotator.command = a["command"].get<std::string>();

  const auto& e = eff["embedding"];
  c.embedding.type = get<std::string>(e, "type");
  if (c.embedding.type != "hash" && c.embedding.type != "file") raise(Errc::kConfig, "embedding.type must be hash or file");
  c.embedding.dimension = get<std::size_t>(e, "dimension");
  c.embedding.path = resolve(e.value("path", Json()), base_dir);
  if (c.embedding.type == "file" && c.embedding.path.empty()) raise(Errc::kConfig, "embedding.path is required for file");

  c.cves = resolve(eff["cves"], base_dir);

  const auto& s = eff["ssckg"];
  const auto gran = get<std::string>(s, "granularity");
  if (gran == "function") {
    c.ssckg.granularity = ssckg::Granularity::kFunction;
  } else if (gran == "block") {
    c.ssckg.granularity = ssckg::Granularity::kBlock;
  } else {
    raise(Errc::kConfig, "ssckg.granularity must be function or block");
  }
  c.ssckg.semantic_clustering = get<bool>(s, "semantic_clustering");
  c.ssckg.eps = get<double>(s["dbscan"], "eps");
  c.ssckg.min_samples = get<std::size_t>(s["dbscan"], "min_samples");
  if (!(c.ssckg.eps >= 0.0 && c.ssckg.eps <= 2.0) || c.ssckg.min_samples == 0) {
    raise(Errc::kConfig, "ssckg.dbscan needs eps in [0, 2] and min_samples >= 1");
  }
  auto& rel = c.ssckg.relations;
  rel.cve_match_threshold = get<double>(s, "cve_match_threshold");
  for (const auto& [name, v] : s["weights"].items()) {
    if (!v.is_number()) raise(Errc::kConfig, "ssckg.weights." + name + " must be a number");
    rel.weights.set(ssckg::parse_relation_type(name), v.get<double>());
  }
  rel.ast_labels.clear();
  for (const auto& [label, v] : s["ast_labels"].items()) {
    if (v.is_null()) continue;
    rel.ast_labels[label] = ssckg::parse_relation_type(v.get<std::string>());
  }
  rel.read_labels = labels(s["read_labels"], "read_labels");
  rel.write_labels = labels(s["write_labels"], "write_labels");
  rel.taint_sources = labels(s["taint_sources"], "taint_sources");
  rel.taint_sinks = labels(s["taint_sinks"], "taint_sinks");

  const auto& m = eff["model"];
  Json mj = m;
  mj.erase("weights");
  c.model = graphormer::model_config_from_json(mj);
  c.model_weights = resolve(m.value("weights", Json()), base_dir);

  const auto& r = eff["risk"];
  c.risk.beta = get<double>(r, "beta");
  c.risk.tolerance = get<double>(r, "tolerance");
  c.risk.max_iterations = get<std::size_t>(r, "max_iterations");
  c.risk.relation_types.clear();
  for (const auto& t : r["relation_types"]) c.risk.relation_types.push_back(ssckg::parse_relation_type(t.get<std::string>()));
  c.risk.validate();

  const auto& f = eff["fingerprint"];
  c.tau = get<double>(f, "tau");
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) raise(Errc::kConfig, "fingerprint.tau must lie in [0, 1]");
  c.fingerprint_repo = resolve(f.value("repo", Json()), base_dir);
  c.grid = {get<double>(f["grid"], "lo"), get<double>(f["grid"], "hi"), get<double>(f["grid"], "step")};
  c.grid.points();
  c.fpr_cap = get<double>(f, "fpr_cap");

  const auto& b = eff["report"]["risk_bands"];
  c.bands = {get<double>(b, "high"), get<double>(b, "medium")};
  if (!(c.bands.medium <= c.bands.high)) raise(Errc::kConfig, "report.risk_bands.medium must not exceed high");
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  const auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  try {
    return config_from_json(io::read_json(path), base);
  } catch (const Error& e) {
    if (e.code() == Errc::kConfig || e.code() == Errc::kParse || e.code() == Errc::kIo) throw;
    raise(Errc::kConfig, path.string() + ": " + e.detail());
  }
}

PipelineConfig override_config(const PipelineConfig& cfg, const Json& patch, const fs::path& base_dir) {
  // Paths already resolved in cfg stay as they are; the echo keeps the text.
  Json merged = cfg.echo;
  merged.merge_patch(patch);
  PipelineConfig out = config_from_json(merged, base_dir);
  auto keep = [&](fs::path& dst, const fs::path& old, const char* section, const char* key) {
    const bool patched = patch.contains(section) && (key == nullptr || (patch[section].is_object() && patch[section].contains(key)));
    if (!patched) dst = old;
  };
  keep(out.lattice, cfg.lattice, "lattice", nullptr);
  keep(out.annotator.path, cfg.annotator.path, "annotator", "path");
  keep(out.embedding.path, cfg.embedding.path, "embedding", "path");
  keep(out.cves, cfg.cves, "cves", nullptr);
  keep(out.model_weights, cfg.model_weights, "model", "weights");
  keep(out.fingerprint_repo, cfg.fingerprint_repo, "fingerprint", "repo");
  return out;
}

Context::Context(PipelineConfig cfg)
    : cfg_(std::move(cfg)),
      lattice_(cfg_.lattice.empty() ? lattice::Lattice::default_lattice() : lattice::Lattice::load(cfg_.lattice)) {
  const auto& rel = cfg_.ssckg.relations;
  for (const auto* set : {&rel.read_labels, &rel.write_labels, &rel.taint_sources, &rel.taint_sinks}) {
    for (const auto& l : *set) lattice_.validate(l);
  }
  if (cfg_.embedding.type == "hash") {
    provider_ = embedding::hash_embedder(cfg_.embedding.dimension, cfg_.seed);
  } else {
    provider_ = embedding::file_provider(cfg_.embedding.path);
  }
  if (cfg_.annotator.type == "cmd" && !cfg_.annotator.command.empty()) {
    annotator_ = std::make_unique<lifting::CommandAnnotator>(lattice_, cfg_.annotator.command);
  } else if (cfg_.annotator.type == "rules" && !cfg_.annotator.path.empty()) {
    annotator_ = lifting::rule_annotator(lattice_, cfg_.annotator.path);
  } else if (cfg_.annotator.type == "replay" && !cfg_.annotator.path.empty()) {
    annotator_ = lifting::replay_annotator(lattice_, cfg_.annotator.path);
  }
  if (!cfg_.cves.empty()) cves_ = load_cves(cfg_.cves);
}

const lifting::Annotator& Context::annotator() const {
  if (!annotator_) {
    raise(Errc::kConfig, cfg_.annotator.type == "cmd" ? "annotator.command is not set" : "annotator.path is not set");
  }
  return *annotator_;
}

std::vector<ssckg::CveRecord> Context::load_cves(const fs::path& path) const {
  return ssckg::load_cves(path, *provider_);
}

graphormer::ModelConfig Context::model_config() const {
  auto m = cfg_.model;
  m.input_dim = provider_->dimension();
  m.seed = cfg_.seed;
  return m;
}

graphormer::ModelParams Context::model_params() const {
  const auto m = model_config();
  if (cfg_.model_weights.empty()) return graphormer::init_params(m);
  return graphormer::load_params(cfg_.model_weights, &m);
}

void ingest(const fs::path& cpg_in, const fs::path& out) { cpg::save_cpg(cpg::load_cpg(cpg_in), out); }

lifting::VerifiedCorpus lift(const Context& ctx, const fs::path& cpg, const fs::path& out) {
  const auto g = cpg::load_cpg(cpg);
  auto corpus = lifting::build_corpus(g, ctx.annotator(), ctx.config().workers);
  lifting::save_corpus(corpus, out);
  return corpus;
}

ssckg::SsckgGraph build_ssckg(const Context& ctx, const fs::path& cpg, const fs::path& corpus, const fs::path& out) {
  const auto g = cpg::load_cpg(cpg);
  const auto c = lifting::load_corpus(ctx.lattice(), corpus);
  auto kg = ssckg::build_ssckg(g, c, ctx.provider(), ctx.cves(), ctx.config().ssckg, ctx.lattice());
  ssckg::save_ssckg(kg, out);
  return kg;
}

Json embed_texts(const Context& ctx, std::span<const std::string> texts) {
  Json out = Json::object();
  for (const auto& t : texts) {
    const auto v = ctx.provider().embed(t);
    out[t] = std::vector<double>(v.values().begin(), v.values().end());
  }
  return out;
}

void forward(const Context& ctx, const fs::path& kg_path, const fs::path& out) {
  const auto kg = ssckg::load_ssckg(kg_path, ctx.lattice());
  const auto params = ctx.model_params();
  graphormer::EmbeddingSet s;
  s.binary_id = kg.source_binary;
  s.embeddings = graphormer::forward(kg, params);
  for (const auto& e : kg.entities) s.names.push_back(e.name);
  graphormer::save_embeddings(s, out);
}

void save_initial_weights(const Context& ctx, const fs::path& out) {
  graphormer::save_params(graphormer::init_params(ctx.model_config()), out);
}

risk::RiskVector score(const Context& ctx, const fs::path& kg_path, const fs::path& out, const fs::path& cves) {
  const auto kg = ssckg::load_ssckg(kg_path, ctx.lattice());
  const auto corpus = cves.empty() ? ctx.cves() : ctx.load_cves(cves);
  const auto inherent = risk::inherent_risks(kg, corpus);
  auto r = risk::propagate(kg, inherent, ctx.config().risk);
  io::write_text_atomic(out, io::dump(risk::to_json(r, kg, ctx.config().risk.beta)));
  return r;
}

void fingerprint_extract(const fs::path& embeddings, std::span<const ssckg::EntityId> entities,
                         const std::string& name, const std::string& provenance, const fs::path& out) {
  const auto s = graphormer::load_embeddings(embeddings);
  fingerprint::save_fingerprint(fingerprint::extract(s, entities, name, provenance), out);
}

std::size_t match(const fs::path& embeddings, const fs::path& repo, double tau, const fs::path& out) {
  const auto target = fingerprint::target_from(graphormer::load_embeddings(embeddings));
  std::vector<fingerprint::Fingerprint> fps;
  if (!repo.empty()) fps = fingerprint::load_repository(repo);
  const auto results = fingerprint::match_and_alert(target, fps, tau);
  Json matches = Json::array();
  Json alerts = Json::array();
  for (const auto& m : results) {
    matches.push_back(fingerprint::to_json(m));
    if (m.alert) alerts.push_back({{"fingerprint", m.fingerprint}, {"similarity", m.similarity}});
  }
  const std::size_t count = alerts.size();
  io::write_text_atomic(out, io::dump({{"tau", tau}, {"matches", std::move(matches)}, {"alerts", std::move(alerts)}}));
  return count;
}

fingerprint::ThresholdReport threshold(const fs::path& scores, const fingerprint::Grid& grid, double fpr_cap,
                                       const fs::path& out) {
  const auto s = fingerprint::load_scores(scores);
  auto r = fingerprint::select_threshold(s, grid, fpr_cap);
  Json j = fingerprint::to_json(r);
  j["roc_auc"] = fingerprint::roc_auc(s);
  io::write_text_atomic(out, io::dump(j));
  return r;
}

Json report(const Context& ctx, const ReportInputs& in, const fs::path& out) {
  const auto g = cpg::load_cpg(in.cpg);
  const auto kg = ssckg::load_ssckg(in.kg, ctx.lattice());
  const auto risk = io::read_json(in.risk);
  Json stats = ssckg::to_json(ssckg::construction_stats(g, kg));
  if (!in.corpus.empty()) {
    const auto c = lifting::load_corpus(ctx.lattice(), in.corpus);
    stats["lifting"] = {{"accepted", c.accepted.size()},
                        {"rejected", c.rejected_count},
                        {"failed", c.failed.size()},
                        {"total", c.total},
                        {"rejection_rate", c.rejection_rate()}};
  }
  Json matches = Json::array();
  Json alerts = Json::array();
  if (!in.alerts.empty()) {
    const auto a = io::read_json(in.alerts);
    matches = a.value("matches", Json::array());
    alerts = a.value("alerts", Json::array());
  }
  Json j = {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
            {"binary_id", g.binary_id()},
            {"config", ctx.config().echo},
            {"stats", std::move(stats)},
            {"risk", {{"beta", risk.value("beta", 0.0)}, {"iterations", risk.value("iterations", 0)},
                      {"residual", risk.value("residual", 0.0)}}},
            {"ranking", risk.value("ranking", Json::array())},
            {"matches", std::move(matches)},
            {"alerts", std::move(alerts)}};
  io::write_text_atomic(out, io::dump(j));
  return j;
}

void export_dot(const fs::path& kg_path, const fs::path& risk_path, const ssckg::RiskBands& bands, const fs::path& out) {
  const auto kg = ssckg::load_ssckg(kg_path);
  if (risk_path.empty()) {
    io::write_text_atomic(out, ssckg::to_dot(kg, nullptr, bands));
    return;
  }
  const auto rho = risk::rho_from_json(io::read_json(risk_path), kg.entities.size());
  io::write_text_atomic(out, ssckg::to_dot(kg, &rho, bands));
}

PipelineResult run_pipeline(const Context& ctx, const fs::path& cpg_path, const fs::path& out_dir) {
  const auto& cfg = ctx.config();
  PipelineResult res;
  res.out_dir = out_dir;
  const auto cpg = out_dir / "cpg.json";
  const auto corpus = out_dir / "corpus.jsonl";
  const auto kg = out_dir / "kg.json";
  const auto emb = out_dir / "node_embeddings.json";
  const auto risk_out = out_dir / "risk.json";
  const auto alerts = out_dir / "alerts.json";

  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      raise(e.code(), std::string(name) + ": " + e.detail());
    }
  };
  stage("ingest", [&] { ingest(cpg_path, cpg); });
  stage("lift", [&] { lift(ctx, cpg, corpus); });
  res.binary_id = stage("build-ssckg", [&] { return build_ssckg(ctx, cpg, corpus, kg).source_binary; });
  stage("forward", [&] { forward(ctx, kg, emb); });
  stage("score", [&] { score(ctx, kg, risk_out); });
  res.alerts = stage("match", [&] { return match(emb, cfg.fingerprint_repo, cfg.tau, alerts); });
  stage("report", [&] { report(ctx, {cpg, corpus, kg, risk_out, alerts}, out_dir / "report.json"); });
  stage("export-dot", [&] { export_dot(kg, risk_out, cfg.bands, out_dir / "kg.dot"); });
  return res;
}

std::vector<PipelineResult> run_pipelines(const Context& ctx, std::span<const fs::path> cpgs, const fs::path& out_root,
                                          std::size_t jobs) {
  std::vector<PipelineResult> results(cpgs.size());
  std::vector<std::exception_ptr> errors(cpgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cpgs.size(); i = next++) {
      try {
        auto stem = cpgs[i].filename().string();
        if (auto dot = stem.find(".json"); dot != std::string::npos) stem.erase(dot);
        results[i] = run_pipeline(ctx, cpgs[i], out_root / stem);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, cpgs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace scaa::pipeline
