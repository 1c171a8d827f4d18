#include "scaa/scaa.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/cpg.hpp"
#include "core/errors.hpp"
#include "core/lattice.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/ssckg.hpp"

struct scaa_config {
  scaa::pipeline::PipelineConfig cfg;
};

struct scaa_context {
  explicit scaa_context(scaa::pipeline::PipelineConfig c) : ctx(std::move(c)) {}
  scaa::pipeline::Context ctx;
};

struct scaa_cpg {
  scaa::cpg::CpgGraph g;
};

struct scaa_lattice {
  scaa::lattice::Lattice lat;
};

struct scaa_kg {
  scaa::ssckg::SsckgGraph kg;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string last_error;

scaa_status fail(scaa_status s, std::string message) {
  last_error = std::move(message);
  return s;
}

template <class F>
scaa_status guard(F&& fn) {
  last_error.clear();
  try {
    fn();
    return SCAA_OK;
  } catch (const scaa::Error& e) {
    return fail(static_cast<scaa_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SCAA_ERR_INTERNAL, "InternalError: out of memory");
  } catch (const std::exception& e) {
    return fail(SCAA_ERR_INTERNAL, std::string("InternalError: ") + e.what());
  } catch (...) {
    return fail(SCAA_ERR_INTERNAL, "InternalError: unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) scaa::raise(scaa::Errc::kInvalidArgument, std::string(what) + " must not be NULL");
}

fs::path opt_path(const char* p) { return p == nullptr ? fs::path() : fs::path(p); }

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

const scaa::pipeline::Context& context(const scaa_context* ctx) {
  require(ctx, "context");
  return ctx->ctx;
}

}  // namespace

extern "C" {

const char* scaa_version(void) { return scaa::pipeline::kToolVersion; }

const char* scaa_status_name(scaa_status status) {
  if (status == SCAA_OK) return "Ok";
  if (status < SCAA_ERR_PARSE || status > SCAA_ERR_INTERNAL) return "UnknownError";
  static thread_local std::string name;
  name = scaa::errc_name(static_cast<scaa::Errc>(status));
  return name.c_str();
}

const char* scaa_last_error(void) { return last_error.c_str(); }

void scaa_string_free(char* s) { std::free(s); }

scaa_status scaa_config_default(scaa_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new scaa_config{scaa::pipeline::config_from_json(scaa::io::Json::object(), fs::current_path())};
  });
}

scaa_status scaa_config_load(const char* path, scaa_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new scaa_config{scaa::pipeline::load_config(path)};
  });
}

scaa_status scaa_config_override(scaa_config* cfg, const char* json_patch) {
  return guard([&] {
    require(cfg, "config");
    require(json_patch, "patch");
    const auto patch = scaa::io::parse_json(json_patch, "config override");
    cfg->cfg = scaa::pipeline::override_config(cfg->cfg, patch, fs::current_path());
  });
}

scaa_status scaa_config_set_seed(scaa_config* cfg, uint64_t seed) {
  return guard([&] {
    require(cfg, "config");
    cfg->cfg = scaa::pipeline::override_config(cfg->cfg, {{"seed", seed}}, fs::current_path());
  });
}

scaa_status scaa_config_to_json(const scaa_config* cfg, char** out) {
  return guard([&] {
    require(cfg, "config");
    require(out, "out");
    *out = dup(scaa::io::dump(cfg->cfg.echo));
  });
}

void scaa_config_free(scaa_config* cfg) { delete cfg; }

scaa_status scaa_context_create(const scaa_config* cfg, scaa_context** out) {
  return guard([&] {
    require(cfg, "config");
    require(out, "out");
    *out = new scaa_context(cfg->cfg);
  });
}

void scaa_context_free(scaa_context* ctx) { delete ctx; }

scaa_status scaa_cpg_load(const char* path, scaa_cpg** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new scaa_cpg{scaa::cpg::load_cpg(path)};
  });
}

scaa_status scaa_cpg_save(const scaa_cpg* g, const char* path) {
  return guard([&] {
    require(g, "cpg");
    require(path, "path");
    scaa::cpg::save_cpg(g->g, path);
  });
}

size_t scaa_cpg_node_count(const scaa_cpg* g) { return g == nullptr ? 0 : g->g.node_count(); }
size_t scaa_cpg_edge_count(const scaa_cpg* g) { return g == nullptr ? 0 : g->g.edge_count(); }
size_t scaa_cpg_function_count(const scaa_cpg* g) { return g == nullptr ? 0 : g->g.functions().size(); }
const char* scaa_cpg_binary_id(const scaa_cpg* g) { return g == nullptr ? "" : g->g.binary_id().c_str(); }

scaa_status scaa_cpg_verify_claims(const scaa_cpg* g, const int64_t* sources, const int64_t* sinks, size_t count,
                                   int* satisfied, size_t* failing_index) {
  return guard([&] {
    require(g, "cpg");
    require(satisfied, "satisfied");
    if (count > 0) {
      require(sources, "sources");
      require(sinks, "sinks");
    }
    std::vector<scaa::cpg::DataFlowClaim> claims(count);
    for (size_t i = 0; i < count; ++i) claims[i] = {sources[i], sinks[i]};
    const auto r = scaa::cpg::verify_claims(g->g, claims);
    *satisfied = r.satisfied ? 1 : 0;
    if (failing_index != nullptr && r.failing_index) *failing_index = *r.failing_index;
  });
}

void scaa_cpg_free(scaa_cpg* g) { delete g; }

scaa_status scaa_lattice_default(scaa_lattice** out) {
  return guard([&] {
    require(out, "out");
    *out = new scaa_lattice{scaa::lattice::Lattice::default_lattice()};
  });
}

scaa_status scaa_lattice_load(const char* path, scaa_lattice** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new scaa_lattice{scaa::lattice::Lattice::load(path)};
  });
}

scaa_status scaa_lattice_counts(const scaa_lattice* lat, size_t* categories, size_t* actions, size_t* risk_labels) {
  return guard([&] {
    require(lat, "lattice");
    const auto c = lat->lat.counts();
    if (categories != nullptr) *categories = c.categories;
    if (actions != nullptr) *actions = c.actions;
    if (risk_labels != nullptr) *risk_labels = c.risk_labels;
  });
}

scaa_status scaa_lattice_leq(const scaa_lattice* lat, const char* a, const char* b, int* out) {
  return guard([&] {
    require(lat, "lattice");
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = lat->lat.leq(lat->lat.label(a), lat->lat.label(b)) ? 1 : 0;
  });
}

scaa_status scaa_lattice_join(const scaa_lattice* lat, const char* a, const char* b, char** out) {
  return guard([&] {
    require(lat, "lattice");
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = dup(lat->lat.join(lat->lat.label(a), lat->lat.label(b)).str());
  });
}

scaa_status scaa_lattice_covers(const scaa_lattice* lat, const char* predicted, const char* truth, int* out) {
  return guard([&] {
    require(lat, "lattice");
    require(predicted, "predicted");
    require(truth, "truth");
    require(out, "out");
    *out = lat->lat.covers(lat->lat.label(predicted), lat->lat.label(truth)) ? 1 : 0;
  });
}

scaa_status scaa_lattice_evr(const scaa_lattice* lat, const char* golden_path, scaa_evr_mode mode, double* out) {
  return guard([&] {
    require(lat, "lattice");
    require(golden_path, "golden_path");
    require(out, "out");
    const auto records = scaa::lattice::load_golden_set(lat->lat, golden_path);
    *out = lat->lat.evr(records, mode == SCAA_EVR_EXACT_TIER ? scaa::lattice::EvrMode::kExactTierMatch
                                                              : scaa::lattice::EvrMode::kLatticeCover);
  });
}

void scaa_lattice_free(scaa_lattice* lat) { delete lat; }

scaa_status scaa_kg_load(const char* path, scaa_kg** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new scaa_kg{scaa::ssckg::load_ssckg(path)};
  });
}

size_t scaa_kg_entity_count(const scaa_kg* kg) { return kg == nullptr ? 0 : kg->kg.entities.size(); }
size_t scaa_kg_relation_count(const scaa_kg* kg) { return kg == nullptr ? 0 : kg->kg.relations.size(); }

scaa_status scaa_kg_stats_json(const scaa_kg* kg, size_t cpg_nodes, char** out) {
  return guard([&] {
    require(kg, "kg");
    require(out, "out");
    *out = dup(scaa::io::dump(scaa::ssckg::to_json(scaa::ssckg::construction_stats(cpg_nodes, kg->kg))));
  });
}

void scaa_kg_free(scaa_kg* kg) { delete kg; }

scaa_status scaa_ingest(const char* cpg_in, const char* out) {
  return guard([&] {
    require(cpg_in, "cpg_in");
    require(out, "out");
    scaa::pipeline::ingest(cpg_in, out);
  });
}

scaa_status scaa_lift(const scaa_context* ctx, const char* cpg, const char* out, size_t* accepted, size_t* rejected) {
  return guard([&] {
    require(cpg, "cpg");
    require(out, "out");
    const auto c = scaa::pipeline::lift(context(ctx), cpg, out);
    if (accepted != nullptr) *accepted = c.accepted.size();
    if (rejected != nullptr) *rejected = c.rejected_count;
  });
}

scaa_status scaa_build_ssckg(const scaa_context* ctx, const char* cpg, const char* corpus, const char* out) {
  return guard([&] {
    require(cpg, "cpg");
    require(corpus, "corpus");
    require(out, "out");
    scaa::pipeline::build_ssckg(context(ctx), cpg, corpus, out);
  });
}

scaa_status scaa_embed_texts(const scaa_context* ctx, const char* const* texts, size_t count, char** out) {
  return guard([&] {
    require(out, "out");
    if (count > 0) require(texts, "texts");
    std::vector<std::string> t;
    for (size_t i = 0; i < count; ++i) {
      require(texts[i], "text");
      t.emplace_back(texts[i]);
    }
    *out = dup(scaa::io::dump(scaa::pipeline::embed_texts(context(ctx), t)));
  });
}

scaa_status scaa_forward(const scaa_context* ctx, const char* kg, const char* out) {
  return guard([&] {
    require(kg, "kg");
    require(out, "out");
    scaa::pipeline::forward(context(ctx), kg, out);
  });
}

scaa_status scaa_save_initial_weights(const scaa_context* ctx, const char* out) {
  return guard([&] {
    require(out, "out");
    scaa::pipeline::save_initial_weights(context(ctx), out);
  });
}

scaa_status scaa_score(const scaa_context* ctx, const char* kg, const char* cves, const char* out) {
  return guard([&] {
    require(kg, "kg");
    require(out, "out");
    scaa::pipeline::score(context(ctx), kg, out, opt_path(cves));
  });
}

scaa_status scaa_fingerprint_extract(const char* embeddings, const int64_t* entity_ids, size_t count,
                                     const char* name, const char* provenance, const char* out) {
  return guard([&] {
    require(embeddings, "embeddings");
    require(name, "name");
    require(out, "out");
    if (count > 0) require(entity_ids, "entity_ids");
    std::vector<scaa::ssckg::EntityId> ids(entity_ids, entity_ids + count);
    scaa::pipeline::fingerprint_extract(embeddings, ids, name, provenance == nullptr ? "" : provenance, out);
  });
}

scaa_status scaa_match(const scaa_context* ctx, const char* embeddings, const char* repo, double tau, const char* out,
                       size_t* alerts) {
  return guard([&] {
    const auto& c = context(ctx);
    require(embeddings, "embeddings");
    require(out, "out");
    const auto n = scaa::pipeline::match(embeddings, repo == nullptr ? c.config().fingerprint_repo : fs::path(repo),
                                         tau < 0.0 ? c.config().tau : tau, out);
    if (alerts != nullptr) *alerts = n;
  });
}

scaa_status scaa_threshold(const scaa_context* ctx, const char* scores, const char* out, double* tau) {
  return guard([&] {
    const auto& c = context(ctx);
    require(scores, "scores");
    require(out, "out");
    const auto r = scaa::pipeline::threshold(scores, c.config().grid, c.config().fpr_cap, out);
    if (tau != nullptr) *tau = r.tau;
  });
}

scaa_status scaa_report(const scaa_context* ctx, const char* cpg, const char* corpus, const char* kg,
                        const char* risk, const char* alerts, const char* out) {
  return guard([&] {
    require(cpg, "cpg");
    require(kg, "kg");
    require(risk, "risk");
    require(out, "out");
    scaa::pipeline::report(context(ctx), {cpg, opt_path(corpus), kg, risk, opt_path(alerts)}, out);
  });
}

scaa_status scaa_export_dot(const scaa_context* ctx, const char* kg, const char* risk, const char* out) {
  return guard([&] {
    const auto& c = context(ctx);
    require(kg, "kg");
    require(out, "out");
    scaa::pipeline::export_dot(kg, opt_path(risk), c.config().bands, out);
  });
}

scaa_status scaa_metrics(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn, char** out) {
  return guard([&] {
    require(out, "out");
    const auto m = scaa::metrics::classification_metrics({tp, fp, tn, fn});
    *out = dup(scaa::io::dump(scaa::metrics::to_json(m)));
  });
}

scaa_status scaa_cohen_kappa(const char* const* rater_a, const char* const* rater_b, size_t count, double* out) {
  return guard([&] {
    require(out, "out");
    if (count > 0) {
      require(rater_a, "rater_a");
      require(rater_b, "rater_b");
    }
    std::vector<std::string> a, b;
    for (size_t i = 0; i < count; ++i) {
      require(rater_a[i], "rating");
      require(rater_b[i], "rating");
      a.emplace_back(rater_a[i]);
      b.emplace_back(rater_b[i]);
    }
    *out = scaa::metrics::cohen_kappa(a, b);
  });
}

scaa_status scaa_run_pipeline(const scaa_context* ctx, const char* cpg, const char* out_dir, size_t* alerts) {
  return guard([&] {
    require(cpg, "cpg");
    require(out_dir, "out_dir");
    const auto r = scaa::pipeline::run_pipeline(context(ctx), cpg, out_dir);
    if (alerts != nullptr) *alerts = r.alerts;
  });
}

scaa_status scaa_run_pipelines(const scaa_context* ctx, const char* const* cpgs, size_t count, const char* out_root,
                               size_t jobs, size_t* alerts) {
  return guard([&] {
    require(out_root, "out_root");
    if (count > 0) require(cpgs, "cpgs");
    std::vector<fs::path> paths;
    for (size_t i = 0; i < count; ++i) {
      require(cpgs[i], "cpg");
      paths.emplace_back(cpgs[i]);
    }
    const auto results = scaa::pipeline::run_pipelines(context(ctx), paths, out_root, jobs);
    size_t total = 0;
    for (const auto& r : results) total += r.alerts;
    if (alerts != nullptr) *alerts = total;
  });
}

}  // extern "C"
