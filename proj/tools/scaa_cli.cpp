// Command-line front end over the scaa C API.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scaa/scaa.h"

namespace {

using Json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAlerts = 2;

struct Failure {
  std::string stage;
  scaa_status status;
};

void check(scaa_status s, const std::string& stage) {
  if (s != SCAA_OK) throw Failure{stage, s};
}

struct Owned {
  char* p = nullptr;
  ~Owned() { scaa_string_free(p); }
};

struct Global {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::vector<std::string> overrides;
};

class Session {
 public:
  Session(const Global& g, const Json& extra) {
    if (g.config.empty()) {
      check(scaa_config_default(&cfg_), "config");
    } else {
      check(scaa_config_load(g.config.c_str(), &cfg_), "config");
    }
    for (const auto& o : g.overrides) check(scaa_config_override(cfg_, o.c_str()), "config");
    if (g.seed) check(scaa_config_set_seed(cfg_, *g.seed), "config");
    if (g.workers) check(scaa_config_override(cfg_, Json{{"workers", *g.workers}}.dump().c_str()), "config");
    if (!extra.empty()) check(scaa_config_override(cfg_, extra.dump().c_str()), "config");
    check(scaa_context_create(cfg_, &ctx_), "config");
  }
  ~Session() {
    scaa_context_free(ctx_);
    scaa_config_free(cfg_);
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const scaa_context* ctx() const { return ctx_; }

 private:
  scaa_config* cfg_ = nullptr;
  scaa_context* ctx_ = nullptr;
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::vector<std::int64_t> parse_ids(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      throw CLI::ValidationError("--entities", "expected comma-separated entity ids, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> parse_confusion(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const auto part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) break;
    out.push_back(v);
    if (comma == std::string::npos) {
      if (out.size() == 4) return out;
      break;
    }
    pos = comma + 1;
  }
  throw CLI::ValidationError("--confusion", "expected tp,fp,tn,fn as non-negative integers");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_stdout_or_file(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) throw CLI::ValidationError(out, "cannot write file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary supply-chain behavior analysis: lifting, knowledge graph, risk and fingerprint matching."};
  app.set_version_flag("--version", std::string(scaa_version()));
  app.require_subcommand(1);

  Global g;
  app.add_option("-c,--config", g.config, "Pipeline config (JSON)");
  app.add_option("--seed", g.seed, "Seed for the hash embedder and model init");
  app.add_option("--workers", g.workers, "Annotator worker threads");
  app.add_option("--set", g.overrides, "JSON merge patch applied to the config (repeatable)");

  int exit_code = kExitOk;
  std::function<void()> action;

  std::string cpg, out, corpus, kg, risk, alerts, cves, embeddings, repo, scores, name, provenance, entities;
  std::string rules, replay, command, weights, init_weights, confusion, raters, input;
  std::vector<std::string> texts, cpgs;
  std::optional<double> beta, tau, fpr_cap, lo, hi, step;
  std::size_t jobs = 1;

  auto* ingest = app.add_subcommand("ingest", "Validate a CPG and write it in canonical form");
  ingest->add_option("--cpg", cpg, "Input CPG")->required();
  ingest->add_option("-o,--out", out, "Output CPG")->required();
  ingest->callback([&] { action = [&] { check(scaa_ingest(cpg.c_str(), out.c_str()), "ingest"); }; });

  auto* lift = app.add_subcommand("lift", "Annotate functions and keep verified annotations");
  lift->add_option("--cpg", cpg, "CPG")->required();
  lift->add_option("-o,--out", out, "Corpus (JSON lines)")->required();
  auto* r_opt = lift->add_option("--rules", rules, "Rule annotator file");
  auto* p_opt = lift->add_option("--replay", replay, "Stored annotations to replay");
  auto* c_opt = lift->add_option("--annotator-cmd", command, "External annotator command");
  r_opt->excludes(p_opt)->excludes(c_opt);
  p_opt->excludes(c_opt);
  lift->callback([&] {
    action = [&] {
      Json extra = Json::object();
      if (!rules.empty()) extra["annotator"] = {{"type", "rules"}, {"path", rules}};
      if (!replay.empty()) extra["annotator"] = {{"type", "replay"}, {"path", replay}};
      if (!command.empty()) extra["annotator"] = {{"type", "cmd"}, {"command", command}};
      Session s(g, extra);
      std::size_t accepted = 0, rejected = 0;
      check(scaa_lift(s.ctx(), cpg.c_str(), out.c_str(), &accepted, &rejected), "lift");
      std::cerr << "accepted " << accepted << ", rejected " << rejected << "\n";
    };
  });

  auto* build = app.add_subcommand("build-ssckg", "Build the knowledge graph from a CPG and its corpus");
  build->add_option("--cpg", cpg, "CPG")->required();
  build->add_option("--corpus", corpus, "Verified corpus")->required();
  build->add_option("--cves", cves, "CVE corpus (overrides config)");
  build->add_option("-o,--out", out, "Knowledge graph")->required();
  build->callback([&] {
    action = [&] {
      Json extra = Json::object();
      if (!cves.empty()) extra["cves"] = cves;
      Session s(g, extra);
      check(scaa_build_ssckg(s.ctx(), cpg.c_str(), corpus.c_str(), out.c_str()), "build-ssckg");
    };
  });

  auto* embed = app.add_subcommand("embed", "Embed texts with the configured provider");
  embed->add_option("--text", texts, "Text to embed (repeatable)");
  embed->add_option("--input", input, "File with one text per line");
  embed->add_option("-o,--out", out, "Output table (default stdout)");
  embed->callback([&] {
    action = [&] {
      if (!input.empty()) {
        std::stringstream ss(read_file(input));
        for (std::string line; std::getline(ss, line);) texts.push_back(line);
      }
      Session s(g, Json::object());
      std::vector<const char*> ptrs;
      for (const auto& t : texts) ptrs.push_back(t.c_str());
      Owned json;
      check(scaa_embed_texts(s.ctx(), ptrs.data(), ptrs.size(), &json.p), "embed");
      write_stdout_or_file(json.p, out);
    };
  });

  auto* fwd = app.add_subcommand("forward", "Run the graph transformer over a knowledge graph");
  fwd->add_option("--kg", kg, "Knowledge graph");
  fwd->add_option("--weights", weights, "Weight file (default: seeded init)");
  fwd->add_option("--save-init", init_weights, "Write the seeded initial weights to this file");
  fwd->add_option("-o,--out", out, "Node embeddings");
  fwd->callback([&] {
    action = [&] {
      Json extra = Json::object();
      if (!weights.empty()) extra["model"] = {{"weights", weights}};
      Session s(g, extra);
      if (!init_weights.empty()) check(scaa_save_initial_weights(s.ctx(), init_weights.c_str()), "forward");
      if (kg.empty() != out.empty()) throw CLI::ValidationError("forward", "--kg and --out go together");
      if (!kg.empty()) check(scaa_forward(s.ctx(), kg.c_str(), out.c_str()), "forward");
    };
  });

  auto* score = app.add_subcommand("score", "Inherent and propagated risk per entity");
  score->add_option("--kg", kg, "Knowledge graph")->required();
  score->add_option("--cves", cves, "CVE corpus (overrides config)");
  score->add_option("--beta", beta, "Damping factor");
  score->add_option("-o,--out", out, "Risk ranking")->required();
  score->callback([&] {
    action = [&] {
      Json extra = Json::object();
      if (beta) extra["risk"] = {{"beta", *beta}};
      Session s(g, extra);
      check(scaa_score(s.ctx(), kg.c_str(), opt(cves), out.c_str()), "score");
    };
  });

  auto* fp = app.add_subcommand("fingerprint", "Fingerprint tools");
  fp->require_subcommand(1);
  auto* extract = fp->add_subcommand("extract", "Fingerprint from selected entity embeddings");
  extract->add_option("--embeddings", embeddings, "Node embeddings")->required();
  extract->add_option("--entities", entities, "Comma-separated entity ids")->required();
  extract->add_option("--name", name, "Fingerprint name")->required();
  extract->add_option("--provenance", provenance, "Free-text provenance");
  extract->add_option("-o,--out", out, "Fingerprint file")->required();
  extract->callback([&] {
    action = [&] {
      const auto ids = parse_ids(entities);
      check(scaa_fingerprint_extract(embeddings.c_str(), ids.data(), ids.size(), name.c_str(), provenance.c_str(),
                                     out.c_str()),
            "fingerprint extract");
    };
  });

  auto* match = app.add_subcommand("match", "Match node embeddings against a fingerprint repository");
  match->add_option("--kg-embeddings,--embeddings", embeddings, "Node embeddings")->required();
  match->add_option("--repo", repo, "Fingerprint directory (overrides config)");
  match->add_option("--tau", tau, "Alert threshold (overrides config)");
  match->add_option("-o,--out", out, "Match results")->required();
  match->callback([&] {
    action = [&] {
      Session s(g, Json::object());
      std::size_t n = 0;
      check(scaa_match(s.ctx(), embeddings.c_str(), opt(repo), tau.value_or(-1.0), out.c_str(), &n), "match");
      if (n > 0) {
        std::cerr << n << " alert(s)\n";
        exit_code = kExitAlerts;
      }
    };
  });

  auto* thr = app.add_subcommand("threshold", "Select the alert threshold from labelled scores");
  thr->add_option("--scores", scores, "Scores [{score, label}]")->required();
  thr->add_option("--fpr-cap", fpr_cap, "Maximum false positive rate");
  thr->add_option("--lo", lo, "Grid start");
  thr->add_option("--hi", hi, "Grid end");
  thr->add_option("--step", step, "Grid step");
  thr->add_option("-o,--out", out, "Threshold report")->required();
  thr->callback([&] {
    action = [&] {
      Json f = Json::object();
      if (fpr_cap) f["fpr_cap"] = *fpr_cap;
      if (lo) f["grid"]["lo"] = *lo;
      if (hi) f["grid"]["hi"] = *hi;
      if (step) f["grid"]["step"] = *step;
      Session s(g, f.empty() ? Json::object() : Json{{"fingerprint", f}});
      double t = 0.0;
      check(scaa_threshold(s.ctx(), scores.c_str(), out.c_str(), &t), "threshold");
      std::cerr << "tau " << t << "\n";
    };
  });

  auto* rep = app.add_subcommand("report", "Assemble the risk report");
  rep->add_option("--cpg", cpg, "CPG")->required();
  rep->add_option("--corpus", corpus, "Verified corpus");
  rep->add_option("--kg", kg, "Knowledge graph")->required();
  rep->add_option("--risk", risk, "Risk ranking")->required();
  rep->add_option("--alerts", alerts, "Match results");
  rep->add_option("-o,--out", out, "Report")->required();
  rep->callback([&] {
    action = [&] {
      Session s(g, Json::object());
      check(scaa_report(s.ctx(), cpg.c_str(), opt(corpus), kg.c_str(), risk.c_str(), opt(alerts), out.c_str()),
            "report");
    };
  });

  auto* dot = app.add_subcommand("export-dot", "Write the knowledge graph as Graphviz DOT");
  dot->add_option("--kg", kg, "Knowledge graph")->required();
  dot->add_option("--risk", risk, "Risk ranking for node colors");
  dot->add_option("-o,--out", out, "DOT file")->required();
  dot->callback([&] {
    action = [&] {
      Session s(g, Json::object());
      check(scaa_export_dot(s.ctx(), kg.c_str(), opt(risk), out.c_str()), "export-dot");
    };
  });

  auto* met = app.add_subcommand("metrics", "Classification metrics or rater agreement");
  auto* conf_opt = met->add_option("--confusion", confusion, "tp,fp,tn,fn");
  auto* rat_opt = met->add_option("--raters", raters, "JSON {\"a\": [...], \"b\": [...]} for Cohen's kappa");
  conf_opt->excludes(rat_opt);
  met->callback([&] {
    action = [&] {
      if (!confusion.empty()) {
        const auto c = parse_confusion(confusion);
        Owned json;
        check(scaa_metrics(c[0], c[1], c[2], c[3], &json.p), "metrics");
        std::cout << json.p;
      } else if (!raters.empty()) {
        const auto j = Json::parse(read_file(raters));
        const auto a = j.at("a").get<std::vector<std::string>>();
        const auto b = j.at("b").get<std::vector<std::string>>();
        std::vector<const char*> pa, pb;
        for (const auto& x : a) pa.push_back(x.c_str());
        for (const auto& x : b) pb.push_back(x.c_str());
        double kappa = 0.0;
        if (a.size() != b.size()) {
          throw CLI::ValidationError("--raters", "a and b must have the same length");
        }
        check(scaa_cohen_kappa(pa.data(), pb.data(), a.size(), &kappa), "metrics");
        std::cout << Json{{"cohen_kappa", kappa}}.dump(2) << "\n";
      } else {
        throw CLI::ValidationError("metrics", "one of --confusion or --raters is required");
      }
    };
  });

  auto* pipe = app.add_subcommand("pipeline", "Run every stage for one or more CPGs");
  pipe->add_option("--cpg", cpgs, "CPG (repeatable)")->required();
  pipe->add_option("-o,--out", out, "Output directory")->required();
  pipe->add_option("-j,--jobs", jobs, "Binaries processed in parallel")->check(CLI::PositiveNumber);
  pipe->callback([&] {
    action = [&] {
      Session s(g, Json::object());
      std::size_t n = 0;
      if (cpgs.size() == 1) {
        check(scaa_run_pipeline(s.ctx(), cpgs[0].c_str(), out.c_str(), &n), "pipeline");
      } else {
        std::vector<const char*> ptrs;
        for (const auto& c : cpgs) ptrs.push_back(c.c_str());
        check(scaa_run_pipelines(s.ctx(), ptrs.data(), ptrs.size(), out.c_str(), jobs, &n), "pipeline");
      }
      if (n > 0) {
        std::cerr << n << " alert(s)\n";
        exit_code = kExitAlerts;
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (action) action();
  } catch (const Failure& f) {
    std::cerr << "scaa " << f.stage << ": " << scaa_last_error() << "\n";
    return kExitError;
  } catch (const CLI::Error& e) {
    std::cerr << "scaa: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "scaa: " << e.what() << "\n";
    return kExitError;
  }
  return exit_code;
}
