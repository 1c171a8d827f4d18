#include "core/lifting.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include <fcntl.h>
#include <pthread.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "core/errors.hpp"

namespace scaa::lifting {

std::map<std::string, FunctionContext> function_contexts(const cpg::CpgGraph& g) {
  std::map<cpg::FunctionId, FunctionContext> by_id;
  for (const auto& f : g.functions()) {
    auto& ctx = by_id[f.id];
    ctx.binary_id = g.binary_id();
    ctx.function = f;
    std::set<std::string> seen;
    for (std::size_t idx : g.function_nodes(f.id)) {
      const auto& n = g.nodes()[idx];
      ctx.nodes.push_back(n);
      if (n.kind == cpg::NodeKind::kCall) {
        if (auto it = n.attrs.find("callee"); it != n.attrs.end() && seen.insert(it->second).second) {
          ctx.callees.push_back(it->second);
        }
      }
    }
  }
  std::map<cpg::FunctionId, std::set<std::string>> preds;
  for (const auto& e : g.edges()) {
    const auto& s = g.node(e.src);
    const auto& d = g.node(e.dst);
    if (e.kind == cpg::EdgeKind::kPdg) {
      if (s.function_id == d.function_id) by_id[s.function_id].pdg_edges.push_back(e);
    } else if (s.function_id != d.function_id) {
      preds[d.function_id].insert(g.find_function(s.function_id)->name);
    }
  }
  std::map<std::string, FunctionContext> out;
  for (auto& [fid, ctx] : by_id) {
    if (auto it = preds.find(fid); it != preds.end()) {
      ctx.predecessors.assign(it->second.begin(), it->second.end());
    }
    std::string name = ctx.function.name;
    out.emplace(std::move(name), std::move(ctx));
  }
  return out;
}

bool pattern_matches(std::string_view pattern, std::string_view token) {
  if (!pattern.empty() && pattern.back() == '*') {
    pattern.remove_suffix(1);
    return token.substr(0, pattern.size()) == pattern;
  }
  return token == pattern;
}

namespace {

std::string summary_for(const lattice::Label& label) {
  std::string out;
  for (const auto& seg : label.path()) {
    if (!out.empty()) out += ' ';
    for (char c : seg) out += c == '_' ? ' ' : c;
  }
  return out.empty() ? out : out + " behavior";
}

std::vector<cpg::DataFlowClaim> parse_claims(const io::Json& j, const std::string& where) {
  std::vector<cpg::DataFlowClaim> claims;
  if (j.is_null()) return claims;
  if (!j.is_array()) raise(Errc::kSchema, where + ": 'claims' must be a list");
  for (const auto& c : j) {
    if (c.is_array() && c.size() == 2 && c[0].is_number_integer() && c[1].is_number_integer()) {
      claims.push_back({c[0].get<cpg::NodeId>(), c[1].get<cpg::NodeId>()});
    } else if (c.is_object() && c.contains("source") && c.contains("sink") &&
               c["source"].is_number_integer() && c["sink"].is_number_integer()) {
      claims.push_back({c["source"].get<cpg::NodeId>(), c["sink"].get<cpg::NodeId>()});
    } else {
      raise(Errc::kSchema, where + ": claims must be [source, sink] pairs or {source, sink}");
    }
  }
  return claims;
}

}  // namespace

RuleAnnotator::RuleAnnotator(const lattice::Lattice& lat, std::vector<Rule> rules)
    : rules_(std::move(rules)) {
  for (auto& r : rules_) {
    if (r.pattern.empty() || r.pattern == "*") {
      raise(Errc::kInvalidRule, "rule pattern must be a non-empty literal or prefix");
    }
    if (!lat.contains(r.label)) {
      raise(Errc::kInvalidRule, "rule '" + r.pattern + "' names unknown label '" + r.label.str() + "'");
    }
    if (r.summary.empty()) r.summary = summary_for(r.label);
  }
}

Annotation RuleAnnotator::annotate(const FunctionContext& fn) const {
  Annotation a;
  a.function_id = fn.function.name;
  std::vector<std::string_view> tokens{fn.function.name};
  for (const auto& n : fn.nodes) {
    if (!n.opcode.empty()) tokens.push_back(n.opcode);
  }
  for (const auto& c : fn.callees) tokens.push_back(c);
  for (const auto& r : rules_) {
    const bool hit = std::any_of(tokens.begin(), tokens.end(),
                                 [&](std::string_view t) { return pattern_matches(r.pattern, t); });
    if (hit) {
      a.label = r.label;
      a.summary = r.summary;
      break;
    }
  }
  for (const auto& e : fn.pdg_edges) a.claims.push_back({e.src, e.dst});
  return a;
}

std::vector<Rule> parse_rules(const lattice::Lattice& lat, const io::Json& j) {
  if (!j.is_array()) raise(Errc::kInvalidRule, "rules file must be a JSON list");
  std::vector<Rule> rules;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    const std::string where = "rules[" + std::to_string(i) + "]";
    if (!o.is_object() || !o.contains("pattern") || !o.contains("label") || !o["pattern"].is_string() ||
        !o["label"].is_string()) {
      raise(Errc::kInvalidRule, where + ": expected {pattern, label, summary?}");
    }
    Rule r;
    r.pattern = o["pattern"].get<std::string>();
    if (r.pattern.empty()) raise(Errc::kInvalidRule, where + ": empty pattern");
    try {
      r.label = lattice::Label::parse(o["label"].get<std::string>());
    } catch (const Error& e) {
      raise(Errc::kInvalidRule, where + ": " + e.what());
    }
    if (!lat.contains(r.label)) raise(Errc::kInvalidRule, where + ": unknown label '" + r.label.str() + "'");
    if (auto s = o.find("summary"); s != o.end() && s->is_string()) r.summary = s->get<std::string>();
    rules.push_back(std::move(r));
  }
  return rules;
}

std::unique_ptr<Annotator> rule_annotator(const lattice::Lattice& lat, const std::filesystem::path& path) {
  return std::make_unique<RuleAnnotator>(lat, parse_rules(lat, io::read_json(path)));
}

ReplayAnnotator::ReplayAnnotator(std::map<std::string, Annotation> table) : table_(std::move(table)) {}

Annotation ReplayAnnotator::annotate(const FunctionContext& fn) const {
  auto it = table_.find(fn.function.name);
  if (it == table_.end()) raise(Errc::kMissingAnnotation, fn.function.name);
  return it->second;
}

std::unique_ptr<Annotator> replay_annotator(const lattice::Lattice& lat, const std::filesystem::path& path) {
  const auto j = io::read_json(path);
  if (!j.is_object()) raise(Errc::kSchema, path.string() + ": replay file must map function_id to annotation");
  std::map<std::string, Annotation> table;
  for (const auto& [fid, a] : j.items()) table.emplace(fid, annotation_from_json(lat, a, fid));
  return std::make_unique<ReplayAnnotator>(std::move(table));
}

io::Json to_json(const Annotation& a) {
  io::Json claims = io::Json::array();
  for (const auto& c : a.claims) claims.push_back({c.source, c.sink});
  return {{"function_id", a.function_id},
          {"label", a.label.str()},
          {"summary", a.summary},
          {"claims", std::move(claims)}};
}

Annotation annotation_from_json(const lattice::Lattice& lat, const io::Json& j,
                                std::string_view function_id_fallback) {
  const std::string where = "annotation " + std::string(function_id_fallback);
  if (!j.is_object()) raise(Errc::kSchema, where + ": must be an object");
  Annotation a;
  if (auto it = j.find("function_id"); it != j.end() && it->is_string()) {
    a.function_id = it->get<std::string>();
  } else {
    a.function_id = std::string(function_id_fallback);
  }
  auto label = j.find("label");
  if (label == j.end() || !label->is_string()) raise(Errc::kSchema, where + ": missing 'label'");
  a.label = lat.label(label->get<std::string>());
  if (auto it = j.find("summary"); it != j.end() && it->is_string()) a.summary = it->get<std::string>();
  if (auto it = j.find("claims"); it != j.end()) a.claims = parse_claims(*it, where);
  return a;
}

io::Json annotation_request(const FunctionContext& fn) {
  io::Json nodes = io::Json::array();
  for (const auto& n : fn.nodes) {
    io::Json attrs = io::Json::object();
    for (const auto& [k, v] : n.attrs) attrs[k] = v;
    nodes.push_back({{"id", n.id},
                     {"kind", cpg::to_string(n.kind)},
                     {"opcode", n.opcode},
                     {"block_id", n.block_id},
                     {"attrs", std::move(attrs)}});
  }
  io::Json edges = io::Json::array();
  for (const auto& e : fn.pdg_edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"label", e.label}});
  return {{"function_id", fn.function.name},
          {"nodes", std::move(nodes)},
          {"pdg_edges", std::move(edges)},
          {"context",
           {{"binary_id", fn.binary_id},
            {"external", fn.function.external},
            {"callees", fn.callees},
            {"predecessors", fn.predecessors}}}};
}

CommandAnnotator::CommandAnnotator(const lattice::Lattice& lat, std::string command)
    : lattice_(&lat), command_(std::move(command)) {
  if (command_.empty()) raise(Errc::kConfig, "annotator command is empty");
}

namespace {

struct ProcessResult {
  int status = 0;
  std::string out;
};

// A child that exits before reading its input must not take this process
// down with SIGPIPE; block it for this thread and drain any pending instance.
ssize_t write_no_sigpipe(int fd, const char* data, std::size_t size) {
  sigset_t pipe_set;
  sigset_t old_set;
  sigemptyset(&pipe_set);
  sigaddset(&pipe_set, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);
  const ssize_t n = ::write(fd, data, size);
  const int saved = errno;
  if (n < 0 && errno == EPIPE) {
    timespec zero{0, 0};
    while (sigtimedwait(&pipe_set, nullptr, &zero) > 0) {
    }
  }
  pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
  errno = saved;
  return n;
}

ProcessResult run_process(const std::string& command, const std::string& input) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) raise(Errc::kIo, "pipe: " + std::string(std::strerror(errno)));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    raise(Errc::kIo, "pipe: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) raise(Errc::kIo, "fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);

  ProcessResult result;
  std::size_t written = 0;
  int wfd = in_pipe[1];
  int rfd = out_pipe[0];
  ::fcntl(wfd, F_SETFL, O_NONBLOCK);
  if (input.empty()) {
    ::close(wfd);
    wfd = -1;
  }
  char buf[8192];
  while (rfd >= 0) {
    pollfd fds[2];
    nfds_t count = 0;
    fds[count++] = {rfd, POLLIN, 0};
    if (wfd >= 0) fds[count++] = {wfd, POLLOUT, 0};
    if (::poll(fds, count, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (wfd >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = write_no_sigpipe(wfd, input.data() + written, input.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 && errno != EAGAIN) written = input.size();
      if (written >= input.size()) {
        ::close(wfd);
        wfd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t n = ::read(rfd, buf, sizeof buf);
      if (n > 0) {
        result.out.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        ::close(rfd);
        rfd = -1;
      }
    }
  }
  if (wfd >= 0) ::close(wfd);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.status = status;
  return result;
}

}  // namespace

Annotation CommandAnnotator::annotate(const FunctionContext& fn) const {
  const auto res = run_process(command_, annotation_request(fn).dump());
  if (!WIFEXITED(res.status) || WEXITSTATUS(res.status) != 0) {
    raise(Errc::kAnnotatorFailure, fn.function.name + ": annotator command exited abnormally");
  }
  const auto j = io::parse_json(res.out, "annotator output for " + fn.function.name);
  return annotation_from_json(*lattice_, j, fn.function.name);
}

VerifiedCorpus build_corpus(const cpg::CpgGraph& g, std::span<const std::string> functions,
                            const Annotator& annotator, std::size_t workers) {
  const auto contexts = function_contexts(g);
  std::vector<const FunctionContext*> ctx(functions.size());
  for (std::size_t i = 0; i < functions.size(); ++i) {
    auto it = contexts.find(functions[i]);
    if (it == contexts.end()) raise(Errc::kInvalidArgument, "unknown function '" + functions[i] + "'");
    ctx[i] = &it->second;
  }

  // std::nullopt marks an annotator failure.
  std::vector<std::optional<Annotation>> results(functions.size());
  auto run = [&](std::size_t i) {
    try {
      results[i] = annotator.annotate(*ctx[i]);
    } catch (const std::exception&) {
      results[i].reset();
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, functions.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < functions.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < functions.size();) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  VerifiedCorpus corpus;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (!results[i]) {
      corpus.failed.push_back(functions[i]);
      continue;
    }
    Annotation& a = *results[i];
    a.function_id = functions[i];
    bool sat = true;
    try {
      sat = cpg::verify_claims(g, a.claims).satisfied;
    } catch (const Error& e) {
      // A claim naming a node that does not exist is a hallucination too.
      if (e.code() != Errc::kUnknownNode) throw;
      sat = false;
    }
    ++corpus.total;
    if (sat) {
      corpus.accepted.push_back(std::move(a));
    } else {
      ++corpus.rejected_count;
      corpus.rejected.push_back(functions[i]);
    }
  }
  return corpus;
}

VerifiedCorpus build_corpus(const cpg::CpgGraph& g, const Annotator& annotator, std::size_t workers) {
  std::vector<std::string> names;
  for (const auto& f : g.functions()) names.push_back(f.name);
  return build_corpus(g, names, annotator, workers);
}

std::string corpus_to_jsonl(const VerifiedCorpus& corpus) {
  std::string out;
  for (const auto& a : corpus.accepted) out += to_json(a).dump() + "\n";
  io::Json trailer = {{"accepted", corpus.accepted.size()},
                      {"rejected", corpus.rejected_count},
                      {"failed", corpus.failed.size()},
                      {"total", corpus.total},
                      {"rejected_functions", corpus.rejected},
                      {"failed_functions", corpus.failed}};
  out += io::Json{{"trailer", std::move(trailer)}}.dump() + "\n";
  return out;
}

void save_corpus(const VerifiedCorpus& corpus, const std::filesystem::path& path) {
  io::write_text_atomic(path, corpus_to_jsonl(corpus));
}

VerifiedCorpus load_corpus(const lattice::Lattice& lat, const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  VerifiedCorpus corpus;
  bool saw_trailer = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = io::parse_json(line, path.string() + ":" + std::to_string(lineno));
    if (j.contains("trailer")) {
      const auto& t = j["trailer"];
      corpus.rejected_count = t.value("rejected", std::size_t{0});
      corpus.total = t.value("total", std::size_t{0});
      corpus.rejected = t.value("rejected_functions", std::vector<std::string>{});
      corpus.failed = t.value("failed_functions", std::vector<std::string>{});
      saw_trailer = true;
      continue;
    }
    corpus.accepted.push_back(annotation_from_json(lat, j));
  }
  if (!saw_trailer) raise(Errc::kSchema, path.string() + ": corpus has no trailer record");
  if (corpus.accepted.size() + corpus.rejected_count != corpus.total) {
    raise(Errc::kSchema, path.string() + ": trailer totals disagree with accepted lines");
  }
  return corpus;
}

}  // namespace scaa::lifting
