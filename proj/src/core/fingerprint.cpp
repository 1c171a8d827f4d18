#include "core/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/errors.hpp"

namespace scaa::fingerprint {

Target target_from(const graphormer::EmbeddingSet& s) {
  Target t;
  for (const auto& e : s.embeddings) {
    t.ids.push_back(e.entity_id);
    t.nodes.emplace_back(e.z);
  }
  return t;
}

MatchResult match(const Target& target, const Fingerprint& fp) {
  if (target.nodes.empty()) raise(Errc::kEmptyTarget, "target graph has no node embeddings");
  if (fp.nodes.empty()) raise(Errc::kInvalidArgument, "fingerprint " + fp.name + " has no nodes");
  MatchResult m;
  m.fingerprint = fp.name;
  double total = 0.0;
  for (std::size_t k = 0; k < fp.nodes.size(); ++k) {
    BestMatch best{k, target.ids[0], -1.0};
    for (std::size_t u = 0; u < target.nodes.size(); ++u) {
      const double c = std::max(0.0, embedding::cosine(target.nodes[u], fp.nodes[k]));
      if (c > best.cosine || (c == best.cosine && target.ids[u] < best.target_entity)) {
        best.cosine = c;
        best.target_entity = target.ids[u];
      }
    }
    total += best.cosine;
    m.pairs.push_back(best);
  }
  m.similarity = total / static_cast<double>(fp.nodes.size());
  return m;
}

double similarity(const Target& target, const Fingerprint& fp) { return match(target, fp).similarity; }

std::vector<MatchResult> match_and_alert(const Target& target, std::span<const Fingerprint> repo, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) raise(Errc::kConfig, "tau must lie in [0, 1]");
  std::vector<MatchResult> out;
  out.reserve(repo.size());
  for (const auto& fp : repo) {
    out.push_back(match(target, fp));
    out.back().alert = out.back().similarity > tau;
  }
  return out;
}

Fingerprint extract(const graphormer::EmbeddingSet& s, std::span<const ssckg::EntityId> entities, std::string name,
                    std::string provenance) {
  if (entities.empty()) raise(Errc::kInvalidArgument, "fingerprint needs at least one entity");
  std::map<ssckg::EntityId, std::size_t> pos;
  for (std::size_t i = 0; i < s.embeddings.size(); ++i) pos.emplace(s.embeddings[i].entity_id, i);
  Fingerprint fp{std::move(name), std::move(provenance), {}};
  for (auto id : entities) {
    auto it = pos.find(id);
    if (it == pos.end()) raise(Errc::kInvalidArgument, "no embedding for entity " + std::to_string(id));
    fp.nodes.emplace_back(s.embeddings[it->second].z);
  }
  return fp;
}

io::Json to_json(const Fingerprint& fp) {
  io::Json rows = io::Json::array();
  for (const auto& v : fp.nodes) rows.push_back(std::vector<double>(v.values().begin(), v.values().end()));
  return {{"name", fp.name}, {"provenance", fp.provenance}, {"embeddings", std::move(rows)}};
}

Fingerprint fingerprint_from_json(const io::Json& j) {
  if (!j.is_object() || !j.contains("name") || !j.contains("embeddings")) {
    raise(Errc::kSchema, "fingerprint must be an object with 'name' and 'embeddings'");
  }
  Fingerprint fp;
  try {
    fp.name = j["name"].get<std::string>();
    fp.provenance = j.value("provenance", std::string{});
    for (const auto& row : j["embeddings"]) fp.nodes.emplace_back(row.get<std::vector<double>>());
  } catch (const io::Json::exception& e) {
    raise(Errc::kSchema, std::string("fingerprint: ") + e.what());
  }
  if (fp.nodes.empty()) raise(Errc::kSchema, "fingerprint " + fp.name + " has no nodes");
  for (const auto& v : fp.nodes) {
    if (v.dimension() != fp.nodes.front().dimension()) {
      raise(Errc::kDimensionMismatch, "fingerprint " + fp.name + " mixes embedding dimensions");
    }
  }
  return fp;
}

void save_fingerprint(const Fingerprint& fp, const std::filesystem::path& path) {
  io::write_text_atomic(path, io::dump(to_json(fp)));
}

Fingerprint load_fingerprint(const std::filesystem::path& path) { return fingerprint_from_json(io::read_json(path)); }

std::vector<Fingerprint> load_repository(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) raise(Errc::kIo, "fingerprint repository not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Fingerprint> repo;
  for (const auto& f : files) repo.push_back(load_fingerprint(f));
  return repo;
}

io::Json to_json(const MatchResult& m) {
  io::Json pairs = io::Json::array();
  for (const auto& p : m.pairs) {
    pairs.push_back({{"fingerprint_node", p.fingerprint_node}, {"target_entity", p.target_entity}, {"cosine", p.cosine}});
  }
  return {{"fingerprint", m.fingerprint}, {"similarity", m.similarity}, {"alert", m.alert}, {"pairs", std::move(pairs)}};
}

std::vector<double> Grid::points() const {
  if (!(step > 0.0) || !(hi >= lo)) raise(Errc::kConfig, "threshold grid needs step > 0 and hi >= lo");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e10) / 1e10);
  }
  return out;
}

namespace {
std::pair<std::size_t, std::size_t> class_sizes(std::span<const Score> scores) {
  std::size_t pos = 0;
  for (const auto& s : scores) {
    if (!std::isfinite(s.value)) raise(Errc::kInvalidArgument, "scores must be finite");
    pos += s.malicious ? 1 : 0;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) raise(Errc::kSingleClassInput, "scores must contain both malicious and benign samples");
  return {pos, neg};
}
}  // namespace

ThresholdReport select_threshold(std::span<const Score> scores, const Grid& grid, double fpr_cap) {
  const auto [pos, neg] = class_sizes(scores);
  ThresholdReport r;
  r.fpr_cap = fpr_cap;
  for (double tau : grid.points()) {
    std::size_t tp = 0, fp = 0;
    for (const auto& s : scores) {
      if (s.value > tau) (s.malicious ? tp : fp) += 1;
    }
    GridRow row{tau, static_cast<double>(tp) / static_cast<double>(pos),
                static_cast<double>(fp) / static_cast<double>(neg), 0.0};
    row.j = row.tpr - row.fpr;
    r.grid.push_back(row);
  }

  const GridRow* best = nullptr;
  for (const auto& row : r.grid) {
    if (row.fpr <= fpr_cap && (best == nullptr || row.j > best->j)) best = &row;
  }
  if (best == nullptr) {
    r.cap_satisfied = false;
    for (const auto& row : r.grid) {
      if (best == nullptr || row.fpr < best->fpr) best = &row;
    }
  }
  r.tau = best->tau;
  r.tpr = best->tpr;
  r.fpr = best->fpr;
  r.j_statistic = best->j;
  return r;
}

double roc_auc(std::span<const Score> scores) {
  const auto [pos, neg] = class_sizes(scores);
  std::vector<Score> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), [](const Score& a, const Score& b) { return a.value < b.value; });
  // Sum of midranks of the malicious scores (Mann-Whitney U).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::size_t mal = 0;
    while (j < sorted.size() && sorted[j].value == sorted[i].value) mal += sorted[j++].malicious ? 1 : 0;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum += midrank * static_cast<double>(mal);
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

std::vector<Score> parse_scores(const io::Json& j) {
  const io::Json& list = j.is_object() && j.contains("scores") ? j["scores"] : j;
  if (!list.is_array()) raise(Errc::kSchema, "scores must be a JSON list");
  std::vector<Score> out;
  try {
    for (const auto& o : list) {
      const auto label = o.at("label").get<std::string>();
      if (label != "malicious" && label != "benign") {
        raise(Errc::kSchema, "score label must be 'malicious' or 'benign', got '" + label + "'");
      }
      const double v = o.at("score").get<double>();
      if (!(v >= 0.0 && v <= 1.0)) raise(Errc::kSchema, "scores must lie in [0, 1]");
      out.push_back({v, label == "malicious"});
    }
  } catch (const io::Json::exception& e) {
    raise(Errc::kSchema, std::string("scores: ") + e.what());
  }
  return out;
}

std::vector<Score> load_scores(const std::filesystem::path& path) { return parse_scores(io::read_json(path)); }

io::Json to_json(const ThresholdReport& r) {
  io::Json grid = io::Json::array();
  for (const auto& g : r.grid) grid.push_back({{"tau", g.tau}, {"tpr", g.tpr}, {"fpr", g.fpr}, {"j", g.j}});
  return {{"tau", r.tau},
          {"j_statistic", r.j_statistic},
          {"tpr", r.tpr},
          {"fpr", r.fpr},
          {"fpr_cap", r.fpr_cap},
          {"cap_satisfied", r.cap_satisfied},
          {"grid", std::move(grid)}};
}

}  // namespace scaa::fingerprint
