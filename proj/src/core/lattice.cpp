#include "core/lattice.hpp"

#include <algorithm>
#include <set>

#include "core/errors.hpp"

namespace scaa::lattice {

std::string Label::str() const {
  if (path_.empty()) return "TOP";
  std::string out = path_[0];
  for (std::size_t i = 1; i < path_.size(); ++i) out += "/" + path_[i];
  return out;
}

Label Label::parse(std::string_view text) {
  if (text == "TOP" || text == "⊤") return Label();
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find('/', start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (parts.back().empty()) {
      raise(Errc::kUnknownLabel, "malformed label '" + std::string(text) + "'");
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() > 3) {
    raise(Errc::kUnknownLabel, "label deeper than three tiers: '" + std::string(text) + "'");
  }
  return Label(std::move(parts));
}

Lattice Lattice::from_json(const io::Json& j) {
  if (!j.is_object()) raise(Errc::kConfig, "lattice: top level must be an object");
  Lattice lat;
  for (const auto& [cat, actions] : j.items()) {
    if (cat.empty() || cat.find('/') != std::string::npos || cat == "TOP") {
      raise(Errc::kConfig, "lattice: invalid category name '" + cat + "'");
    }
    auto& entry = lat.tree_.emplace_back(cat, decltype(tree_)::value_type::second_type{});
    if (actions.is_null()) continue;
    if (!actions.is_object()) raise(Errc::kConfig, "lattice: category '" + cat + "' must map to an object");
    for (const auto& [act, risks] : actions.items()) {
      if (act.empty() || act.find('/') != std::string::npos) {
        raise(Errc::kConfig, "lattice: invalid action name '" + act + "' under " + cat);
      }
      std::vector<std::string> ctx;
      if (!risks.is_null()) {
        if (!risks.is_array()) raise(Errc::kConfig, "lattice: action '" + act + "' must map to a list");
        std::set<std::string> seen;
        for (const auto& r : risks) {
          if (!r.is_string()) raise(Errc::kConfig, "lattice: risk context under " + act + " must be a string");
          auto name = r.get<std::string>();
          if (name.empty() || name.find('/') != std::string::npos) {
            raise(Errc::kConfig, "lattice: invalid risk context '" + name + "'");
          }
          if (!seen.insert(name).second) {
            raise(Errc::kConfig, "lattice: duplicate risk context '" + name + "' under " + act);
          }
          ctx.push_back(std::move(name));
        }
      }
      entry.second.emplace_back(act, std::move(ctx));
    }
  }
  return lat;
}

Lattice Lattice::load(const std::filesystem::path& path) { return from_json(io::read_json(path)); }

const Lattice& Lattice::default_lattice() {
  static const Lattice lat = from_json(io::Json::parse(R"({
    "Network": {
      "Socket_Init": [],
      "Protocol_Parse": ["Unbounded_Protocol_Parse"],
      "DNS_Resolve": []
    },
    "Memory": {},
    "Hardware": {
      "Register_Read": [],
      "Register_Write": [],
      "Coil_Write": ["Unauthenticated_Coil_Write"],
      "Firmware_Update": []
    },
    "FileSystem": {},
    "Cryptography": {
      "Hardcoded_Key": []
    }
  })"));
  return lat;
}

io::Json Lattice::to_json() const {
  io::Json j = io::Json::object();
  for (const auto& [cat, actions] : tree_) {
    io::Json a = io::Json::object();
    for (const auto& [act, ctx] : actions) a[act] = ctx;
    j[cat] = std::move(a);
  }
  return j;
}

LatticeCounts Lattice::counts() const {
  LatticeCounts c;
  c.categories = tree_.size();
  for (const auto& [_, actions] : tree_) {
    c.actions += actions.size();
    for (const auto& [__, ctx] : actions) c.risk_labels += ctx.size();
  }
  return c;
}

bool Lattice::contains(const Label& l) const {
  const auto& p = l.path();
  if (p.empty()) return true;
  auto cat = std::find_if(tree_.begin(), tree_.end(), [&](const auto& e) { return e.first == p[0]; });
  if (cat == tree_.end()) return false;
  if (p.size() == 1) return true;
  const auto& actions = cat->second;
  auto act = std::find_if(actions.begin(), actions.end(), [&](const auto& e) { return e.first == p[1]; });
  if (act == actions.end()) return false;
  if (p.size() == 2) return true;
  return p.size() == 3 && std::find(act->second.begin(), act->second.end(), p[2]) != act->second.end();
}

void Lattice::validate(const Label& l) const {
  if (!contains(l)) raise(Errc::kUnknownLabel, "'" + l.str() + "' is not in the active lattice");
}

Label Lattice::label(std::string_view text) const {
  Label l = Label::parse(text);
  validate(l);
  return l;
}

std::vector<Label> Lattice::elements() const {
  std::vector<Label> out{Label::top()};
  for (const auto& [cat, actions] : tree_) {
    out.emplace_back(std::vector<std::string>{cat});
    for (const auto& [act, ctx] : actions) {
      out.emplace_back(std::vector<std::string>{cat, act});
      for (const auto& r : ctx) out.emplace_back(std::vector<std::string>{cat, act, r});
    }
  }
  return out;
}

bool Lattice::leq(const Label& a, const Label& b) const {
  validate(a);
  validate(b);
  const auto& pa = a.path();
  const auto& pb = b.path();
  // b is an ancestor-or-equal of a iff b's path is a prefix of a's path.
  return pb.size() <= pa.size() && std::equal(pb.begin(), pb.end(), pa.begin());
}

Label Lattice::join(const Label& a, const Label& b) const {
  validate(a);
  validate(b);
  const auto& pa = a.path();
  const auto& pb = b.path();
  std::vector<std::string> common;
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()) && pa[i] == pb[i]; ++i) {
    common.push_back(pa[i]);
  }
  return Label(std::move(common));
}

bool Lattice::covers(const Label& predicted, const Label& truth) const { return leq(truth, predicted); }

double Lattice::evr(std::span<const GoldenRecord> records, EvrMode mode) const {
  if (records.empty()) raise(Errc::kEmptyGoldenSet, "golden set has no records");
  std::size_t violations = 0;
  for (const auto& r : records) {
    bool violated = !covers(r.predicted, r.ground_truth);
    // A covering prediction is still a violation in exact mode unless it
    // names the ground truth itself.
    if (mode == EvrMode::kExactTierMatch && r.predicted != r.ground_truth) violated = true;
    if (violated) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(records.size());
}

std::vector<GoldenRecord> parse_golden_set(const Lattice& lat, const io::Json& j) {
  if (!j.is_array()) raise(Errc::kSchema, "golden set must be a JSON list");
  std::vector<GoldenRecord> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    const std::string where = "golden[" + std::to_string(i) + "]";
    if (!o.is_object() || !o.contains("function_id") || !o.contains("truth") || !o.contains("predicted")) {
      raise(Errc::kSchema, where + ": expected {function_id, truth, predicted}");
    }
    out.push_back({o["function_id"].get<std::string>(), lat.label(o["truth"].get<std::string>()),
                   lat.label(o["predicted"].get<std::string>())});
  }
  return out;
}

std::vector<GoldenRecord> load_golden_set(const Lattice& lat, const std::filesystem::path& path) {
  return parse_golden_set(lat, io::read_json(path));
}

}  // namespace scaa::lattice
