#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stainnorm/error.hpp"
#include "stainnorm/io.hpp"

namespace stainnorm {
namespace {

using nlohmann::json;

json matrix_json(const StainMatrix& v) {
  const Vec3& h = v.hematoxylin();
  const Vec3& e = v.eosin();
  return json::array({h[0], h[1], h[2], e[0], e[1], e[2]});
}

[[noreturn]] void invalid(const std::string& what) { throw StainError(ErrorCode::InvalidProfile, what); }

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) invalid(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) invalid(std::string(what) + " must be a number");
  return j.get<double>();
}

StainMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.size() != 6) invalid("stain_matrix must hold 6 numbers");
  Vec3 h, e;
  for (std::size_t c = 0; c < 3; ++c) {
    h[c] = number(j[c], "stain_matrix entry");
    e[c] = number(j[c + 3], "stain_matrix entry");
  }
  try {
    return StainMatrix::from_columns(h, e);
  } catch (const StainError& err) {
    invalid(err.what());
  }
}

MaxConcentrations max_c_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) invalid("max_c must hold 2 numbers");
  MaxConcentrations m{number(j[0], "max_c entry"), number(j[1], "max_c entry")};
  if (!(m[0] > 0.0 && m[1] > 0.0)) invalid("max_c entries must be positive");
  return m;
}

StrategyKind strategy_from_tag(const std::string& tag, std::uint64_t seed) {
  if (tag == "macenko") return StrategyMacenko{};
  if (tag == "stochastic") return StrategyStochastic{seed};
  if (tag == "concat") return StrategyConcat{};
  if (tag == "avg-pre") return StrategyAvgPre{};
  if (tag == "avg-post") return StrategyAvgPost{};
  invalid("unknown strategy '" + tag + "'");
}

}  // namespace

std::string serialize_profile(const ProfileDocument& doc) {
  json j;
  j["format_version"] = kProfileFormatVersion;
  j["params"] = {{"beta", doc.params.beta},
                 {"alpha", doc.params.alpha},
                 {"i0", doc.params.i0},
                 {"min_tissue_pixels", doc.params.min_tissue_pixels}};
  j["created_at"] = doc.created_at;

  if (const auto* p = std::get_if<ReferenceProfile>(&doc.profile)) {
    j["strategy"] = strategy_tag(p->strategy);
    j["stain_matrix"] = matrix_json(p->stain_matrix);
    j["max_c"] = {p->max_c[0], p->max_c[1]};
    j["source_count"] = p->source_count;
    j["seed"] = nullptr;
  } else {
    const auto& s = std::get<StochasticProfile>(doc.profile);
    j["strategy"] = "stochastic";
    j["stain_matrix"] = matrix_json(s.candidate(0).stain_matrix);
    j["max_c"] = {s.candidate(0).max_c[0], s.candidate(0).max_c[1]};
    j["source_count"] = s.source_count();
    j["seed"] = s.seed();
    json candidates = json::array();
    for (const auto& c : s.candidates()) {
      candidates.push_back({{"stain_matrix", matrix_json(c.stain_matrix)},
                            {"max_c", {c.max_c[0], c.max_c[1]}}});
    }
    j["candidates"] = std::move(candidates);
  }
  return j.dump(2) + "\n";
}

ProfileDocument parse_profile(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("profile must be a JSON object");
  const auto version = j.find("format_version");
  if (version == j.end() || !version->is_number_integer() ||
      version->get<int>() != kProfileFormatVersion) {
    throw StainError(ErrorCode::SchemaVersionMismatch,
                     "expected format_version " + std::to_string(kProfileFormatVersion));
  }

  ProfileDocument doc{ReferenceProfile{StainMatrix::from_columns({1, 0, 0}, {0, 1, 0}), {1, 1},
                                       StrategyMacenko{}, 1},
                      {}, {}};
  const json& params = field(j, "params");
  doc.params.beta = number(field(params, "beta"), "params.beta");
  doc.params.alpha = number(field(params, "alpha"), "params.alpha");
  doc.params.i0 = number(field(params, "i0"), "params.i0");
  if (const auto it = params.find("min_tissue_pixels"); it != params.end()) {
    if (!it->is_number_unsigned()) invalid("params.min_tissue_pixels must be a non-negative integer");
    doc.params.min_tissue_pixels = it->get<std::size_t>();
  }
  try {
    doc.params.validate();
  } catch (const StainError& e) {
    invalid(e.what());
  }
  if (const auto it = j.find("created_at"); it != j.end() && it->is_string()) {
    doc.created_at = it->get<std::string>();
  }

  const json& tag = field(j, "strategy");
  if (!tag.is_string()) invalid("strategy must be a string");
  const json& count = field(j, "source_count");
  if (!count.is_number_unsigned() || count.get<std::size_t>() == 0) {
    invalid("source_count must be a positive integer");
  }

  std::uint64_t seed = 0;
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) invalid("seed must be a non-negative integer");
    seed = it->get<std::uint64_t>();
  }
  const StrategyKind strategy = strategy_from_tag(tag.get<std::string>(), seed);

  if (std::holds_alternative<StrategyStochastic>(strategy)) {
    const json& list = field(j, "candidates");
    if (!list.is_array() || list.empty()) invalid("candidates must be a non-empty array");
    if (list.size() != count.get<std::size_t>()) invalid("candidates do not match source_count");
    std::vector<ReferenceProfile> candidates;
    for (const auto& c : list) {
      candidates.push_back({matrix_from_json(field(c, "stain_matrix")),
                            max_c_from_json(field(c, "max_c")), strategy, 1});
    }
    doc.profile = StochasticProfile(std::move(candidates), seed);
  } else {
    doc.profile = ReferenceProfile{matrix_from_json(field(j, "stain_matrix")),
                                   max_c_from_json(field(j, "max_c")), strategy,
                                   count.get<std::size_t>()};
  }
  return doc;
}

void save_profile(const ProfileDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StainError(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << serialize_profile(doc);
  if (!out) throw StainError(ErrorCode::IoError, "write failed: " + path.string());
}

ProfileDocument load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StainError(ErrorCode::FileNotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_profile(buf.str());
}

std::string utc_timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char text[32];
  std::strftime(text, sizeof text, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return text;
}

}  // namespace stainnorm
