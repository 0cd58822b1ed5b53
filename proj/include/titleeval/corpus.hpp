#pragma once

// Line-delimited JSON corpus files: one EvalRecord per line.
//
//   {"id": "p1",
//    "abstract":        {"text": "...", "tokens": [...], "entities": [[0, 2, "Graph Neural"]]},
//    "reference_title": {"text": "...", "embeddings": {"model": "bert", "dim": 768, "vectors": [[...]]}},
//    "hypotheses":      {"pegasus": {"text": "..."}}}
//
// "tokens", "entities" and "embeddings" are optional. Missing tokens are
// produced by tokenize(); entities and embeddings are never invented.
// "embeddings" may be a single block or an array of blocks with distinct
// model tags. Entity spans are [start_token, end_token) into the field.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "titleeval/error.hpp"
#include "titleeval/record.hpp"
#include "titleeval/textprep.hpp"

namespace titleeval {

namespace corpus_detail {

using nlohmann::json;

class FieldContext {
 public:
  FieldContext(std::size_t line, const std::string& id, std::string field)
      : line_(line), id_(id), field_(std::move(field)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "line " << line_;
    if (!id_.empty()) os << ": record '" << id_ << "'";
    if (!field_.empty()) os << ": " << field_;
    os << ": " << msg;
    throw Error(os.str());
  }

 private:
  std::size_t line_;
  const std::string& id_;
  std::string field_;
};

inline TokenizedText parse_tokens(const json& j, const std::string& raw, const FieldContext& ctx) {
  if (!j.is_array()) ctx.fail("\"tokens\" must be an array of strings");
  TokenizedText out;
  for (const auto& t : j) {
    if (!t.is_string()) ctx.fail("\"tokens\" must be an array of strings");
    out.tokens.push_back(lowercase(t.get<std::string>()));
  }
  // Recover surface offsets when the supplied tokens are what we would
  // have produced ourselves.
  TokenizedText own = tokenize(raw);
  if (own.tokens == out.tokens) out.offsets = std::move(own.offsets);
  return out;
}

inline EmbeddingMatrix parse_embedding_block(const json& j, std::size_t token_count,
                                             const FieldContext& ctx) {
  if (!j.is_object()) ctx.fail("embedding block must be an object");
  if (!j.contains("model") || !j["model"].is_string()) ctx.fail("embedding block needs a string \"model\"");
  std::string model = j["model"].get<std::string>();
  if (!j.contains("vectors") || !j["vectors"].is_array())
    ctx.fail("embeddings '" + model + "': \"vectors\" must be an array");
  const json& vecs = j["vectors"];
  std::size_t dim = 0;
  if (j.contains("dim")) {
    if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0)
      ctx.fail("embeddings '" + model + "': \"dim\" must be a positive integer");
    dim = j["dim"].get<std::size_t>();
  } else if (!vecs.empty() && vecs[0].is_array()) {
    dim = vecs[0].size();
  }
  if (vecs.size() != token_count) {
    std::ostringstream os;
    os << "embeddings '" << model << "': " << vecs.size() << " rows for " << token_count << " tokens";
    ctx.fail(os.str());
  }
  if (dim == 0) ctx.fail("embeddings '" + model + "': cannot determine dim");
  std::vector<float> values;
  values.reserve(vecs.size() * dim);
  for (std::size_t r = 0; r < vecs.size(); ++r) {
    const json& v = vecs[r];
    if (!v.is_array() || v.size() != dim) {
      std::ostringstream os;
      os << "embeddings '" << model << "': row " << r << " does not have " << dim << " values";
      ctx.fail(os.str());
    }
    for (const auto& x : v) {
      if (!x.is_number()) ctx.fail("embeddings '" + model + "': non-numeric value");
      double d = x.get<double>();
      if (!std::isfinite(d)) ctx.fail("embeddings '" + model + "': non-finite value");
      values.push_back(static_cast<float>(d));
    }
  }
  return EmbeddingMatrix(model, dim, std::move(values));
}

inline AnnotatedField parse_field(const json& j, const FieldContext& ctx) {
  if (!j.is_object()) ctx.fail("must be an object");
  AnnotatedField f;
  if (!j.contains("text") || !j["text"].is_string()) ctx.fail("missing string \"text\"");
  f.raw_text = j["text"].get<std::string>();
  f.tokens = j.contains("tokens") ? parse_tokens(j["tokens"], f.raw_text, ctx) : tokenize(f.raw_text);
  const std::size_t n = f.tokens->size();

  if (j.contains("entities")) {
    const json& ents = j["entities"];
    if (!ents.is_array()) ctx.fail("\"entities\" must be an array");
    std::vector<EntityMention> mentions;
    for (const auto& e : ents) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned() ||
          !e[2].is_string())
        ctx.fail("entity must be [start_token, end_token, \"surface\"]");
      auto start = e[0].get<std::size_t>();
      auto end = e[1].get<std::size_t>();
      if (start >= end || end > n) {
        std::ostringstream os;
        os << "entity span [" << start << ", " << end << ") outside " << n << " tokens";
        ctx.fail(os.str());
      }
      try {
        mentions.emplace_back(e[2].get<std::string>(), start, end);
      } catch (const Error& err) {
        ctx.fail(err.what());
      }
    }
    f.entities = std::move(mentions);
  }

  if (j.contains("embeddings")) {
    const json& emb = j["embeddings"];
    if (emb.is_array()) {
      std::set<std::string> seen;
      for (const auto& block : emb) {
        f.embeddings.push_back(parse_embedding_block(block, n, ctx));
        if (!seen.insert(f.embeddings.back().model).second)
          ctx.fail("duplicate embedding model '" + f.embeddings.back().model + "'");
      }
    } else {
      f.embeddings.push_back(parse_embedding_block(emb, n, ctx));
    }
  }
  return f;
}

inline json field_to_json(const AnnotatedField& f) {
  json j = json::object();
  j["text"] = f.raw_text;
  if (f.tokens) j["tokens"] = f.tokens->tokens;
  if (f.entities) {
    json ents = json::array();
    for (const auto& e : *f.entities) ents.push_back(json::array({e.token_start, e.token_end, e.surface}));
    j["entities"] = std::move(ents);
  }
  if (!f.embeddings.empty()) {
    json blocks = json::array();
    for (const auto& m : f.embeddings) {
      json vecs = json::array();
      for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        vecs.push_back(json(std::vector<float>(row.begin(), row.end())));
      }
      blocks.push_back({{"model", m.model}, {"dim", m.dim}, {"vectors", std::move(vecs)}});
    }
    j["embeddings"] = blocks.size() == 1 ? blocks[0] : blocks;
  }
  return j;
}

}  // namespace corpus_detail

inline EvalRecord parse_record(const std::string& line, std::size_t line_no) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "line " << line_no << ": malformed JSON (" << e.byte << ")";
    throw Error(os.str());
  }
  std::string id;
  corpus_detail::FieldContext top(line_no, id, "");
  if (!j.is_object()) top.fail("record must be a JSON object");
  if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
    top.fail("record needs a non-empty string \"id\"");
  id = j["id"].get<std::string>();

  EvalRecord rec;
  rec.id = id;
  for (const char* name : {"abstract", "reference_title"}) {
    corpus_detail::FieldContext ctx(line_no, id, name);
    if (!j.contains(name)) ctx.fail("missing");
    (name[0] == 'a' ? rec.abstract : rec.reference_title) = corpus_detail::parse_field(j[name], ctx);
  }
  if (j.contains("hypotheses")) {
    const json& hyps = j["hypotheses"];
    if (!hyps.is_object()) top.fail("\"hypotheses\" must be an object");
    for (const auto& [system, field] : hyps.items()) {
      corpus_detail::FieldContext ctx(line_no, id, "hypotheses." + system);
      rec.hypotheses.emplace(system, corpus_detail::parse_field(field, ctx));
    }
  }
  return rec;
}

inline std::vector<EvalRecord> read_corpus(std::istream& in) {
  std::vector<EvalRecord> records;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    EvalRecord rec = parse_record(line, line_no);
    auto [it, inserted] = seen.emplace(rec.id, line_no);
    if (!inserted) {
      std::ostringstream os;
      os << "line " << line_no << ": duplicate id '" << rec.id << "' (first seen on line " << it->second << ")";
      throw Error(os.str());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<EvalRecord> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus file '" + path + "'");
  return read_corpus(in);
}

inline std::string serialize_record(const EvalRecord& rec) {
  using nlohmann::json;
  json j = json::object();
  j["id"] = rec.id;
  j["abstract"] = corpus_detail::field_to_json(rec.abstract);
  j["reference_title"] = corpus_detail::field_to_json(rec.reference_title);
  json hyps = json::object();
  for (const auto& [system, field] : rec.hypotheses) hyps[system] = corpus_detail::field_to_json(field);
  j["hypotheses"] = std::move(hyps);
  return j.dump();
}

inline void write_corpus(std::ostream& out, const std::vector<EvalRecord>& records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

// What an enrichment pass must have added: entity spans on every field
// and, on every title (reference and hypotheses), one embedding block per
// listed model.
struct AnnotationRequirements {
  std::vector<std::string> title_models;
  bool entities = false;
};

inline void check_annotations(const std::vector<EvalRecord>& records, const AnnotationRequirements& req) {
  auto check = [&](const EvalRecord& r, const AnnotatedField& f, const std::string& name, bool title) {
    auto fail = [&](const std::string& msg) { throw Error("record '" + r.id + "': " + name + ": " + msg); };
    if (req.entities && !f.entities) fail("no entity annotation");
    if (!title) return;
    for (const auto& model : req.title_models) {
      const EmbeddingMatrix* m = f.find_embeddings(model);
      if (m == nullptr) fail("no embeddings for model '" + model + "'");
      if (!f.tokens || m->rows() != f.tokens->size()) fail("embedding rows do not match tokens");
    }
  };
  for (const auto& r : records) {
    check(r, r.abstract, "abstract", false);
    check(r, r.reference_title, "reference_title", true);
    for (const auto& [system, h] : r.hypotheses) check(r, h, "hypotheses." + system, true);
  }
}

// Keeps records whose abstract and reference title both reach the
// (inclusive) token thresholds. Hypotheses are not inspected.
inline std::vector<EvalRecord> filter_corpus(const std::vector<EvalRecord>& records,
                                             std::size_t min_abstract_tokens = 20,
                                             std::size_t min_title_tokens = 3) {
  std::vector<EvalRecord> kept;
  for (const auto& r : records) {
    if (!r.abstract.tokens || !r.reference_title.tokens)
      throw Error("filter: record '" + r.id + "' is not tokenized");
    if (r.abstract.tokens->size() >= min_abstract_tokens && r.reference_title.tokens->size() >= min_title_tokens)
      kept.push_back(r);
  }
  return kept;
}

struct CorpusStats {
  std::size_t record_count = 0;
  double mean_title_tokens = 0.0;
  double pct_titles_le_15 = 0.0;
  std::map<std::size_t, std::size_t> title_length_histogram;
  double mean_abstract_tokens = 0.0;
};

// Statistics over reference titles (and abstract length).
inline CorpusStats corpus_stats(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw Error("stats: corpus is empty");
  CorpusStats s;
  s.record_count = records.size();
  std::size_t title_sum = 0, abstract_sum = 0, short_titles = 0;
  for (const auto& r : records) {
    if (!r.abstract.tokens || !r.reference_title.tokens)
      throw Error("stats: record '" + r.id + "' is not tokenized");
    std::size_t t = r.reference_title.tokens->size();
    title_sum += t;
    abstract_sum += r.abstract.tokens->size();
    if (t <= 15) ++short_titles;
    ++s.title_length_histogram[t];
  }
  const auto n = static_cast<double>(records.size());
  s.mean_title_tokens = static_cast<double>(title_sum) / n;
  s.mean_abstract_tokens = static_cast<double>(abstract_sum) / n;
  s.pct_titles_le_15 = 100.0 * static_cast<double>(short_titles) / n;
  return s;
}

}  // namespace titleeval
