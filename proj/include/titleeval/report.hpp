#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "titleeval/corpus.hpp"
#include "titleeval/embedding.hpp"
#include "titleeval/entity.hpp"
#include "titleeval/error.hpp"
#include "titleeval/lexical.hpp"
#include "titleeval/record.hpp"

namespace titleeval {

enum class Metric { Rouge1, Rouge2, RougeL, Meteor, MoverScore, BertScore, SciBertScore, Entity };

inline constexpr Metric kAllMetrics[] = {Metric::Rouge1,     Metric::Rouge2,    Metric::RougeL,
                                         Metric::Meteor,     Metric::MoverScore, Metric::BertScore,
                                         Metric::SciBertScore, Metric::Entity};

inline const char* metric_key(Metric m) {
  switch (m) {
    case Metric::Rouge1: return "rouge1";
    case Metric::Rouge2: return "rouge2";
    case Metric::RougeL: return "rougel";
    case Metric::Meteor: return "meteor";
    case Metric::MoverScore: return "moverscore";
    case Metric::BertScore: return "bertscore";
    case Metric::SciBertScore: return "scibertscore";
    case Metric::Entity: return "entity";
  }
  return "";
}

// Parses "rouge,meteor,entity"; "rouge" expands to the three ROUGE
// variants. The result is in canonical column order, without duplicates.
inline std::vector<Metric> parse_metric_list(std::string_view list) {
  std::vector<bool> wanted(std::size(kAllMetrics), false);
  std::size_t pos = 0;
  bool any = false;
  while (pos <= list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    std::string name = lowercase(normalize_whitespace(list.substr(pos, comma - pos)));
    pos = comma + 1;
    if (name.empty()) continue;
    any = true;
    if (name == "rouge") {
      wanted[0] = wanted[1] = wanted[2] = true;
      continue;
    }
    if (name == "rouge-1") name = "rouge1";
    if (name == "rouge-2") name = "rouge2";
    if (name == "rouge-l") name = "rougel";
    bool found = false;
    for (std::size_t k = 0; k < std::size(kAllMetrics); ++k) {
      if (name == metric_key(kAllMetrics[k])) {
        wanted[k] = true;
        found = true;
      }
    }
    if (!found) throw Error("unknown metric '" + name + "'");
  }
  if (!any) throw Error("no metrics requested");
  std::vector<Metric> out;
  for (std::size_t k = 0; k < std::size(kAllMetrics); ++k)
    if (wanted[k]) out.push_back(kAllMetrics[k]);
  return out;
}

struct MetricConfig {
  std::vector<Metric> metrics = {Metric::Rouge1, Metric::Rouge2, Metric::RougeL, Metric::Meteor};
  std::vector<std::string> systems;  // empty: every system of the corpus
  bool rouge_stemming = true;
  std::string bertscore_model = "bert";
  std::string scibertscore_model = "scibert";
  std::string moverscore_model = "bert";
  bool mover_uniform_weights = false;
  bool entity_drop_stopwords = false;
  std::optional<std::size_t> truncate_hyp;
  std::size_t workers = 1;  // does not affect results

  bool wants(Metric m) const { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); }

  // Every setting that can change a score, in a fixed order.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    std::vector<std::string> names;
    for (Metric m : metrics) names.emplace_back(metric_key(m));
    j["metrics"] = names;
    j["rouge_stemming"] = rouge_stemming;
    j["bertscore_model"] = bertscore_model;
    j["scibertscore_model"] = scibertscore_model;
    j["moverscore_model"] = moverscore_model;
    j["moverscore_weights"] = mover_uniform_weights ? "uniform" : "idf";
    j["moverscore_idf_corpus"] = "reference_titles";
    j["entity_drop_stopwords"] = entity_drop_stopwords;
    j["truncate_hyp"] = truncate_hyp ? nlohmann::ordered_json(*truncate_hyp) : nlohmann::ordered_json();
    return j;
  }
};

// FNV-1a 64 of the canonical configuration JSON, as 16 hex digits.
inline std::string config_fingerprint(const MetricConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::vector<std::string> metric_columns(const std::vector<Metric>& metrics) {
  std::vector<std::string> cols;
  for (Metric m : metrics) {
    switch (m) {
      case Metric::Rouge1: cols.emplace_back("ROUGE-1"); break;
      case Metric::Rouge2: cols.emplace_back("ROUGE-2"); break;
      case Metric::RougeL: cols.emplace_back("ROUGE-L"); break;
      case Metric::Meteor: cols.emplace_back("METEOR"); break;
      case Metric::MoverScore: cols.emplace_back("MoverScore"); break;
      case Metric::BertScore: cols.emplace_back("BERTScore"); break;
      case Metric::SciBertScore: cols.emplace_back("SciBERTScore"); break;
      case Metric::Entity:
        for (const char* name : EntityScores::kNames) cols.emplace_back(name);
        break;
    }
  }
  return cols;
}

struct MetricReport {
  std::vector<std::string> systems;
  std::vector<std::string> columns;
  // values[s][c]: x100 macro-average, nullopt when no record defines it.
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::vector<std::size_t>> skip_counts;
  std::string config_fingerprint;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::size_t record_count = 0;
};

namespace report_detail {

// Scores of one (record, system) pair in column order; nullopt = undefined.
using Row = std::vector<std::optional<double>>;

inline AnnotatedField truncated(const AnnotatedField& f, std::size_t max_tokens) {
  if (!f.tokens || f.tokens->size() <= max_tokens) return f;
  AnnotatedField out = f;
  out.tokens = truncate(*f.tokens, max_tokens);
  for (auto& m : out.embeddings) m.values.resize(max_tokens * m.dim);
  if (out.entities) {
    std::erase_if(*out.entities, [&](const EntityMention& e) { return e.token_end > max_tokens; });
  }
  return out;
}

inline const EmbeddingMatrix& need_embeddings(const AnnotatedField& f, const std::string& model) {
  const EmbeddingMatrix* m = f.find_embeddings(model);
  if (m == nullptr) throw Error("missing embeddings for model '" + model + "'");
  return *m;
}

class Evaluator {
 public:
  Evaluator(const std::vector<EvalRecord>& corpus, const MetricConfig& cfg) : corpus_(corpus), cfg_(cfg) {
    if (corpus_.empty()) throw Error("evaluate: corpus is empty");
    if (cfg_.metrics.empty()) throw Error("evaluate: no metrics requested");
    systems_ = cfg_.systems;
    if (systems_.empty()) {
      std::set<std::string> all;
      for (const auto& r : corpus_)
        for (const auto& [name, _] : r.hypotheses) all.insert(name);
      systems_.assign(all.begin(), all.end());
    }
    if (systems_.empty()) throw Error("evaluate: corpus has no hypothesis systems");
    validate();
    if (cfg_.wants(Metric::MoverScore)) {
      std::vector<TokenizedText> refs;
      refs.reserve(corpus_.size());
      for (const auto& r : corpus_) refs.push_back(*r.reference_title.tokens);
      idf_ = build_idf(refs);
    }
    columns_ = metric_columns(cfg_.metrics);
  }

  MetricReport run() {
    const std::size_t n_sys = systems_.size(), n_rec = corpus_.size();
    std::vector<Row> rows(n_rec * n_sys);
    std::vector<std::exception_ptr> errors(n_rec * n_sys);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t task = next++; task < rows.size(); task = next++) {
        try {
          rows[task] = score(corpus_[task / n_sys], systems_[task % n_sys]);
        } catch (...) {
          errors[task] = std::current_exception();
        }
      }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(cfg_.workers, rows.size()));
    if (n_workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    for (std::size_t t = 0; t < errors.size(); ++t) {
      if (!errors[t]) continue;
      try {
        std::rethrow_exception(errors[t]);
      } catch (const std::exception& e) {
        throw Error("evaluate: record '" + corpus_[t / n_sys].id + "' system '" + systems_[t % n_sys] +
                    "': " + e.what());
      }
    }

    MetricReport report;
    report.systems = systems_;
    report.columns = columns_;
    report.config = cfg_.to_json();
    report.config_fingerprint = config_fingerprint(cfg_);
    report.record_count = n_rec;
    for (std::size_t s = 0; s < n_sys; ++s) {
      std::vector<std::optional<double>> means(columns_.size());
      std::vector<std::size_t> skips(columns_.size(), 0);
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        std::vector<double> defined;
        for (std::size_t r = 0; r < n_rec; ++r) {
          const auto& v = rows[r * n_sys + s][c];
          if (v) {
            defined.push_back(*v);
          } else {
            ++skips[c];
          }
        }
        if (!defined.empty()) means[c] = 100.0 * order_independent_mean(std::move(defined));
      }
      report.values.push_back(std::move(means));
      report.skip_counts.push_back(std::move(skips));
    }
    return report;
  }

 private:
  const std::vector<EvalRecord>& corpus_;
  const MetricConfig& cfg_;
  std::vector<std::string> systems_;
  std::vector<std::string> columns_;
  IdfTable idf_;

  // Fails on the first record (in corpus order) lacking what a requested
  // metric needs, before any scoring starts.
  void validate() const {
    auto fail = [](Metric m, const EvalRecord& r, const std::string& what) {
      throw Error(std::string(metric_key(m)) + ": record '" + r.id + "': " + what);
    };
    for (const auto& r : corpus_) {
      if (!r.reference_title.tokens || !r.abstract.tokens)
        throw Error("evaluate: record '" + r.id + "' is not tokenized");
      for (const auto& sys : systems_) {
        auto it = r.hypotheses.find(sys);
        if (it == r.hypotheses.end()) throw Error("evaluate: record '" + r.id + "' has no hypothesis for system '" + sys + "'");
        const AnnotatedField& h = it->second;
        if (!h.tokens) throw Error("evaluate: record '" + r.id + "' system '" + sys + "' is not tokenized");
        for (Metric m : cfg_.metrics) {
          const std::string* model = nullptr;
          if (m == Metric::BertScore) model = &cfg_.bertscore_model;
          if (m == Metric::SciBertScore) model = &cfg_.scibertscore_model;
          if (m == Metric::MoverScore) model = &cfg_.moverscore_model;
          if (model != nullptr) {
            if (!r.reference_title.find_embeddings(*model))
              fail(m, r, "reference_title has no embeddings for model '" + *model + "'");
            if (!h.find_embeddings(*model))
              fail(m, r, "hypothesis '" + sys + "' has no embeddings for model '" + *model + "'");
            if (h.tokens->empty() || r.reference_title.tokens->empty())
              fail(m, r, "empty title cannot be embedded");
          }
          if (m == Metric::Entity) {
            if (!h.entities) fail(m, r, "hypothesis '" + sys + "' has no entity annotation");
            if (!r.reference_title.entities) fail(m, r, "reference_title has no entity annotation");
            if (!r.abstract.entities) fail(m, r, "abstract has no entity annotation");
          }
        }
      }
    }
  }

  Row score(const EvalRecord& rec, const std::string& system) const {
    const AnnotatedField& ref = rec.reference_title;
    const AnnotatedField hyp = cfg_.truncate_hyp ? truncated(rec.hypotheses.at(system), *cfg_.truncate_hyp)
                                                 : rec.hypotheses.at(system);
    const RougeOptions rouge_opts{cfg_.rouge_stemming};
    Row row;
    row.reserve(columns_.size());
    for (Metric m : cfg_.metrics) {
      switch (m) {
        case Metric::Rouge1: row.emplace_back(rouge_n(*hyp.tokens, *ref.tokens, 1, rouge_opts).f1); break;
        case Metric::Rouge2: row.emplace_back(rouge_n(*hyp.tokens, *ref.tokens, 2, rouge_opts).f1); break;
        case Metric::RougeL: row.emplace_back(rouge_l(*hyp.tokens, *ref.tokens, rouge_opts).f1); break;
        case Metric::Meteor: row.emplace_back(meteor_score(*hyp.tokens, *ref.tokens)); break;
        case Metric::MoverScore:
          row.emplace_back(mover_score(hyp, ref, idf_, {cfg_.moverscore_model, cfg_.mover_uniform_weights}));
          break;
        case Metric::BertScore:
          row.emplace_back(greedy_match_score(need_embeddings(hyp, cfg_.bertscore_model),
                                              need_embeddings(ref, cfg_.bertscore_model))
                               .f1);
          break;
        case Metric::SciBertScore:
          row.emplace_back(greedy_match_score(need_embeddings(hyp, cfg_.scibertscore_model),
                                              need_embeddings(ref, cfg_.scibertscore_model))
                               .f1);
          break;
        case Metric::Entity: {
          EntityScores es = entity_scores(hyp, ref, rec.abstract, {cfg_.entity_drop_stopwords});
          for (const auto& v : es.as_array()) row.push_back(v);
          break;
        }
      }
    }
    return row;
  }
};

}  // namespace report_detail

// Scores every (record, system) pair and macro-averages each column x100.
// Deterministic for a given corpus and config regardless of worker count
// or record order.
inline MetricReport evaluate(const std::vector<EvalRecord>& corpus, const MetricConfig& cfg) {
  return report_detail::Evaluator(corpus, cfg).run();
}

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Markdown, Csv, Json };

inline ReportFormat parse_report_format(std::string_view name) {
  std::string n = lowercase(name);
  if (n == "markdown" || n == "md") return ReportFormat::Markdown;
  if (n == "csv") return ReportFormat::Csv;
  if (n == "json") return ReportFormat::Json;
  throw Error("unknown report format '" + std::string(name) + "'");
}

inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace report_detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Column maxima at display precision; ties are all marked.
inline std::vector<std::vector<bool>> bold_cells(const MetricReport& r) {
  std::vector<std::vector<bool>> bold(r.systems.size(), std::vector<bool>(r.columns.size(), false));
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    std::optional<std::string> best;
    double best_v = 0.0;
    for (std::size_t s = 0; s < r.systems.size(); ++s) {
      if (!r.values[s][c]) continue;
      double v = std::stod(format_value(*r.values[s][c]));
      if (!best || v > best_v) {
        best = format_value(v);
        best_v = v;
      }
    }
    if (!best) continue;
    for (std::size_t s = 0; s < r.systems.size(); ++s)
      if (r.values[s][c] && format_value(*r.values[s][c]) == *best) bold[s][c] = true;
  }
  return bold;
}

}  // namespace report_detail

inline nlohmann::ordered_json report_to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["systems"] = r.systems;
  j["columns"] = r.columns;
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  for (const auto& row : r.values) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (const auto& v : row) jr.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json());
    values.push_back(std::move(jr));
  }
  j["values"] = std::move(values);
  j["skip_counts"] = r.skip_counts;
  j["record_count"] = r.record_count;
  j["config_fingerprint"] = r.config_fingerprint;
  j["config"] = r.config;
  return j;
}

inline MetricReport report_from_json(const nlohmann::ordered_json& j) {
  MetricReport r;
  try {
    r.systems = j.at("systems").get<std::vector<std::string>>();
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("values")) {
      std::vector<std::optional<double>> vals;
      for (const auto& v : row) vals.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      r.values.push_back(std::move(vals));
    }
    if (j.contains("skip_counts")) r.skip_counts = j["skip_counts"].get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("record_count")) r.record_count = j["record_count"].get<std::size_t>();
    if (j.contains("config_fingerprint")) r.config_fingerprint = j["config_fingerprint"].get<std::string>();
    if (j.contains("config")) r.config = j["config"];
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error(std::string("report: malformed JSON report (") + e.what() + ")");
  }
  if (r.values.size() != r.systems.size()) throw Error("report: value rows do not match systems");
  for (const auto& row : r.values)
    if (row.size() != r.columns.size()) throw Error("report: value columns do not match header");
  if (r.skip_counts.empty()) r.skip_counts.assign(r.systems.size(), std::vector<std::size_t>(r.columns.size(), 0));
  return r;
}

inline std::string render(const MetricReport& r, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::Markdown: {
      auto bold = report_detail::bold_cells(r);
      os << "| Model Name |";
      for (const auto& c : r.columns) os << ' ' << c << " |";
      os << "\n|---|";
      for (std::size_t c = 0; c < r.columns.size(); ++c) os << "---:|";
      os << '\n';
      for (std::size_t s = 0; s < r.systems.size(); ++s) {
        os << "| " << r.systems[s] << " |";
        for (std::size_t c = 0; c < r.columns.size(); ++c) {
          if (!r.values[s][c]) {
            os << " n/a |";
          } else if (bold[s][c]) {
            os << " **" << format_value(*r.values[s][c]) << "** |";
          } else {
            os << ' ' << format_value(*r.values[s][c]) << " |";
          }
        }
        os << '\n';
      }
      if (!r.config_fingerprint.empty()) os << "\nconfig " << r.config_fingerprint << '\n';
      break;
    }
    case ReportFormat::Csv: {
      os << "system";
      for (const auto& c : r.columns) os << ',' << report_detail::csv_field(c);
      os << '\n';
      for (std::size_t s = 0; s < r.systems.size(); ++s) {
        os << report_detail::csv_field(r.systems[s]);
        for (const auto& v : r.values[s]) os << ',' << (v ? format_value(*v) : std::string());
        os << '\n';
      }
      break;
    }
    case ReportFormat::Json:
      os << report_to_json(r).dump(2) << '\n';
      break;
  }
  return os.str();
}

// Reads a CSV produced by render(); used for round-trip checks and by
// callers that post-process tables.
inline MetricReport parse_csv_report(const std::string& text) {
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(std::move(cur));
    return fields;
  };
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("csv report: empty input");
  auto header = split(line);
  if (header.empty() || header[0] != "system") throw Error("csv report: missing header");
  MetricReport r;
  r.columns.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != header.size()) throw Error("csv report: ragged row");
    r.systems.push_back(fields[0]);
    std::vector<std::optional<double>> vals;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (fields[k].empty()) {
        vals.emplace_back();
        continue;
      }
      try {
        vals.emplace_back(std::stod(fields[k]));
      } catch (const std::exception&) {
        throw Error("csv report: bad number '" + fields[k] + "'");
      }
    }
    r.values.push_back(std::move(vals));
  }
  r.skip_counts.assign(r.systems.size(), std::vector<std::size_t>(r.columns.size(), 0));
  return r;
}

}  // namespace titleeval
