#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.
//
//   titleeval evaluate CORPUS [--systems a,b] [--metrics rouge,meteor,...]
//                             [--format json|markdown|csv] [--out FILE] [--workers N]
//   titleeval filter   CORPUS [--min-abstract 20] [--min-title 3] [--out FILE]
//   titleeval stats    CORPUS [--format text|json]
//   titleeval render   REPORT.json [--format markdown|csv|json] [--out FILE]
//   titleeval validate CORPUS [--entities] [--title-embeddings bert,scibert]

#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "titleeval/corpus.hpp"
#include "titleeval/entity.hpp"
#include "titleeval/error.hpp"
#include "titleeval/report.hpp"

namespace titleeval {

namespace cli_detail {

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = normalize_whitespace(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Fills missing entity annotations on every field with the capitalization
// heuristic. Fields that already carry entities are left alone.
inline void annotate_missing_entities(std::vector<EvalRecord>& corpus) {
  auto fill = [](AnnotatedField& f) {
    if (!f.entities && f.tokens) f.entities = heuristic_entities(f.raw_text, *f.tokens);
  };
  for (auto& r : corpus) {
    fill(r.abstract);
    fill(r.reference_title);
    for (auto& [_, h] : r.hypotheses) fill(h);
  }
}

inline std::string stats_text(const CorpusStats& s) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "records\t" << s.record_count << '\n'
     << "mean_title_tokens\t" << s.mean_title_tokens << '\n'
     << "pct_titles_le_15\t" << s.pct_titles_le_15 << '\n'
     << "mean_abstract_tokens\t" << s.mean_abstract_tokens << '\n'
     << "title_length_histogram\n";
  for (const auto& [len, count] : s.title_length_histogram) os << "  " << len << '\t' << count << '\n';
  return os.str();
}

inline std::string stats_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["record_count"] = s.record_count;
  j["mean_title_tokens"] = s.mean_title_tokens;
  j["pct_titles_le_15"] = s.pct_titles_le_15;
  j["mean_abstract_tokens"] = s.mean_abstract_tokens;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [len, count] : s.title_length_histogram) hist[std::to_string(len)] = count;
  j["title_length_histogram"] = std::move(hist);
  return j.dump(2) + "\n";
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Evaluate generated paper titles against reference titles and abstracts", "titleeval"};
  app.require_subcommand(1);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score hypothesis titles and write a metric report");
  std::string eval_corpus, eval_out, eval_format = "json", eval_systems, eval_metrics = "rouge,meteor";
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t truncate_hyp = 0;
  bool no_stem = false, mover_uniform = false, entity_stopwords = false, heuristic = false;
  MetricConfig cfg;
  eval_cmd->add_option("corpus", eval_corpus, "Corpus file (JSON lines)")->required();
  eval_cmd->add_option("--systems", eval_systems, "Comma-separated systems (default: all)");
  eval_cmd->add_option("--metrics", eval_metrics,
                       "Comma-separated: rouge, rouge1, rouge2, rougel, meteor, moverscore, bertscore, "
                       "scibertscore, entity")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Output file (default: stdout)");
  eval_cmd->add_option("--format", eval_format, "json, markdown or csv")->capture_default_str();
  eval_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--no-stem", no_stem, "Disable Porter stemming for ROUGE");
  eval_cmd->add_option("--bert-model", cfg.bertscore_model, "Embedding model tag for BERTScore")
      ->capture_default_str();
  eval_cmd->add_option("--scibert-model", cfg.scibertscore_model, "Embedding model tag for SciBERTScore")
      ->capture_default_str();
  eval_cmd->add_option("--mover-model", cfg.moverscore_model, "Embedding model tag for MoverScore")
      ->capture_default_str();
  eval_cmd->add_flag("--mover-uniform", mover_uniform, "Uniform instead of IDF token weights for MoverScore");
  eval_cmd->add_flag("--entity-stopwords", entity_stopwords, "Ignore stopwords inside entity mentions");
  eval_cmd->add_option("--truncate-hyp", truncate_hyp, "Truncate hypotheses to N tokens before scoring")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--heuristic-entities", heuristic,
                     "Annotate fields lacking entities with a capitalization heuristic (not a NER model)");

  // filter
  auto* filter_cmd = app.add_subcommand("filter", "Keep records meeting abstract/title length thresholds");
  std::string filter_path, filter_out;
  std::size_t min_abstract = 20, min_title = 3;
  filter_cmd->add_option("corpus", filter_path, "Corpus file (JSON lines)")->required();
  filter_cmd->add_option("--min-abstract", min_abstract, "Minimum abstract tokens")->capture_default_str();
  filter_cmd->add_option("--min-title", min_title, "Minimum reference title tokens")->capture_default_str();
  filter_cmd->add_option("--out", filter_out, "Output corpus (default: stdout)");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Reference title statistics");
  std::string stats_corpus, stats_format = "text";
  stats_cmd->add_option("corpus", stats_corpus, "Corpus file (JSON lines)")->required();
  stats_cmd->add_option("--format", stats_format, "text or json")->capture_default_str();

  // render
  auto* render_cmd = app.add_subcommand("render", "Render a JSON report as a table");
  std::string render_in, render_out, render_format = "markdown";
  render_cmd->add_option("report", render_in, "Report JSON written by evaluate")->required();
  render_cmd->add_option("--format", render_format, "markdown, csv or json")->capture_default_str();
  render_cmd->add_option("--out", render_out, "Output file (default: stdout)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a corpus file against the schema and annotation needs");
  std::string validate_corpus, validate_models;
  bool validate_entities = false;
  validate_cmd->add_option("corpus", validate_corpus, "Corpus file (JSON lines)")->required();
  validate_cmd->add_flag("--entities", validate_entities, "Require entity spans on every field");
  validate_cmd->add_option("--title-embeddings", validate_models,
                           "Comma-separated model tags every title must carry embeddings for");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (msg.empty()) msg = e.get_name();
    err << "titleeval: " << normalize_whitespace(msg) << '\n';
    return 2;
  }

  try {
    if (*eval_cmd) {
      cfg.metrics = parse_metric_list(eval_metrics);
      cfg.systems = cli_detail::split_list(eval_systems);
      cfg.rouge_stemming = !no_stem;
      cfg.mover_uniform_weights = mover_uniform;
      cfg.entity_drop_stopwords = entity_stopwords;
      if (truncate_hyp > 0) cfg.truncate_hyp = truncate_hyp;
      cfg.workers = workers;
      const ReportFormat format = parse_report_format(eval_format);
      auto corpus = load_corpus(eval_corpus);
      if (heuristic) cli_detail::annotate_missing_entities(corpus);
      MetricReport report = evaluate(corpus, cfg);
      if (heuristic) report.config["entity_annotations"] = "heuristic-fallback";
      cli_detail::write_output(eval_out, render(report, format), out);
    } else if (*filter_cmd) {
      auto corpus = load_corpus(filter_path);
      auto kept = filter_corpus(corpus, min_abstract, min_title);
      std::ostringstream os;
      write_corpus(os, kept);
      cli_detail::write_output(filter_out, os.str(), out);
      err << "kept " << kept.size() << " of " << corpus.size() << " records\n";
    } else if (*stats_cmd) {
      auto s = corpus_stats(load_corpus(stats_corpus));
      if (stats_format == "text") {
        out << cli_detail::stats_text(s);
      } else if (stats_format == "json") {
        out << cli_detail::stats_json(s);
      } else {
        throw Error("unknown stats format '" + stats_format + "'");
      }
    } else if (*validate_cmd) {
      auto corpus = load_corpus(validate_corpus);
      check_annotations(corpus, {cli_detail::split_list(validate_models), validate_entities});
      out << "ok " << corpus.size() << " records\n";
    } else if (*render_cmd) {
      const ReportFormat format = parse_report_format(render_format);
      std::ifstream in(render_in);
      if (!in) throw Error("cannot read report '" + render_in + "'");
      nlohmann::ordered_json j;
      try {
        j = nlohmann::ordered_json::parse(in);
      } catch (const nlohmann::ordered_json::parse_error&) {
        throw Error("report '" + render_in + "' is not valid JSON");
      }
      cli_detail::write_output(render_out, render(report_from_json(j), format), out);
    }
  } catch (const Error& e) {
    err << "titleeval: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace titleeval
