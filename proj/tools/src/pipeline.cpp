#include "pipeline.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <map>

#include "agendascope/corpus.hpp"
#include "agendascope/effects.hpp"
#include "agendascope/formula.hpp"
#include "agendascope/metrics.hpp"
#include "agendascope/model_search.hpp"
#include "agendascope/report.hpp"
#include "agendascope/serialize.hpp"
#include "agendascope/stm.hpp"

namespace agendascope::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("HashError", "SHA-256 computation failed");
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

namespace {

constexpr const char* kVersion = "0.1.0";

// Collects one stage's inputs and outputs and writes its manifest.
class Stage {
 public:
  Stage(RunContext& ctx, std::string name)
      : ctx_(ctx), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {
    dir_ = ctx_.config.output_dir / name_;
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ctx_.log("[" + name_ + "] started");
  }

  const fs::path& dir() const { return dir_; }

  // Reads <output_dir>/<stage>/<file>, or throws MissingArtifact(stage).
  std::string upstream(const std::string& stage, const std::string& file) {
    const fs::path p = ctx_.config.output_dir / stage / file;
    if (!fs::exists(p) || !fs::exists(ctx_.config.output_dir / stage / "manifest.json"))
      throw MissingArtifact(stage, p);
    std::string bytes = json::read_file(p);
    add_input(stage + "/" + file, bytes);
    return bytes;
  }

  void add_input(const std::string& label, std::string_view bytes) {
    inputs_.push_back(Json{{"path", label}, {"sha256", sha256_hex(bytes)}});
  }

  void write(const std::string& file, const std::string& content) {
    json::write_file(dir_ / file, content);
    outputs_.push_back(Json{{"path", name_ + "/" + file},
                            {"sha256", sha256_hex(content)},
                            {"bytes", content.size()}});
  }

  void note(const std::string& key, Json value) { extra_[key] = std::move(value); }

  void finish() {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json timings{{"seconds", seconds}, {"threads", ctx_.threads}};
    Json m{{"stage", name_},
           {"version", kVersion},
           {"seed", ctx_.config.seed},
           {"deterministic", ctx_.config.deterministic},
           {"config_sha256", ctx_.config_sha256},
           {"inputs", inputs_},
           {"outputs", outputs_}};
    if (!extra_.empty()) m["summary"] = extra_;
    // Wall-clock time is the one thing a rerun cannot reproduce, so
    // deterministic runs only log it.
    if (!ctx_.config.deterministic) m["timings"] = timings;
    json::write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", seconds);
    ctx_.log("[" + name_ + "] done in " + buf + " s");
  }

 private:
  RunContext& ctx_;
  std::string name_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  Json extra_ = Json::object();
};

// Documents with every formula covariate present, and their design.
struct Modeling {
  Corpus corpus;
  Formula formula;
  PrevalenceDesign design;
};

Modeling prepare(const Corpus& corpus, const std::string& formula_text) {
  Modeling m;
  m.formula = bind_formula(parse_formula(formula_text), corpus.covariates);
  m.design = build_design(m.formula, corpus.covariates);
  if (m.design.dropped_rows.empty()) {
    m.corpus = corpus;
  } else {
    m.corpus = corpus.select_documents(m.design.source_rows);
    m.design = build_design(m.formula, m.corpus.covariates);
  }
  return m;
}

int topic_index(int one_based, int k, const std::string& what) {
  if (one_based < 1 || one_based > k)
    throw InvalidArgument(what + ": topic " + std::to_string(one_based) + " is outside 1.." + std::to_string(k));
  return one_based - 1;
}

std::vector<int> topics_or_all(const std::vector<int>& topics, int k, const std::string& what) {
  std::vector<int> out;
  if (topics.empty())
    for (int t = 0; t < k; ++t) out.push_back(t);
  else
    for (int t : topics) out.push_back(topic_index(t, k, what));
  return out;
}

std::string file_safe(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

Corpus load_corpus(Stage& stage) { return json::corpus_from_json(stage.upstream("ingest", "corpus.json")); }

FittedModel load_model(Stage& stage) { return json::model_from_json(stage.upstream("fit", "model.json")); }

}  // namespace

void cmd_ingest(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  Stage stage(ctx, "ingest");
  UngdcLoad load = load_ungdc_layout(c.corpus_dir, c.metadata);
  stage.add_input(c.metadata.string(), json::read_file(c.metadata));
  for (const auto& d : load.docs) stage.add_input((c.corpus_dir / (d.doc_id + ".txt")).string(), d.text);
  if (c.stopwords_file) stage.add_input(c.stopwords_file->string(), json::read_file(*c.stopwords_file));
  for (const auto& w : load.warnings) ctx.log("[ingest] warning: " + w);

  BuildReport report;
  Corpus corpus = build_corpus(load.docs, load.covariates, c.preprocess(), &report, ctx.threads);
  std::int64_t tokens = 0;
  for (const auto& d : corpus.docs) tokens += d.total();

  stage.write("corpus.json", json::corpus_to_json(corpus));
  Json r{{"documents", corpus.num_docs()},
         {"vocabulary", corpus.vocab_size()},
         {"tokens", tokens},
         {"warnings", load.warnings},
         {"dropped_empty", report.dropped_empty},
         {"docs_without_covariates", report.docs_without_covariates},
         {"covariates_without_docs", report.covariates_without_docs}};
  stage.write("build_report.json", r.dump(2) + "\n");
  stage.note("documents", corpus.num_docs());
  stage.note("vocabulary", corpus.vocab_size());
  stage.finish();
}

void cmd_search(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  if (c.k_grid.empty()) throw InvalidArgument("search needs fit.k_grid in the run configuration");
  Stage stage(ctx, "search");
  const Modeling m = prepare(load_corpus(stage), c.formula);

  SearchOptions opts;
  opts.candidate_rel_tol = c.candidate_rel_tol;
  opts.m_top_words = c.coherence_words;
  opts.frex_w = c.frex_w;
  ModelSearchResult result = search(m.corpus, m.design, c.k_grid, c.fit_config(c.k_grid.front(), ctx.threads), opts);

  stage.write("search.json", json::search_to_json(result));
  stage.write("search_plot.tsv", json::search_plot_tsv(result));
  stage.note("selected_k", result.selected_k);
  ctx.log("[search] selected K = " + std::to_string(result.selected_k));
  stage.finish();
}

void cmd_fit(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  Stage stage(ctx, "fit");
  const Corpus corpus = load_corpus(stage);
  int k = 0;
  if (c.k) {
    k = *c.k;
  } else {
    k = json::search_from_json(stage.upstream("search", "search.json")).selected_k;
  }
  const Modeling m = prepare(corpus, c.formula);
  FittedModel model = fit(m.corpus, m.design, c.fit_config(k, ctx.threads));
  model.formula = to_string(m.formula);

  stage.write("model.json", json::model_to_json(model));
  stage.note("k", k);
  stage.note("documents", m.corpus.num_docs());
  stage.note("em_iterations", model.bound_trace.size());
  stage.note("converged", model.converged);
  ctx.log("[fit] K = " + std::to_string(k) + ", " + std::to_string(model.bound_trace.size()) +
                    " EM iterations" + (model.converged ? "" : " (not converged)"));
  stage.finish();
}

void cmd_metrics(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  Stage stage(ctx, "metrics");
  const Corpus corpus = load_corpus(stage);
  const FittedModel model = load_model(stage);
  const Modeling m = prepare(corpus, model.formula);
  if (m.corpus.vocabulary != model.vocabulary)
    throw FormatError("model vocabulary does not match the ingested corpus; rerun fit");

  const auto summaries =
      summarize_topics(model.beta, model.vocabulary, m.corpus, static_cast<std::size_t>(c.metrics_top_words), c.frex_w);
  const ModelQuality quality = model_quality(model.beta, m.corpus, c.coherence_words, c.frex_w);

  stage.write("summaries.json", json::summaries_to_json(summaries, quality));
  stage.write("top_words.tsv", json::top_words_tsv(summaries));
  for (const char* metric : {"prob", "frex", "lift", "score"})
    stage.write(std::string("top_words_") + metric + ".txt", json::top_words_table(summaries, metric));
  stage.finish();
}

void cmd_effects(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  Stage stage(ctx, "effects");
  const Corpus corpus = load_corpus(stage);
  const FittedModel model = load_model(stage);
  const Modeling m = prepare(corpus, model.formula);
  const CovariateTable& covs = m.corpus.covariates;

  std::vector<EffectTarget> targets = c.effects;
  if (targets.empty() && c.contrasts.empty())
    for (const auto& t : m.formula.terms) targets.push_back(EffectTarget{t.name, {}, 25, false});

  EffectOptions opts;
  opts.average_over_observed = c.average_over_observed;
  opts.threads = ctx.threads;

  // Estimate j (in config order, topics ascending) draws from
  // derive_seed(seed, j); contrasts continue the same numbering.
  std::uint64_t stream = 0;
  std::vector<EffectEstimate> effects;
  for (const auto& t : targets) {
    const auto grid = default_grid(m.design, covs, t.covariate, t.grid_points, t.log_scale);
    for (int topic : topics_or_all(t.topics, model.k, "effects target " + t.covariate)) {
      EffectEstimate e = estimate_effect(model, m.formula, covs, topic, t.covariate, grid, c.n_draws,
                                         derive_seed(c.seed, stream++), opts);
      stage.write(file_safe(t.covariate) + "_topic" + std::to_string(topic + 1) + ".tsv", json::effect_tsv(e));
      effects.push_back(std::move(e));
    }
  }
  std::vector<ContrastEstimate> contrasts;
  for (const auto& t : c.contrasts) {
    for (int topic : topics_or_all(t.topics, model.k, "effects contrast " + t.covariate))
      contrasts.push_back(estimate_contrast(model, m.formula, covs, topic, t.covariate, t.level_a, t.level_b,
                                            c.n_draws, derive_seed(c.seed, stream++), opts));
  }
  stage.write("effects.json", json::effects_to_json(effects, contrasts));
  stage.write("contrasts.tsv", json::contrasts_tsv(contrasts));
  stage.finish();
}

void cmd_report(RunContext& ctx) {
  const RunConfig& c = ctx.config;
  Stage stage(ctx, "report");
  const FittedModel model = load_model(stage);

  const TopicGraph graph = topic_graph(model, c.graph_threshold, c.graph_source);
  stage.write("graph.dot", to_dot(graph));
  stage.write("graph.json", json::graph_to_json(graph));

  std::vector<std::pair<int, std::vector<std::pair<std::string, double>>>> clouds;
  const std::size_t n_words = std::min(c.cloud_words, model.vocabulary.size());
  for (int t : topics_or_all(c.cloud_topics, model.k, "report.cloud_topics"))
    clouds.emplace_back(t, wordcloud_data(model, t, n_words));
  stage.write("clouds.json", json::clouds_to_json(clouds));

  std::vector<PerspectiveContrast> pcs;
  for (const auto& [a, b] : c.contrast_pairs)
    pcs.push_back(perspective_contrast(model, topic_index(a, model.k, "report.contrast_pairs"),
                                       topic_index(b, model.k, "report.contrast_pairs"),
                                       std::min(c.contrast_words, model.vocabulary.size())));
  stage.write("contrasts.json", json::contrasts_to_json(pcs));
  stage.finish();
}

void cmd_all(RunContext& ctx) {
  cmd_ingest(ctx);
  if (!ctx.config.k_grid.empty()) cmd_search(ctx);
  cmd_fit(ctx);
  cmd_metrics(ctx);
  cmd_effects(ctx);
  cmd_report(ctx);
}

}  // namespace agendascope::cli
