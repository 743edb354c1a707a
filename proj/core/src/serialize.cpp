#include "agendascope/serialize.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "agendascope/error.hpp"

namespace agendascope::json {

using Json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw FormatError("expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json value_to_json(const CovariateValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

const char* kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kBoolean: return "boolean";
    case ColumnKind::kCategorical: return "categorical";
  }
  return "numeric";
}

ColumnKind kind_from(const std::string& s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "boolean") return ColumnKind::kBoolean;
  if (s == "categorical") return ColumnKind::kCategorical;
  throw FormatError("unknown covariate kind '" + s + "'");
}

Json parse(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unexpected JSON structure: ") + e.what());
  }
}

}  // namespace

std::string format_value(const CovariateValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return num(*d);
  return std::get<std::string>(v);
}

std::string corpus_to_json(const Corpus& corpus) {
  Json j;
  j["vocabulary"] = corpus.vocabulary;
  Json docs = Json::array();
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    Json terms = Json::array();
    const auto& doc = corpus.docs[d];
    for (std::size_t i = 0; i < doc.terms.size(); ++i) terms.push_back(Json::array({doc.terms[i], doc.counts[i]}));
    docs.push_back(Json{{"id", corpus.doc_ids[d]}, {"terms", std::move(terms)}});
  }
  j["docs"] = std::move(docs);
  Json schema = Json::array();
  for (const auto& c : corpus.covariates.columns())
    schema.push_back(Json{{"name", c.name}, {"kind", kind_name(c.kind)}});
  j["covariate_schema"] = std::move(schema);
  Json rows = Json::array();
  for (std::size_t r = 0; r < corpus.covariates.rows(); ++r) {
    Json row;
    row["doc_id"] = corpus.covariates.doc_ids()[r];
    for (const auto& c : corpus.covariates.columns()) {
      if (c.is_missing(r))
        row[c.name] = nullptr;
      else if (c.kind == ColumnKind::kCategorical)
        row[c.name] = *c.categorical[r];
      else
        row[c.name] = *c.numeric[r];
    }
    rows.push_back(std::move(row));
  }
  j["covariates"] = std::move(rows);
  return j.dump() + "\n";
}

Corpus corpus_from_json(std::string_view text) {
  const Json j = parse(text);
  return guarded([&] {
    Corpus c;
    c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    for (const auto& d : j.at("docs")) {
      c.doc_ids.push_back(d.at("id").get<std::string>());
      DocTerms dt;
      for (const auto& tc : d.at("terms")) {
        dt.terms.push_back(tc.at(0).get<std::int32_t>());
        dt.counts.push_back(tc.at(1).get<std::int32_t>());
      }
      c.docs.push_back(std::move(dt));
    }
    std::vector<std::string> cov_ids;
    const auto& rows = j.at("covariates");
    for (const auto& r : rows) cov_ids.push_back(r.at("doc_id").get<std::string>());
    CovariateTable table(cov_ids);
    for (const auto& s : j.at("covariate_schema")) {
      CovariateColumn col{s.at("name").get<std::string>(), kind_from(s.at("kind").get<std::string>()), {}, {}};
      for (const auto& r : rows) {
        const auto& v = r.at(col.name);
        if (col.kind == ColumnKind::kCategorical)
          col.categorical.push_back(v.is_null() ? std::nullopt : std::optional<std::string>(v.get<std::string>()));
        else
          col.numeric.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      }
      table.add_column(std::move(col));
    }
    c.covariates = std::move(table);
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("corpus archive violates invariants: ") + e.what());
    }
    return c;
  });
}

std::string model_to_json(const FittedModel& m) {
  Json j;
  j["k"] = m.k;
  j["objective"] = "laplace-approximate";
  j["vocabulary"] = m.vocabulary;
  j["beta"] = matrix_to_json(m.beta);
  j["gamma"] = matrix_to_json(m.gamma);
  j["sigma"] = matrix_to_json(m.sigma);
  j["eta"] = matrix_to_json(m.eta);
  Json nu = Json::array();
  for (const auto& n : m.nu) nu.push_back(matrix_to_json(n));
  j["nu"] = std::move(nu);
  j["bound_trace"] = m.bound_trace;
  j["config"] = Json{{"k", m.config.k},
                     {"seed", m.config.seed},
                     {"max_em_iters", m.config.max_em_iters},
                     {"rel_tol", m.config.rel_tol},
                     {"ridge_gamma", m.config.ridge_gamma},
                     {"sigma_floor", m.config.sigma_floor},
                     {"init", m.config.init == InitMethod::kClusterSeeded ? "cluster" : "dirichlet"},
                     {"init_lloyd_iters", m.config.init_lloyd_iters},
                     {"init_restarts", m.config.init_restarts}};
  j["design_column_names"] = m.design_column_names;
  j["doc_ids"] = m.doc_ids;
  j["formula"] = m.formula;
  j["converged"] = m.converged;
  j["rejected_final_step"] = m.rejected_final_step;
  j["hessian_fallbacks"] = m.hessian_fallbacks;
  return j.dump() + "\n";
}

FittedModel model_from_json(std::string_view text) {
  const Json j = parse(text);
  return guarded([&] {
    FittedModel m;
    m.k = j.at("k").get<int>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    m.beta = matrix_from_json(j.at("beta"));
    m.gamma = matrix_from_json(j.at("gamma"), m.k - 1);
    m.sigma = matrix_from_json(j.at("sigma"), m.k - 1);
    m.eta = matrix_from_json(j.at("eta"), m.k - 1);
    for (const auto& n : j.at("nu")) m.nu.push_back(matrix_from_json(n, m.k - 1));
    m.bound_trace = j.at("bound_trace").get<std::vector<double>>();
    const auto& c = j.at("config");
    m.config.k = c.at("k").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.max_em_iters = c.at("max_em_iters").get<int>();
    m.config.rel_tol = c.at("rel_tol").get<double>();
    m.config.ridge_gamma = c.at("ridge_gamma").get<double>();
    m.config.sigma_floor = c.at("sigma_floor").get<double>();
    const auto init = c.value("init", std::string("cluster"));
    if (init != "cluster" && init != "dirichlet") throw FormatError("unknown init method '" + init + "'");
    m.config.init = init == "cluster" ? InitMethod::kClusterSeeded : InitMethod::kDirichlet;
    m.config.init_lloyd_iters = c.value("init_lloyd_iters", m.config.init_lloyd_iters);
    m.config.init_restarts = c.value("init_restarts", m.config.init_restarts);
    m.design_column_names = j.at("design_column_names").get<std::vector<std::string>>();
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.formula = j.value("formula", std::string());
    m.converged = j.value("converged", false);
    m.rejected_final_step = j.value("rejected_final_step", false);
    m.hessian_fallbacks = j.value("hessian_fallbacks", 0);
    if (m.k < 2 || m.beta.rows() != m.k || static_cast<std::size_t>(m.beta.cols()) != m.vocabulary.size() ||
        m.eta.cols() != m.k - 1 || m.nu.size() != static_cast<std::size_t>(m.eta.rows()) ||
        m.doc_ids.size() != m.nu.size())
      throw FormatError("model archive has inconsistent dimensions");
    for (Eigen::Index k = 0; k < m.k; ++k)
      if (!(m.beta.row(k).array() > 0.0).all() || std::abs(m.beta.row(k).sum() - 1.0) > 1e-8)
        throw FormatError("beta row " + std::to_string(k) + " is not a probability distribution");
    m.theta.resize(m.eta.rows(), m.k);
    for (Eigen::Index d = 0; d < m.eta.rows(); ++d)
      m.theta.row(d) = softmax_with_reference(m.eta.row(d).transpose()).transpose();
    return m;
  });
}

std::string search_to_json(const ModelSearchResult& r) {
  Json j;
  Json cands = Json::array();
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const auto& c = r.candidates[i];
    cands.push_back(Json{{"k", c.k},
                         {"mean_coherence", c.mean_coherence},
                         {"mean_exclusivity", c.mean_exclusivity},
                         {"residual", r.residuals[i]},
                         {"fit_ref", c.fit_ref}});
  }
  j["candidates"] = std::move(cands);
  j["slope"] = r.slope;
  j["intercept"] = r.intercept;
  j["selected_k"] = r.selected_k;
  return j.dump(2) + "\n";
}

ModelSearchResult search_from_json(std::string_view text) {
  const Json j = parse(text);
  return guarded([&] {
    ModelSearchResult r;
    for (const auto& c : j.at("candidates")) {
      r.candidates.push_back(SearchCandidate{c.at("k").get<int>(), c.at("mean_coherence").get<double>(),
                                             c.at("mean_exclusivity").get<double>(), c.at("fit_ref").get<std::string>()});
      r.residuals.push_back(c.at("residual").get<double>());
    }
    r.slope = j.at("slope").get<double>();
    r.intercept = j.at("intercept").get<double>();
    r.selected_k = j.at("selected_k").get<int>();
    return r;
  });
}

std::string search_plot_tsv(const ModelSearchResult& r) {
  std::string out = "k\tcoherence\texclusivity\tresidual\n";
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const auto& c = r.candidates[i];
    out += std::to_string(c.k) + "\t" + num(c.mean_coherence) + "\t" + num(c.mean_exclusivity) + "\t" +
           num(r.residuals[i]) + "\n";
  }
  return out;
}

namespace {

Json ranked_to_json(const RankedTerms& terms) {
  Json out = Json::array();
  for (const auto& [t, v] : terms) out.push_back(Json::array({t, v}));
  return out;
}

const RankedTerms& metric_list(const TopicSummary& s, const std::string& metric) {
  if (metric == "prob") return s.top_prob;
  if (metric == "frex") return s.top_frex;
  if (metric == "lift") return s.top_lift;
  if (metric == "score") return s.top_score;
  throw InvalidArgument("unknown keyword metric '" + metric + "'");
}

}  // namespace

std::string summaries_to_json(const std::vector<TopicSummary>& summaries, const ModelQuality& q) {
  Json j;
  Json topics = Json::array();
  for (const auto& s : summaries) {
    topics.push_back(Json{{"topic_index", s.topic_index},
                          {"top_prob", ranked_to_json(s.top_prob)},
                          {"top_frex", ranked_to_json(s.top_frex)},
                          {"top_lift", ranked_to_json(s.top_lift)},
                          {"top_score", ranked_to_json(s.top_score)}});
  }
  j["topics"] = std::move(topics);
  j["quality"] = Json{{"k", q.k},
                      {"m_top_words", q.m_top_words},
                      {"coherence_per_topic", vector_to_json(q.coherence_per_topic)},
                      {"exclusivity_per_topic", vector_to_json(q.exclusivity_per_topic)},
                      {"mean_coherence", q.mean_coherence},
                      {"mean_exclusivity", q.mean_exclusivity}};
  return j.dump(2) + "\n";
}

std::string top_words_table(const std::vector<TopicSummary>& summaries, const std::string& metric) {
  std::size_t width = 0, rows = 0;
  for (const auto& s : summaries) {
    const auto& l = metric_list(s, metric);
    rows = std::max(rows, l.size());
    for (const auto& [t, v] : l) width = std::max(width, t.size());
  }
  width = std::max<std::size_t>(width, 9) + 2;
  std::ostringstream out;
  out << std::left << std::setw(6) << "rank";
  for (const auto& s : summaries) out << std::setw(static_cast<int>(width)) << ("Topic " + std::to_string(s.topic_index + 1));
  out << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    out << std::setw(6) << (r + 1);
    for (const auto& s : summaries) {
      const auto& l = metric_list(s, metric);
      out << std::setw(static_cast<int>(width)) << (r < l.size() ? l[r].first : "");
    }
    out << "\n";
  }
  return out.str();
}

std::string top_words_tsv(const std::vector<TopicSummary>& summaries) {
  std::string out = "topic\trank\tprob_term\tprob\tfrex_term\tfrex\tlift_term\tlift\tscore_term\tscore\n";
  for (const auto& s : summaries) {
    for (std::size_t r = 0; r < s.top_prob.size(); ++r) {
      out += std::to_string(s.topic_index + 1) + "\t" + std::to_string(r + 1);
      for (const RankedTerms* l : {&s.top_prob, &s.top_frex, &s.top_lift, &s.top_score})
        out += "\t" + (*l)[r].first + "\t" + num((*l)[r].second);
      out += "\n";
    }
  }
  return out;
}

std::string effects_to_json(const std::vector<EffectEstimate>& effects, const std::vector<ContrastEstimate>& contrasts) {
  Json j;
  Json es = Json::array();
  for (const auto& e : effects) {
    Json grid = Json::array();
    for (const auto& g : e.grid) grid.push_back(value_to_json(g));
    es.push_back(Json{{"topic_index", e.topic_index},
                      {"covariate", e.covariate},
                      {"n_draws", e.n_draws},
                      {"grid", std::move(grid)},
                      {"mean", vector_to_json(e.mean)},
                      {"ci_lower", vector_to_json(e.ci_lower)},
                      {"ci_upper", vector_to_json(e.ci_upper)}});
  }
  Json cs = Json::array();
  for (const auto& c : contrasts) {
    cs.push_back(Json{{"topic_index", c.topic_index},
                      {"covariate", c.covariate},
                      {"level_a", value_to_json(c.level_a)},
                      {"level_b", value_to_json(c.level_b)},
                      {"n_draws", c.n_draws},
                      {"point", c.point},
                      {"ci", Json::array({c.ci.first, c.ci.second})}});
  }
  j["effects"] = std::move(es);
  j["contrasts"] = std::move(cs);
  return j.dump(2) + "\n";
}

std::string effect_tsv(const EffectEstimate& e) {
  std::string out = "grid\tmean\tlo\thi\n";
  for (std::size_t g = 0; g < e.grid.size(); ++g) {
    const auto i = static_cast<Eigen::Index>(g);
    out += format_value(e.grid[g]) + "\t" + num(e.mean(i)) + "\t" + num(e.ci_lower(i)) + "\t" + num(e.ci_upper(i)) + "\n";
  }
  return out;
}

std::string contrasts_tsv(const std::vector<ContrastEstimate>& contrasts) {
  std::string out = "topic\tcovariate\tlevel_a\tlevel_b\tpoint\tlo\thi\n";
  for (const auto& c : contrasts)
    out += std::to_string(c.topic_index + 1) + "\t" + c.covariate + "\t" + format_value(c.level_a) + "\t" +
           format_value(c.level_b) + "\t" + num(c.point) + "\t" + num(c.ci.first) + "\t" + num(c.ci.second) + "\n";
  return out;
}

std::string contrasts_to_json(const std::vector<PerspectiveContrast>& contrasts) {
  Json out = Json::array();
  for (const auto& c : contrasts) {
    Json entries = Json::array();
    for (const auto& e : c.entries) entries.push_back(Json{{"term", e.term}, {"delta", e.delta}, {"size", e.size}});
    out.push_back(Json{{"topic_a", c.topic_a}, {"topic_b", c.topic_b}, {"entries", std::move(entries)}});
  }
  return out.dump(2) + "\n";
}

std::string graph_to_json(const TopicGraph& g) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) nodes.push_back(Json{{"id", g.nodes[i]}, {"label", g.labels[i]}});
  Json edges = Json::array();
  for (const auto& e : g.edges) edges.push_back(Json{{"i", e.i}, {"j", e.j}, {"correlation", e.correlation}});
  Json j{{"threshold", g.threshold}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  return j.dump(2) + "\n";
}

std::string clouds_to_json(const std::vector<std::pair<int, std::vector<std::pair<std::string, double>>>>& clouds) {
  Json out = Json::array();
  for (const auto& [topic, words] : clouds) {
    Json w = Json::array();
    for (const auto& [t, p] : words) w.push_back(Json{{"term", t}, {"probability", p}});
    out.push_back(Json{{"topic", topic}, {"words", std::move(w)}});
  }
  return out.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

}  // namespace agendascope::json
