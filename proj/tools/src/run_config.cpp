#include "run_config.hpp"

#include <json.hpp>
#include <unistd.h>

#include <algorithm>
#include <set>

#include "agendascope/serialize.hpp"

namespace agendascope::cli {

using Json = nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

// Reads typed fields out of one JSON object, recording problems instead of
// throwing so that every violation is reported together.
class Reader {
 public:
  Reader(const Json& obj, std::string where, std::vector<std::string>& violations)
      : obj_(obj), where_(std::move(where)), violations_(violations) {
    if (!obj_.is_object()) fail("", "must be an object");
  }

  bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key) && !obj_[key].is_null(); }
  const Json& raw(const std::string& key) const { return obj_[key]; }
  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void fail(const std::string& key, const std::string& what) { violations_.push_back(path(key) + " " + what); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const Json& v = obj_[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return fail(key, "must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return fail(key, "must be an integer");
      if (std::is_unsigned_v<T> && v.get<long long>() < 0) return fail(key, "must be non-negative");
      out = static_cast<T>(v.get<long long>());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return fail(key, "must be a number");
      out = v.get<double>();
    } else {
      if (!v.is_string()) return fail(key, "must be a string");
      out = v.get<std::string>();
    }
  }

  const Json* object(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    if (!obj_[key].is_object()) {
      fail(key, "must be an object");
      return nullptr;
    }
    return &obj_[key];
  }

  const Json* array(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    if (!obj_[key].is_array()) {
      fail(key, "must be an array");
      return nullptr;
    }
    return &obj_[key];
  }

  void mark(const std::string& key) { seen_.insert(key); }

  void reject_unknown() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!seen_.contains(key)) fail(key, "is not a recognized setting");
  }

 private:
  const Json& obj_;
  std::string where_;
  std::vector<std::string>& violations_;
  std::set<std::string> seen_;
};

std::vector<int> int_list(Reader& r, const std::string& key) {
  std::vector<int> out;
  const Json* a = r.array(key);
  if (!a) return out;
  for (const auto& v : *a) {
    if (!v.is_number_integer()) {
      r.fail(key, "must contain only integers");
      return {};
    }
    out.push_back(v.get<int>());
  }
  return out;
}

std::optional<CovariateValue> level(const Json& v) {
  if (v.is_string()) return CovariateValue(v.get<std::string>());
  if (v.is_boolean()) return CovariateValue(v.get<bool>() ? 1.0 : 0.0);
  if (v.is_number()) return CovariateValue(v.get<double>());
  return std::nullopt;
}

void apply_override(Json& root, const std::string& text, std::vector<std::string>& violations) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    violations.push_back("override '" + text + "' must look like key.path=value");
    return;
  }
  const std::string key = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  Json parsed = Json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object()) {
      violations.push_back("override '" + key + "' descends into a non-object");
      return;
    }
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

bool writable_location(const std::filesystem::path& dir) {
  std::filesystem::path p = std::filesystem::absolute(dir);
  while (!p.empty() && !std::filesystem::exists(p)) {
    if (p == p.parent_path()) break;
    p = p.parent_path();
  }
  return std::filesystem::is_directory(p) && ::access(p.c_str(), W_OK) == 0;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error("ConfigError", "invalid run configuration: " + join(violations)), violations_(std::move(violations)) {}

PreprocessConfig RunConfig::preprocess() const {
  PreprocessConfig p = PreprocessConfig::defaults();
  p.min_doc_freq = min_doc_freq;
  p.min_term_len = min_term_len;
  if (stopwords_file) p.stopwords = load_stopwords(*stopwords_file);
  return p;
}

FitConfig RunConfig::fit_config(int k_value, unsigned n_threads) const {
  FitConfig c;
  c.k = k_value;
  c.seed = seed;
  c.max_em_iters = max_em_iters;
  c.rel_tol = rel_tol;
  c.ridge_gamma = ridge_gamma;
  c.sigma_floor = sigma_floor;
  c.threads = n_threads;
  c.init = init;
  c.init_restarts = init_restarts;
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides) {
  std::vector<std::string> v;
  Json root = Json::parse(text, nullptr, false);
  if (root.is_discarded()) throw ConfigError({"config is not valid JSON"});
  if (!root.is_object()) throw ConfigError({"config must be a JSON object"});
  for (const auto& o : overrides) apply_override(root, o, v);

  RunConfig c;
  Reader top(root, "", v);

  std::string corpus_dir, metadata, output_dir, stopwords;
  if (const Json* paths = top.object("paths")) {
    Reader r(*paths, "paths", v);
    r.get("corpus_dir", corpus_dir);
    r.get("metadata", metadata);
    r.get("output_dir", output_dir);
    r.reject_unknown();
  }
  if (corpus_dir.empty()) v.push_back("paths.corpus_dir is required");
  if (metadata.empty()) v.push_back("paths.metadata is required");
  c.corpus_dir = resolve(base_dir, corpus_dir);
  c.metadata = resolve(base_dir, metadata);
  if (!output_dir.empty()) c.output_dir = resolve(base_dir, output_dir);

  if (const Json* pre = top.object("preprocess")) {
    Reader r(*pre, "preprocess", v);
    r.get("min_doc_freq", c.min_doc_freq);
    r.get("min_term_len", c.min_term_len);
    r.get("stopwords_file", stopwords);
    r.reject_unknown();
    if (c.min_doc_freq == 0) r.fail("min_doc_freq", "must be >= 1");
    if (!stopwords.empty()) c.stopwords_file = resolve(base_dir, stopwords);
  }

  if (const Json* fit = top.object("fit")) {
    Reader r(*fit, "fit", v);
    if (r.has("k")) {
      int k = 0;
      r.get("k", k);
      c.k = k;
    } else {
      r.mark("k");
    }
    if (r.has("k_grid") && r.raw("k_grid").is_object()) {
      r.mark("k_grid");
      Reader g(r.raw("k_grid"), "fit.k_grid", v);
      int from = 0, to = -1, by = 1;
      g.get("from", from);
      g.get("to", to);
      g.get("by", by);
      g.reject_unknown();
      if (by < 1) g.fail("by", "must be >= 1");
      else
        for (int k = from; k <= to; k += by) c.k_grid.push_back(k);
      if (c.k_grid.empty()) r.fail("k_grid", "range is empty");
    } else {
      c.k_grid = int_list(r, "k_grid");
      if (r.has("k_grid") && c.k_grid.empty()) r.fail("k_grid", "must not be empty");
    }
    r.get("max_em_iters", c.max_em_iters);
    r.get("rel_tol", c.rel_tol);
    r.get("candidate_rel_tol", c.candidate_rel_tol);
    r.get("ridge_gamma", c.ridge_gamma);
    r.get("sigma_floor", c.sigma_floor);
    r.get("init_restarts", c.init_restarts);
    std::string init = "cluster";
    r.get("init", init);
    if (init == "dirichlet") c.init = InitMethod::kDirichlet;
    else if (init != "cluster") r.fail("init", "must be \"cluster\" or \"dirichlet\"");
    r.reject_unknown();

    if (c.k && !c.k_grid.empty()) v.push_back("fit: exactly one of k and k_grid may be given, found both");
    if (c.k && *c.k < 2) r.fail("k", "must be >= 2");
    for (int k : c.k_grid)
      if (k < 2) {
        r.fail("k_grid", "values must be >= 2");
        break;
      }
    if (c.max_em_iters < 1) r.fail("max_em_iters", "must be >= 1");
    if (!(c.rel_tol > 0)) r.fail("rel_tol", "must be > 0");
    if (!(c.candidate_rel_tol > 0)) r.fail("candidate_rel_tol", "must be > 0");
    if (!(c.ridge_gamma >= 0)) r.fail("ridge_gamma", "must be >= 0");
    if (!(c.sigma_floor > 0)) r.fail("sigma_floor", "must be > 0");
    if (c.init_restarts < 1) r.fail("init_restarts", "must be >= 1");
  }
  if (!c.k && c.k_grid.empty()) v.push_back("fit: exactly one of k and k_grid must be given, found neither");
  std::sort(c.k_grid.begin(), c.k_grid.end());
  c.k_grid.erase(std::unique(c.k_grid.begin(), c.k_grid.end()), c.k_grid.end());

  top.get("formula", c.formula);
  if (c.formula.empty()) v.push_back("formula is required");

  if (const Json* m = top.object("metrics")) {
    Reader r(*m, "metrics", v);
    r.get("top_words", c.metrics_top_words);
    r.get("coherence_words", c.coherence_words);
    r.get("frex_w", c.frex_w);
    r.reject_unknown();
    if (c.metrics_top_words < 1) r.fail("top_words", "must be >= 1");
    if (c.coherence_words < 2) r.fail("coherence_words", "must be >= 2");
    if (!(c.frex_w >= 0 && c.frex_w <= 1)) r.fail("frex_w", "must lie in [0, 1]");
  }

  if (const Json* e = top.object("effects")) {
    Reader r(*e, "effects", v);
    r.get("n_draws", c.n_draws);
    r.get("average_over_observed", c.average_over_observed);
    if (c.n_draws < kMinDraws) r.fail("n_draws", "must be >= " + std::to_string(kMinDraws));
    if (const Json* targets = r.array("targets")) {
      for (std::size_t i = 0; i < targets->size(); ++i) {
        Reader t((*targets)[i], "effects.targets[" + std::to_string(i) + "]", v);
        EffectTarget et;
        t.get("covariate", et.covariate);
        et.topics = int_list(t, "topics");
        t.get("grid_points", et.grid_points);
        t.get("log_scale", et.log_scale);
        t.reject_unknown();
        if (et.covariate.empty()) t.fail("covariate", "is required");
        if (et.grid_points < 2) t.fail("grid_points", "must be >= 2");
        c.effects.push_back(std::move(et));
      }
    }
    if (const Json* contrasts = r.array("contrasts")) {
      for (std::size_t i = 0; i < contrasts->size(); ++i) {
        Reader t((*contrasts)[i], "effects.contrasts[" + std::to_string(i) + "]", v);
        ContrastTarget ct;
        t.get("covariate", ct.covariate);
        ct.topics = int_list(t, "topics");
        t.mark("level_a");
        t.mark("level_b");
        auto a = t.has("level_a") ? level(t.raw("level_a")) : std::nullopt;
        auto b = t.has("level_b") ? level(t.raw("level_b")) : std::nullopt;
        t.reject_unknown();
        if (ct.covariate.empty()) t.fail("covariate", "is required");
        if (!a) t.fail("level_a", "must be a number, boolean or string");
        if (!b) t.fail("level_b", "must be a number, boolean or string");
        if (a && b) {
          ct.level_a = *a;
          ct.level_b = *b;
        }
        c.contrasts.push_back(std::move(ct));
      }
    }
    r.reject_unknown();
  }

  if (const Json* rep = top.object("report")) {
    Reader r(*rep, "report", v);
    r.get("cloud_words", c.cloud_words);
    c.cloud_topics = int_list(r, "cloud_topics");
    r.get("contrast_words", c.contrast_words);
    if (const Json* pairs = r.array("contrast_pairs")) {
      for (const auto& p : *pairs) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
          r.fail("contrast_pairs", "entries must be [topic_a, topic_b] integer pairs");
          break;
        }
        c.contrast_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
    }
    r.get("graph_threshold", c.graph_threshold);
    std::string source = "theta";
    r.get("graph_source", source);
    if (source == "sigma") c.graph_source = CorrelationSource::kSigma;
    else if (source != "theta") r.fail("graph_source", "must be \"theta\" or \"sigma\"");
    r.reject_unknown();
    if (!(c.graph_threshold > -1 && c.graph_threshold < 1)) r.fail("graph_threshold", "must lie in (-1, 1)");
    if (c.cloud_words < 1) r.fail("cloud_words", "must be >= 1");
    if (c.contrast_words < 1) r.fail("contrast_words", "must be >= 1");
  }

  std::optional<long long> seed;
  if (top.has("seed")) {
    if (!root["seed"].is_number_integer()) top.fail("seed", "must be an integer");
    else seed = root["seed"].get<long long>();
  }
  top.mark("seed");
  if (seed) c.seed = static_cast<std::uint64_t>(*seed);
  top.get("deterministic", c.deterministic);
  if (top.has("threads")) {
    unsigned t = 0;
    top.get("threads", t);
    if (t == 0) top.fail("threads", "must be >= 1");
    else c.threads = t;
  } else {
    top.mark("threads");
  }
  top.reject_unknown();

  if (!writable_location(c.output_dir)) v.push_back("paths.output_dir '" + c.output_dir.string() + "' is not writable");

  if (!v.empty()) throw ConfigError(std::move(v));
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = json::read_file(path);
  } catch (const Error&) {
    throw ConfigError({"cannot read config file " + path.string()});
  }
  return parse_run_config(text, path.parent_path(), overrides);
}

}  // namespace agendascope::cli
