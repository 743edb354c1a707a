#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "agendascope/serialize.hpp"
#include "pipeline.hpp"

namespace {

using agendascope::cli::RunContext;

enum ExitCode { kOk = 0, kFailure = 1, kBadConfig = 2, kMissingArtifact = 3, kInternal = 4 };

void report_error(const std::string& kind, const std::string& message, const nlohmann::ordered_json& extra = {}) {
  nlohmann::ordered_json j{{"error", kind}, {"message", message}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::cerr << j.dump(2) << "\n";
}

std::optional<unsigned> env_threads() {
  const char* s = std::getenv("AGENDASCOPE_THREADS");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1) {
    std::cerr << "ignoring invalid AGENDASCOPE_THREADS='" << s << "'\n";
    return std::nullopt;
  }
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agendascope: structural topic models for speech corpora"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<long long> seed;
  std::optional<unsigned> threads;
  std::string out;
  bool deterministic = false;
  bool quiet = false;
  std::vector<std::string> sets;

  app.add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (default: AGENDASCOPE_THREADS, then config, then 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory (overrides paths.output_dir)");
  app.add_flag("--deterministic", deterministic, "Keep timings out of manifests so reruns are byte-identical");
  app.add_option("--set", sets, "Override a config value, e.g. --set fit.k=12")->take_all();
  app.add_flag("-q,--quiet", quiet, "No progress output");

  using Cmd = void (*)(RunContext&);
  const std::vector<std::tuple<const char*, const char*, Cmd>> commands = {
      {"ingest", "Tokenize speeches and join covariates into a corpus", agendascope::cli::cmd_ingest},
      {"search", "Fit every K of the grid and select by exclusivity/coherence residual", agendascope::cli::cmd_search},
      {"fit", "Fit the topic model at the configured or selected K", agendascope::cli::cmd_fit},
      {"metrics", "Top words by probability, FREX, lift and score; coherence", agendascope::cli::cmd_metrics},
      {"effects", "Covariate effects on topic prevalence by the method of composition", agendascope::cli::cmd_effects},
      {"report", "Topic graph, word clouds and perspective contrasts", agendascope::cli::cmd_report},
      {"all", "Run every stage in order", agendascope::cli::cmd_all},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> overrides = sets;
  if (seed) overrides.push_back("seed=" + std::to_string(*seed));
  if (deterministic) overrides.push_back("deterministic=true");
  // The output location and thread count do not change results, so they stay
  // out of the configuration hash.
  std::vector<std::string> all_overrides = overrides;
  if (!out.empty())
    all_overrides.push_back("paths.output_dir=" +
                            nlohmann::json(std::filesystem::absolute(out).lexically_normal().string()).dump());

  RunContext ctx;
  try {
    ctx.config = agendascope::cli::load_run_config(config_path, all_overrides);
    std::string hashed = agendascope::json::read_file(config_path);
    for (const auto& o : overrides) hashed += "\n" + o;
    ctx.config_sha256 = agendascope::cli::sha256_hex(hashed);
    if (threads) ctx.threads = *threads;
    else if (auto t = env_threads()) ctx.threads = *t;
    else if (ctx.config.threads) ctx.threads = *ctx.config.threads;
    if (!quiet) ctx.log = [](const std::string& line) { std::cerr << line << "\n"; };

    for (const auto& [name, help, fn] : commands)
      if (app.got_subcommand(name)) fn(ctx);
  } catch (const agendascope::cli::ConfigError& e) {
    report_error(e.kind(), e.what(), {{"violations", e.violations()}});
    return kBadConfig;
  } catch (const agendascope::cli::MissingArtifact& e) {
    report_error(e.kind(), e.what(), {{"stage", e.stage()}});
    return kMissingArtifact;
  } catch (const agendascope::MetadataParseError& e) {
    report_error(e.kind(), e.what(), {{"row", e.row()}});
    return kFailure;
  } catch (const agendascope::FormulaSyntaxError& e) {
    report_error(e.kind(), e.what(), {{"offset", e.offset()}});
    return kFailure;
  } catch (const agendascope::NonFiniteObjective& e) {
    report_error(e.kind(), e.what(), {{"iteration", e.iteration()}});
    return kFailure;
  } catch (const agendascope::Error& e) {
    report_error(e.kind(), e.what());
    return kFailure;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return kInternal;
  }
  return kOk;
}
