#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace agendascope::cli {

// An upstream stage has not written its artifact yet.
class MissingArtifact : public Error {
 public:
  MissingArtifact(std::string stage, const std::filesystem::path& path)
      : Error("MissingArtifact", "missing artifact of stage '" + stage + "': " + path.string()),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RunContext {
  RunConfig config;
  unsigned threads = 1;
  std::string config_sha256;  // config file bytes plus result-affecting overrides
  std::function<void(const std::string&)> log = [](const std::string&) {};
};

// Each stage reads its upstream artifacts from config.output_dir, writes its
// own files under output_dir/<stage>/ plus manifest.json listing inputs and
// outputs with SHA-256 hashes. In deterministic mode wall-clock timings go to
// timings.json instead of the manifest, so reruns are byte-identical.
void cmd_ingest(RunContext& ctx);
void cmd_search(RunContext& ctx);
void cmd_fit(RunContext& ctx);
void cmd_metrics(RunContext& ctx);
void cmd_effects(RunContext& ctx);
void cmd_report(RunContext& ctx);
// ingest, search (only with a k grid), fit, metrics, effects, report.
void cmd_all(RunContext& ctx);

std::string sha256_hex(std::string_view bytes);

}  // namespace agendascope::cli
