#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "agendascope/effects.hpp"
#include "agendascope/metrics.hpp"
#include "agendascope/stm.hpp"
#include "agendascope/text.hpp"
#include "support/synthetic.hpp"

using namespace agendascope;

namespace {

const testing::SyntheticData& corpus_for(int topics) {
  static std::map<int, testing::SyntheticData> cache;
  auto it = cache.find(topics);
  if (it == cache.end()) {
    testing::SyntheticSpec spec;
    spec.topics = topics;
    it = cache.emplace(topics, testing::generate(spec)).first;
  }
  return it->second;
}

void BM_EStepDoc(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto& data = corpus_for(K);
  const Eigen::MatrixXd log_beta = data.beta.array().log().matrix();
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(K - 1);
  const Eigen::MatrixXd sigma_inv = Eigen::MatrixXd::Identity(K - 1, K - 1);
  std::size_t d = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(e_step_doc(data.corpus.docs[d], mu, sigma_inv, log_beta));
    d = (d + 1) % data.corpus.num_docs();
  }
}
BENCHMARK(BM_EStepDoc)->Arg(5)->Arg(20)->Arg(50);

void BM_EmIteration(benchmark::State& state) {
  const auto& data = corpus_for(5);
  const auto design = build_design(parse_formula("treat"), data.corpus.covariates);
  FitConfig c;
  c.k = 5;
  c.max_em_iters = 1;
  c.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit(data.corpus, design, c));
}
BENCHMARK(BM_EmIteration)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_FullFit(benchmark::State& state) {
  const auto& data = corpus_for(5);
  const auto design = build_design(parse_formula("treat"), data.corpus.covariates);
  FitConfig c;
  c.k = 5;
  for (auto _ : state) benchmark::DoNotOptimize(fit(data.corpus, design, c));
}
BENCHMARK(BM_FullFit)->Unit(benchmark::kMillisecond);

void BM_Coherence(benchmark::State& state) {
  const auto& data = corpus_for(20);
  for (auto _ : state) benchmark::DoNotOptimize(semantic_coherence(data.beta, data.corpus, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Coherence)->Arg(10)->Arg(20);

void BM_Frex(benchmark::State& state) {
  const auto& data = corpus_for(20);
  for (auto _ : state) benchmark::DoNotOptimize(exclusivity_frex(data.beta));
}
BENCHMARK(BM_Frex);

void BM_Contrast(benchmark::State& state) {
  const auto& data = corpus_for(5);
  const auto f = parse_formula("treat");
  static const FittedModel model = [&] {
    FitConfig c;
    c.k = 5;
    return fit(data.corpus, build_design(f, data.corpus.covariates), c);
  }();
  EffectOptions opt;
  opt.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_contrast(model, f, data.corpus.covariates, 0, "treat", 1.0, 0.0, 500, 1, opt));
}
BENCHMARK(BM_Contrast)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> words = {"development", "security", "nations", "peacekeeping", "the", "climate",
                                          "Governments", "rights", "multilateral", "cooperation", "2015", "don't"};
  std::string text;
  for (int i = 0; i < 3000; ++i) text += words[rng() % words.size()] + (i % 12 ? " " : ". ");
  PreprocessConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text, cfg));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize);

}  // namespace

BENCHMARK_MAIN();
