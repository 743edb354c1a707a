#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "agendascope/error.hpp"
#include "agendascope/serialize.hpp"
#include "agendascope/stm.hpp"
#include "support/synthetic.hpp"

using namespace agendascope;

namespace {

DocTerms single(std::int32_t term, std::int32_t count = 1) { return DocTerms{{term}, {count}}; }

// Objective of e_step_doc written out directly.
double objective(const Eigen::VectorXd& eta, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_inv,
                 const Eigen::MatrixXd& beta, const DocTerms& doc) {
  Eigen::VectorXd e(eta.size() + 1);
  e << eta, 0.0;
  const Eigen::VectorXd theta = e.array().exp() / e.array().exp().sum();
  double ll = 0.0;
  for (std::size_t j = 0; j < doc.terms.size(); ++j) ll += doc.counts[j] * std::log(theta.dot(beta.col(doc.terms[j])));
  const Eigen::VectorXd d = eta - mu;
  return -0.5 * d.dot(sigma_inv * d) + ll;
}

// Dense grid search refined around the best point, `levels` times.
Eigen::VectorXd grid_argmax(int dims, const std::function<double(const Eigen::VectorXd&)>& f) {
  Eigen::VectorXd center = Eigen::VectorXd::Zero(dims);
  double half = 8.0;
  const int n = dims == 1 ? 4001 : 201;
  for (int level = 0; level < 8; ++level) {
    Eigen::VectorXd best = center, x(dims);
    double best_val = -1e300;
    const double step = 2.0 * half / (n - 1);
    if (dims == 1) {
      for (int i = 0; i < n; ++i) {
        x(0) = center(0) - half + i * step;
        const double v = f(x);
        if (v > best_val) best_val = v, best = x;
      }
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          x << center(0) - half + i * step, center(1) - half + j * step;
          const double v = f(x);
          if (v > best_val) best_val = v, best = x;
        }
    }
    center = best;
    half = 4.0 * step;
  }
  return center;
}

struct TwoBlock {
  Corpus corpus;
  PrevalenceDesign design;
};

TwoBlock two_block(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int V = 20, D = 60;
  Corpus c;
  for (int v = 0; v < V; ++v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%02d", v);
    c.vocabulary.emplace_back(buf);
  }
  std::vector<double> x;
  for (int d = 0; d < D; ++d) {
    const int block = d % 2;
    std::vector<std::int32_t> counts(V, 0);
    std::uniform_int_distribution<int> word(0, 9);
    for (int i = 0; i < 40; ++i) ++counts[static_cast<std::size_t>(block * 10 + word(rng))];
    DocTerms dt;
    for (int v = 0; v < V; ++v)
      if (counts[static_cast<std::size_t>(v)]) {
        dt.terms.push_back(v);
        dt.counts.push_back(counts[static_cast<std::size_t>(v)]);
      }
    c.docs.push_back(dt);
    c.doc_ids.push_back("d" + std::to_string(d));
    x.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
  }
  CovariateTable t(c.doc_ids);
  CovariateColumn col{"x", ColumnKind::kNumeric, {}, {}};
  for (double v : x) col.numeric.emplace_back(v);
  t.add_column(std::move(col));
  c.covariates = t;
  TwoBlock out{c, build_design(parse_formula("x"), c.covariates)};
  return out;
}

void check_fit_invariants(const Corpus& corpus, const PrevalenceDesign& design, const FittedModel& m) {
  const auto K = static_cast<Eigen::Index>(m.k);
  for (Eigen::Index k = 0; k < K; ++k) {
    CHECK(std::abs(m.beta.row(k).sum() - 1.0) <= 1e-8);
    CHECK((m.beta.row(k).array() > 0).all());
  }
  for (Eigen::Index d = 0; d < m.theta.rows(); ++d) {
    CHECK(std::abs(m.theta.row(d).sum() - 1.0) <= 1e-8);
    CHECK(m.theta.row(d) == softmax_with_reference(m.eta.row(d).transpose()).transpose());
  }
  CHECK((m.sigma - m.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.sigma);
  CHECK(es.eigenvalues().minCoeff() >= m.config.sigma_floor * (1 - 1e-9));
  for (const auto& nu : m.nu) {
    CHECK((nu - nu.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(nu).eigenvalues().minCoeff() >= 0.0);
  }
  const auto& b = m.bound_trace;
  for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] >= b[i - 1] - 1e-6 * std::abs(b[i - 1]));
  for (std::size_t i = 10; i < b.size(); ++i) CHECK(b[i] >= b[i - 10]);

  const Eigen::MatrixXd log_beta = m.beta.array().log().matrix();
  const Eigen::MatrixXd sigma_inv = m.sigma.inverse();
  const Eigen::MatrixXd mu = design.X * m.gamma;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const DocPosterior p = e_step_doc(corpus.docs[d], mu.row(static_cast<Eigen::Index>(d)).transpose(), sigma_inv, log_beta);
    CHECK(std::abs(p.phi_sums.sum() - static_cast<double>(corpus.docs[d].total())) <= 1e-6);
  }
}

}  // namespace

TEST_CASE("FitConfig validation") {
  FitConfig c;
  c.k = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.k = 3;
  c.rel_tol = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.rel_tol = 1e-5;
  c.init_restarts = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.init_restarts = 1;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("init_params") {
  const auto tb = two_block(1);
  FitConfig c;
  c.k = 4;
  c.seed = 99;
  const auto a = init_params(tb.corpus, c);
  const auto b = init_params(tb.corpus, c);
  CHECK(a.beta == b.beta);
  c.seed = 100;
  CHECK(init_params(tb.corpus, c).beta != a.beta);
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(a.beta.row(k).sum() - 1.0) <= 1e-12);
  CHECK((a.beta.array() > 0).all());
  CHECK(a.eta.isZero(0.0));
  CHECK(a.eta.rows() == 60);
  c.k = 21;
  CHECK_THROWS_AS(init_params(tb.corpus, c), KExceedsVocabulary);
}

TEST_CASE("e_step_doc") {
  SUBCASE("identical topic rows leave the prior mean in place") {
    Eigen::MatrixXd beta(2, 3);
    beta << 0.2, 0.3, 0.5, 0.2, 0.3, 0.5;
    Eigen::VectorXd mu(1);
    mu << 0.7;
    const Eigen::MatrixXd sinv = Eigen::MatrixXd::Identity(1, 1) * 2.0;
    const DocTerms doc{{0, 2}, {3, 1}};
    const auto p = e_step_doc(doc, mu, sinv, beta.array().log().matrix());
    CHECK(std::abs(p.eta(0) - 0.7) <= 1e-10);
    CHECK(p.nu(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("a very tight prior pins eta to mu") {
    Eigen::MatrixXd beta(3, 3);
    beta << 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8;
    Eigen::VectorXd mu(2);
    mu << -0.3, 1.1;
    const Eigen::MatrixXd sinv = Eigen::MatrixXd::Identity(2, 2) * 1e10;
    const auto p = e_step_doc(DocTerms{{0, 1, 2}, {5, 1, 9}}, mu, sinv, beta.array().log().matrix());
    CHECK((p.eta - mu).cwiseAbs().maxCoeff() <= 1e-7);
  }
  SUBCASE("single-token mode matches a dense grid search") {
    Eigen::MatrixXd beta2(2, 3);
    beta2 << 0.6, 0.3, 0.1, 0.1, 0.2, 0.7;
    Eigen::VectorXd mu1(1);
    mu1 << 0.25;
    const Eigen::MatrixXd s1 = Eigen::MatrixXd::Identity(1, 1) * 0.8;
    const DocTerms doc = single(2);
    const auto p1 = e_step_doc(doc, mu1, s1, beta2.array().log().matrix());
    const auto g1 = grid_argmax(1, [&](const Eigen::VectorXd& e) { return objective(e, mu1, s1, beta2, doc); });
    CHECK(std::abs(p1.eta(0) - g1(0)) <= 1e-4);

    Eigen::MatrixXd beta3(3, 3);
    beta3 << 0.5, 0.3, 0.2, 0.1, 0.1, 0.8, 0.3, 0.4, 0.3;
    Eigen::VectorXd mu2(2);
    mu2 << -0.2, 0.4;
    Eigen::MatrixXd s2(2, 2);
    s2 << 1.5, 0.4, 0.4, 0.9;
    for (std::int32_t v = 0; v < 3; ++v) {
      const DocTerms dv = single(v);
      const auto p = e_step_doc(dv, mu2, s2, beta3.array().log().matrix());
      const auto g = grid_argmax(2, [&](const Eigen::VectorXd& e) { return objective(e, mu2, s2, beta3, dv); });
      CHECK((p.eta - g).cwiseAbs().maxCoeff() <= 1e-4);
    }
  }
  SUBCASE("nu inverts the finite-difference Hessian and phi conserves counts") {
    Eigen::MatrixXd beta(3, 4);
    beta << 0.4, 0.3, 0.2, 0.1, 0.1, 0.1, 0.4, 0.4, 0.25, 0.25, 0.25, 0.25;
    Eigen::VectorXd mu(2);
    mu << 0.1, -0.5;
    Eigen::MatrixXd s(2, 2);
    s << 0.7, 0.1, 0.1, 0.5;
    const DocTerms doc{{0, 1, 3}, {4, 2, 7}};
    const auto p = e_step_doc(doc, mu, s, beta.array().log().matrix());
    const double h = 1e-4;
    Eigen::MatrixXd hess(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Eigen::VectorXd ei = Eigen::VectorXd::Unit(2, i) * h, ej = Eigen::VectorXd::Unit(2, j) * h;
        hess(i, j) = (objective(p.eta + ei + ej, mu, s, beta, doc) - objective(p.eta + ei - ej, mu, s, beta, doc) -
                      objective(p.eta - ei + ej, mu, s, beta, doc) + objective(p.eta - ei - ej, mu, s, beta, doc)) /
                     (4 * h * h);
      }
    CHECK((p.nu - (-hess).inverse()).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(std::abs(p.phi_sums.sum() - 13.0) <= 1e-10);
    CHECK_FALSE(p.hessian_fallback);
  }
  SUBCASE("bad inputs") {
    const Eigen::MatrixXd lb = Eigen::MatrixXd::Constant(2, 3, std::log(1.0 / 3));
    CHECK_THROWS_AS(e_step_doc(DocTerms{}, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), lb),
                    InvalidArgument);
    CHECK_THROWS_AS(e_step_doc(single(0), Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(1, 1), lb),
                    DimensionMismatch);
  }
}

TEST_CASE("m_step") {
  FitConfig cfg;
  cfg.k = 2;

  SUBCASE("equal etas with an intercept-only design") {
    std::vector<DocPosterior> post(4);
    for (auto& p : post) {
      p.eta = Eigen::VectorXd::Constant(2, 0.0);
      p.eta << 0.3, -1.2;
      p.nu = Eigen::MatrixXd::Identity(2, 2) * 0.25;
    }
    const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
    const auto r = m_step(post, Eigen::MatrixXd::Ones(3, 5), X, cfg);
    CHECK(std::abs(r.gamma(0, 0) - 0.3) <= 1e-12);
    CHECK(std::abs(r.gamma(0, 1) + 1.2) <= 1e-12);
    CHECK((r.sigma - Eigen::MatrixXd::Identity(2, 2) * 0.25).cwiseAbs().maxCoeff() <= 1e-12);
    for (auto& p : post) p.nu.setZero();
    const auto r0 = m_step(post, Eigen::MatrixXd::Ones(3, 5), X, cfg);
    CHECK((r0.sigma - Eigen::MatrixXd::Identity(2, 2) * cfg.sigma_floor).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("closed-form ridge on three documents") {
    const double a = 0.5, b = -1.0, c = 2.0, e1 = 0.3, e2 = -0.4, e3 = 1.1, lambda = 0.7;
    std::vector<DocPosterior> post(3);
    const double etas[] = {e1, e2, e3};
    for (int i = 0; i < 3; ++i) {
      post[static_cast<std::size_t>(i)].eta = Eigen::VectorXd::Constant(1, etas[i]);
      post[static_cast<std::size_t>(i)].nu = Eigen::MatrixXd::Constant(1, 1, 0.1 * (i + 1));
    }
    Eigen::MatrixXd X(3, 2);
    X << 1, a, 1, b, 1, c;
    cfg.ridge_gamma = lambda;
    const auto r = m_step(post, Eigen::MatrixXd::Ones(2, 4), X, cfg);
    // [[3, sx], [sx, sxx + lambda]]^-1 [se, sxe]
    const double sx = a + b + c, sxx = a * a + b * b + c * c, se = e1 + e2 + e3, sxe = a * e1 + b * e2 + c * e3;
    const double det = 3 * (sxx + lambda) - sx * sx;
    const double g0 = ((sxx + lambda) * se - sx * sxe) / det;
    const double g1 = (3 * sxe - sx * se) / det;
    CHECK(std::abs(r.gamma(0, 0) - g0) <= 1e-10);
    CHECK(std::abs(r.gamma(1, 0) - g1) <= 1e-10);
    double rss = 0.0;
    for (int i = 0; i < 3; ++i) rss += std::pow(etas[i] - g0 - g1 * X(i, 1), 2);
    CHECK(std::abs(r.sigma(0, 0) - (rss + 0.6) / 3.0) <= 1e-12);
  }
  SUBCASE("infinite ridge shrinks slopes to zero") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    std::vector<DocPosterior> post(30);
    Eigen::MatrixXd X(30, 3);
    for (int i = 0; i < 30; ++i) {
      X.row(i) << 1.0, n01(rng), n01(rng);
      post[static_cast<std::size_t>(i)].eta = Eigen::VectorXd::NullaryExpr(2, [&] { return n01(rng); });
      post[static_cast<std::size_t>(i)].nu = Eigen::MatrixXd::Identity(2, 2);
    }
    cfg.ridge_gamma = 1e14;
    const auto r = m_step(post, Eigen::MatrixXd::Ones(3, 4), X, cfg);
    CHECK(r.gamma.bottomRows(2).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("beta normalizes expected counts with a floor") {
    std::vector<DocPosterior> post(3);
    for (auto& p : post) {
      p.eta = Eigen::VectorXd::Zero(1);
      p.nu = Eigen::MatrixXd::Identity(1, 1);
    }
    Eigen::MatrixXd counts(2, 3);
    counts << 1, 3, 0, 2, 2, 4;
    const auto r = m_step(post, counts, Eigen::MatrixXd::Ones(3, 1), cfg);
    CHECK(r.beta(0, 1) == doctest::Approx(0.75));
    CHECK(r.beta(0, 2) > 0.0);
    CHECK(r.beta(1, 2) == doctest::Approx(0.5));
  }
  SUBCASE("collinear design without ridge") {
    std::vector<DocPosterior> post(4);
    for (auto& p : post) {
      p.eta = Eigen::VectorXd::Zero(1);
      p.nu = Eigen::MatrixXd::Identity(1, 1);
    }
    Eigen::MatrixXd X(4, 3);
    X << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
    cfg.ridge_gamma = 0.0;
    CHECK_THROWS_AS(m_step(post, Eigen::MatrixXd::Ones(2, 2), X, cfg), SingularDesign);
  }
}

TEST_CASE("two disjoint vocabularies separate into two topics") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto tb = two_block(seed);
    FitConfig c;
    c.k = 2;
    c.seed = seed;
    const auto m = fit(tb.corpus, tb.design, c);
    const double a0 = m.beta.row(0).head(10).sum(), a1 = m.beta.row(1).head(10).sum();
    CHECK(std::max(a0, 1 - a0) >= 0.95);
    CHECK(std::max(a1, 1 - a1) >= 0.95);
    CHECK((a0 > 0.5) != (a1 > 0.5));
    check_fit_invariants(tb.corpus, tb.design, m);
  }
}

TEST_CASE("design problems are rejected") {
  auto tb = two_block(1);
  FitConfig c;
  c.k = 2;
  PrevalenceDesign constant = tb.design;
  constant.X.col(1).setConstant(0.5);
  CHECK_THROWS_AS(fit(tb.corpus, constant, c), DimensionMismatch);
  PrevalenceDesign short_design = tb.design;
  short_design.X.conservativeResize(10, Eigen::NoChange);
  short_design.row_ids.resize(10);
  CHECK_THROWS_AS(fit(tb.corpus, short_design, c), DimensionMismatch);
  PrevalenceDesign no_intercept = tb.design;
  no_intercept.X.col(0).setConstant(2.0);
  CHECK_THROWS_AS(fit(tb.corpus, no_intercept, c), DimensionMismatch);
}

TEST_CASE("fits satisfy the model invariants") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    testing::SyntheticSpec spec;
    spec.docs = 120;
    spec.vocab = 80;
    spec.topics = 3 + static_cast<int>(seed % 2);
    spec.min_len = 30;
    spec.max_len = 60;
    spec.seed = seed;
    const auto data = testing::generate(spec);
    const auto design = build_design(parse_formula("treat"), data.corpus.covariates);
    FitConfig c;
    c.k = spec.topics;
    c.seed = seed;
    c.init = seed % 2 ? InitMethod::kClusterSeeded : InitMethod::kDirichlet;
    const auto m = fit(data.corpus, design, c);
    CHECK(m.bound_trace.size() >= 2);
    check_fit_invariants(data.corpus, design, m);
  }
}

TEST_CASE("fits are reproducible and independent of the thread count") {
  testing::SyntheticSpec spec;
  spec.docs = 100;
  spec.vocab = 60;
  spec.topics = 3;
  spec.min_len = 20;
  spec.max_len = 40;
  const auto data = testing::generate(spec);
  const auto design = build_design(parse_formula("treat"), data.corpus.covariates);
  FitConfig c;
  c.k = 3;
  c.seed = 5;
  const std::string one = json::model_to_json(fit(data.corpus, design, c));
  CHECK(json::model_to_json(fit(data.corpus, design, c)) == one);
  c.threads = 4;
  CHECK(json::model_to_json(fit(data.corpus, design, c)) == one);
  c.threads = 1;
  c.seed = 6;
  CHECK(json::model_to_json(fit(data.corpus, design, c)) != one);
}

TEST_CASE("restarts keep the best final bound") {
  testing::SyntheticSpec spec;
  spec.docs = 100;
  spec.vocab = 60;
  spec.topics = 4;
  spec.min_len = 20;
  spec.max_len = 40;
  spec.seed = 8;
  const auto data = testing::generate(spec);
  const auto design = build_design(parse_formula("treat"), data.corpus.covariates);
  FitConfig c;
  c.k = 4;
  c.seed = 2;
  const auto single_start = fit(data.corpus, design, c);
  c.init_restarts = 3;
  const auto best = fit(data.corpus, design, c);
  CHECK(best.bound_trace.back() >= single_start.bound_trace.back());
  CHECK(best.config.seed == 2);
}

TEST_CASE("max_em_iters caps the trace") {
  const auto tb = two_block(4);
  FitConfig c;
  c.k = 3;
  c.max_em_iters = 3;
  const auto m = fit(tb.corpus, tb.design, c);
  CHECK(m.bound_trace.size() == 3);
  CHECK_FALSE(m.converged);
}
