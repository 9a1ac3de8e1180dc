#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "test_support.hpp"
#include "clozefix/errors.hpp"
#include "clozefix/ngram_predictor.hpp"

using namespace clozefix;
using clozefix::testing::LineGenerator;
using clozefix::testing::ref_tokens;

TEST_CASE("reference predictor: worked example") {
  const std::vector<std::string> corpus = {"a b c", "a b d"};
  const auto model = NgramPredictor::train(corpus, {});
  const auto toks = ref_tokens("a b <mask>");
  const auto dist = model.predict({toks, 2, 2});
  REQUIRE(dist.candidates.size() == 2);
  CHECK(dist.candidates[0].token == "c");
  CHECK(dist.candidates[1].token == "d");
  CHECK(dist.candidates[0].logprob == dist.candidates[1].logprob);
  // Hand count: |V| = 4; left (a b) -> c:1 of 2, right (</s> </s>) -> c:1 of 2.
  // P(c) = 0.5 * 2/6 + 0.5 * 2/6 = 1/3.
  CHECK(dist.candidates[0].logprob == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-15));

  CHECK(model.predict({toks, 2, 1}).candidates.size() == 1);
  CHECK(model.score_token(toks, 2, "c") == dist.candidates[0].logprob);
}

TEST_CASE("reference predictor: errors") {
  NgramPredictor untrained;
  const auto toks = ref_tokens("a <mask>");
  CHECK_THROWS_AS(untrained.predict({toks, 1, 3}), EmptyVocabulary);
  CHECK_THROWS_AS(untrained.score_token(toks, 1, "a"), EmptyVocabulary);
  CHECK_THROWS_AS(NgramPredictor::train(std::vector<std::string>{}, {}), EmptyCorpus);

  const auto model = NgramPredictor::train(std::vector<std::string>{"x y"}, {});
  CHECK_THROWS_AS(model.predict({toks, 0, 3}), InvalidQuery);
  CHECK_THROWS_AS(model.predict({toks, 1, 0}), InvalidQuery);
}

TEST_CASE("reference predictor: vocabulary and order-insensitive state") {
  const auto single = NgramPredictor::train(std::vector<std::string>{"x y"}, {});
  CHECK(single.vocabulary() == std::vector<std::string>{"x", "y"});

  const std::vector<std::string> c1 = {"int a = 1;", "return a + b;", "if (a < b) {"};
  const std::vector<std::string> c2 = {"if (a < b) {", "int a = 1;", "return a + b;"};
  const auto m1 = NgramPredictor::train(c1, {});
  const auto m2 = NgramPredictor::train(c2, {});
  CHECK(m1.to_json() == m2.to_json());
  CHECK(m1.info().model == m2.info().model);
}

TEST_CASE("reference predictor: out-of-vocabulary target has a finite floor") {
  const auto model = NgramPredictor::train(std::vector<std::string>{"a b c"}, {});
  const auto toks = ref_tokens("a b <mask>");
  const double lp = model.score_token(toks, 2, "zzz");
  CHECK(std::isfinite(lp));
  CHECK(lp < model.score_token(toks, 2, "c"));
}

TEST_CASE("reference predictor: distribution sanity and coherence") {
  LineGenerator gen(4);
  std::vector<std::string> corpus;
  for (int i = 0; i < 100; ++i) corpus.push_back(gen.line());
  const auto model = NgramPredictor::train(corpus, {});
  const std::size_t V = model.vocabulary().size();
  for (int iter = 0; iter < 100; ++iter) {
    auto toks = ref_tokens(gen.line() + " " + gen.line());
    if (toks.empty()) continue;
    const auto pos = static_cast<std::size_t>(gen.pick(0, static_cast<int>(toks.size()) - 1));
    toks[pos] = {"<mask>", TokenKind::mask_sentinel};
    if (gen.pick(0, 1) && pos + 1 < toks.size()) toks[pos + 1] = {"<mask>", TokenKind::mask_sentinel};
    const auto dist = model.predict({toks, pos, V});
    REQUIRE(dist.candidates.size() == V);
    double total = 0.0;
    for (std::size_t i = 0; i < dist.candidates.size(); ++i) {
      total += std::exp(dist.candidates[i].logprob);
      CHECK(dist.candidates[i].logprob <= 0.0);
      CHECK(std::isfinite(dist.candidates[i].logprob));
      if (i > 0) {
        const auto& a = dist.candidates[i - 1];
        const auto& b = dist.candidates[i];
        CHECK((a.logprob > b.logprob || (a.logprob == b.logprob && a.token < b.token)));
      }
      CHECK(model.score_token(toks, pos, dist.candidates[i].token) == dist.candidates[i].logprob);
    }
    CHECK(total <= 1.0 + 1e-9);
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{25}}) {
      const auto top = model.predict({toks, pos, k});
      REQUIRE(top.candidates.size() == std::min(k, V));
      CHECK(std::equal(top.candidates.begin(), top.candidates.end(), dist.candidates.begin()));
    }
  }
}

TEST_CASE("reference predictor: save and load") {
  const auto model =
      NgramPredictor::train(std::vector<std::string>{"for (i = 0; i < n; i++) {", "x = y;"}, {});
  const auto path = std::filesystem::temp_directory_path() / "clozefix_ngram_test.json";
  model.save(path);
  const auto loaded = NgramPredictor::load(path, {});
  CHECK(loaded.to_json() == model.to_json());
  const auto toks = ref_tokens("i < <mask> ;");
  CHECK(loaded.predict({toks, 2, 5}) == model.predict({toks, 2, 5}));
  std::filesystem::remove(path);
}
