#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "titleeval/entity.hpp"

namespace titleeval {
namespace {

EntityMention mention(const std::string& surface) { return EntityMention(surface, 0, 1); }

AnnotatedField with_entities(const std::string& text, const std::vector<std::string>& surfaces) {
  AnnotatedField f;
  f.raw_text = text;
  f.tokens = tokenize(text);
  std::vector<EntityMention> es;
  for (const auto& s : surfaces) es.push_back(mention(s));
  f.entities = es;
  return f;
}

WordSet words(std::initializer_list<const char*> ws) {
  WordSet out;
  for (const char* w : ws) out.insert(w);
  return out;
}

TEST(EntityMatch, PartialWordRule) {
  EXPECT_TRUE(entity_match(mention("Graph Neural Network"), words({"the", "network"})));
  EXPECT_FALSE(entity_match(mention("LoRA"), words({"lorax"})));
  EXPECT_TRUE(entity_match(mention("LoRA"), words({"lora"})));
}

TEST(EntityMatch, StopwordFlag) {
  auto e = mention("Journal of Physics");
  EXPECT_TRUE(entity_match(e, words({"of"})));
  EXPECT_FALSE(entity_match(e, words({"of"}), {true}));
}

TEST(EntityMention, WordsFromSurface) {
  EXPECT_EQ(mention("BERT-based (NER)").words, (std::vector<std::string>{"bert-based", "ner"}));
  EXPECT_THROW(mention("--"), Error);
  EXPECT_THROW(EntityMention("x", 2, 2), Error);
}

TEST(Intersect, NonUniqueAndUnique) {
  std::vector<EntityMention> x = {mention("A"), mention("A"), mention("B")};
  auto y = words({"a"});
  EXPECT_EQ(intersect_nonunique(x, y), 2u);
  EXPECT_EQ(intersect_unique(x, y), 1u);
  EXPECT_EQ(intersect_nonunique({}, y), 0u);
  std::vector<EntityMention> distinct = {mention("a"), mention("b c"), mention("d")};
  EXPECT_EQ(intersect_unique(distinct, words({"a", "c", "d"})), 3u);
  EXPECT_EQ(intersect_unique({mention("q"), mention("q")}, y), 0u);
}

TEST(EntityScores, SourcePrecision) {
  auto h = with_entities("A and B", {"A", "B"});
  auto t = with_entities("A", {"A"});
  auto s = with_entities("we study A here", {});
  auto sc = entity_scores(h, t, s);
  EXPECT_DOUBLE_EQ(*sc.prec_s_nu, 0.5);
  EXPECT_DOUBLE_EQ(*sc.prec_s_u, 0.5);
}

TEST(EntityScores, CountingModesDiffer) {
  auto h = with_entities("A A B", {"A", "A", "B"});
  auto t = with_entities("A", {"A"});
  auto s = with_entities("A B", {"A", "B"});
  auto sc = entity_scores(h, t, s);
  EXPECT_DOUBLE_EQ(*sc.prec_t_nu, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*sc.prec_t_u, 0.5);
  EXPECT_DOUBLE_EQ(*sc.recall_t_nu, 1.0);
  EXPECT_DOUBLE_EQ(*sc.recall_t_u, 1.0);
  EXPECT_NEAR(*sc.f1_t_nu, 0.8, 1e-15);
  EXPECT_NEAR(*sc.f1_t_u, 2.0 / 3.0, 1e-15);
}

TEST(EntityScores, IdentityIsPerfect) {
  auto h = with_entities("Graph Neural Networks on CORA", {"Graph Neural Networks", "CORA"});
  auto s = with_entities("graph neural networks tested on cora", {});
  auto sc = entity_scores(h, h, s);
  for (const auto& v : sc.as_array()) EXPECT_EQ(v, 1.0);
}

TEST(EntityScores, UndefinedAndZero) {
  auto none = with_entities("x", {});
  auto a = with_entities("A", {"A"});
  auto b = with_entities("B", {"B"});
  auto src = with_entities("c", {});
  auto sc = entity_scores(none, a, src);
  EXPECT_FALSE(sc.prec_s_nu);
  EXPECT_FALSE(sc.prec_t_nu);
  EXPECT_EQ(sc.recall_t_nu, 0.0);
  EXPECT_FALSE(sc.f1_t_nu);

  sc = entity_scores(a, b, src);
  EXPECT_EQ(sc.prec_t_nu, 0.0);
  EXPECT_EQ(sc.recall_t_nu, 0.0);
  EXPECT_EQ(sc.f1_t_nu, 0.0);
}

TEST(EntityScores, MissingAnnotationNamesField) {
  auto a = with_entities("A", {"A"});
  AnnotatedField bare;
  bare.raw_text = "A";
  bare.tokens = tokenize("A");
  for (int which = 0; which < 3; ++which) {
    try {
      entity_scores(which == 0 ? bare : a, which == 1 ? bare : a, which == 2 ? bare : a);
      FAIL();
    } catch (const Error& e) {
      const char* name[] = {"hypothesis", "reference_title", "abstract"};
      EXPECT_NE(std::string(e.what()).find(name[which]), std::string::npos) << e.what();
    }
  }
}

AnnotatedField to_field(const std::vector<oracle::Mention>& ms) {
  AnnotatedField f;
  std::vector<EntityMention> es;
  for (const auto& m : ms) {
    std::string surface;
    for (const auto& w : m.words) surface += (surface.empty() ? "" : " ") + w;
    es.emplace_back(surface, 0, 1);
  }
  f.entities = es;
  return f;
}

EntityScores run(const oracle::EntityInstance& inst) {
  AnnotatedField s;
  TokenizedText tt;
  tt.tokens = inst.source;
  s.tokens = tt;
  s.entities = std::vector<EntityMention>{};
  return entity_scores(to_field(inst.h), to_field(inst.t), s);
}

TEST(EntityScores, MatchesBruteForce) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    auto inst = oracle::random_entity_instance(rng, true);
    auto got = run(inst).as_array();
    auto want = oracle::entity_scores(inst.h, inst.t, inst.source);
    for (std::size_t k = 0; k < EntityScores::kCount; ++k) {
      ASSERT_EQ(got[k], want.v[k]) << EntityScores::kNames[k] << " trial " << trial;
      if (got[k]) {
        EXPECT_GE(*got[k], 0.0);
        EXPECT_LE(*got[k], 1.0);
      }
    }
  }
}

TEST(EntityScores, DuplicateFreeMeansModesAgree) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 300; ++trial) {
    auto sc = run(oracle::random_entity_instance(rng, false));
    EXPECT_EQ(sc.prec_s_nu, sc.prec_s_u);
    EXPECT_EQ(sc.prec_t_nu, sc.prec_t_u);
    EXPECT_EQ(sc.recall_t_nu, sc.recall_t_u);
    EXPECT_EQ(sc.f1_t_nu, sc.f1_t_u);
  }
}

TEST(EntityScores, SourceSaturation) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = oracle::random_entity_instance(rng, true);
    if (inst.h.empty()) continue;
    // Put one word of every hypothesis mention into the source.
    for (const auto& m : inst.h) inst.source.push_back(m.words.back());
    auto sc = run(inst);
    EXPECT_EQ(sc.prec_s_nu, 1.0);
    EXPECT_EQ(sc.prec_s_u, 1.0);
  }
}

TEST(Aggregate, Examples) {
  EntityScores a, b;
  a.prec_s_nu = 1.0;
  b.prec_s_nu = 0.5;
  auto agg = aggregate_entity_scores({a, b});
  EXPECT_DOUBLE_EQ(*agg.means[0], 75.0);
  EXPECT_EQ(agg.skipped[0], 0u);
  EXPECT_FALSE(agg.means[1]);
  EXPECT_EQ(agg.skipped[1], 2u);

  EntityScores undefined, one;
  one.prec_t_nu = 1.0;
  agg = aggregate_entity_scores({undefined, one});
  EXPECT_DOUBLE_EQ(*agg.means[2], 100.0);
  EXPECT_EQ(agg.skipped[2], 1u);

  EXPECT_THROW(aggregate_entity_scores({}), Error);
}

TEST(Aggregate, OrderIndependent) {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EntityScores> recs(50);
  for (auto& r : recs) {
    r.prec_s_nu = u(rng);
    if (u(rng) < 0.7) r.prec_t_u = u(rng);
  }
  auto base = aggregate_entity_scores(recs);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(recs.begin(), recs.end(), rng);
    auto again = aggregate_entity_scores(recs);
    EXPECT_EQ(again.means, base.means);
    EXPECT_EQ(again.skipped, base.skipped);
  }
}

TEST(HeuristicEntities, CapitalizedRuns) {
  std::string text = "Fine-Tuning PEGASUS and GPT for the ACL Anthology titles";
  auto tokens = tokenize(text);
  auto es = heuristic_entities(text, tokens);
  ASSERT_EQ(es.size(), 3u);
  EXPECT_EQ(es[0].surface, "Fine-Tuning PEGASUS");
  EXPECT_EQ(es[1].surface, "GPT");
  EXPECT_EQ(es[2].surface, "ACL Anthology");
  EXPECT_EQ(es[2].token_start, 6u);
  EXPECT_EQ(es[2].token_end, 8u);
  EXPECT_TRUE(heuristic_entities("all lower case", tokenize("all lower case")).empty());
}

}  // namespace
}  // namespace titleeval
