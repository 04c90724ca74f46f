#include <gtest/gtest.h>

#include <algorithm>

#include "coseg/corpus/characters.hpp"
#include "coseg/corpus/story.hpp"
#include "coseg/error.hpp"
#include "coseg/extraction/experience.hpp"
#include "test_support.hpp"

using namespace coseg;
using namespace coseg::extraction;
using coseg::testing::clause;
using coseg::testing::sentence;

namespace {

corpus::Story accident() {
  auto s = corpus::load_stories_jsonl(coseg::testing::fixture("accident_story.jsonl")).at(0);
  corpus::annotate_characters(s);
  return s;
}

using Words = std::vector<std::string>;

}  // namespace

TEST(Extraction, DiscountStoreGolden) {
  const auto exp = extract_experience(coseg::testing::discount_store_sentence(), 0);
  EXPECT_EQ(exp.merged(), (Words{"knew", "discount", "store", "sold", "socks", "OBJ", "knew", "store", "She"}));
  EXPECT_EQ(exp.context_words, (Words{"knew", "discount", "store", "sold", "socks"}));
  EXPECT_EQ(exp.entity_words, (Words{"knew", "store", "She"}));
}

TEST(Extraction, NoObject) {
  const auto s = sentence({{"Tom", "Tom", "PROPN", 2, "nsubj"}, {"slept", "sleep", "VERB", 0, "root"},
                           {".", ".", "PUNCT", 2, "punct"}});
  const auto exp = extract_experience(s, 0);
  EXPECT_EQ(exp.entity_words, (Words{"slept", "Tom"}));
  EXPECT_EQ(exp.merged(), (Words{"slept", "OBJ", "slept", "Tom"}));
}

TEST(Extraction, RootCharacterIsMalformed) {
  const auto s = sentence({{"Tom", "Tom", "PROPN", 0, "root"}});
  EXPECT_THROW(extract_experience(s, 0), InputError);
}

TEST(Extraction, ObjectPreference) {
  // "Ann gave Bob a book that ..." : obj wins over iobj.
  auto s = sentence({{"Ann", "Ann", "PROPN", 2, "nsubj"}, {"gave", "give", "VERB", 0, "root"},
                     {"Bob", "Bob", "PROPN", 2, "iobj"}, {"a", "a", "DET", 5, "det"},
                     {"book", "book", "NOUN", 2, "obj"}});
  EXPECT_EQ(object_of(s, 1), std::optional<std::size_t>(4));
  s.tokens[4].deprel = "obl";
  EXPECT_EQ(object_of(s, 1), std::optional<std::size_t>(2));
  s.tokens[2].deprel = "obl";
  EXPECT_EQ(object_of(s, 1), std::nullopt);
}

TEST(Extraction, OpenClassWordsOnlyAndObjOnce) {
  // Every produced experience carries OBJ exactly once and the character
  // surface form in its entity part.
  const auto story = accident();
  for (const auto& seq : build_experience_sequences(story)) {
    for (const auto& e : seq.experiences) {
      const auto m = e.merged();
      EXPECT_EQ(std::count(m.begin(), m.end(), "OBJ"), 1);
      EXPECT_FALSE(e.entity_words.empty());
      const auto& surfaces = seq.character.mentions;
      EXPECT_TRUE(std::any_of(surfaces.begin(), surfaces.end(),
                              [&](const corpus::Mention& mm) { return mm.surface == e.entity_words.back(); }));
    }
  }
}

TEST(Sequences, AccidentStoryCounts) {
  const auto story = accident();
  const auto seqs = build_experience_sequences(story);
  ASSERT_EQ(seqs.size(), 3u);
  EXPECT_EQ(seqs[0].character.canonical_id, "I");
  EXPECT_EQ(seqs[0].count(), 2u);
  EXPECT_EQ(seqs[1].character.canonical_id, "son");
  EXPECT_EQ(seqs[1].count(), 1u);
  EXPECT_EQ(seqs[1].experiences[0].context_words, (Words{"lying", "pea", "gravel", "road"}));
  EXPECT_EQ(seqs[1].experiences[0].entity_words, (Words{"lying", "son"}));
}

TEST(Sequences, ChronologicalAndCountsSumToSubjectPairs) {
  const auto story = accident();
  std::size_t pairs = 0;
  for (const auto& s : story.context) pairs += corpus::root_subject(s).has_value();
  std::size_t total = 0;
  for (const auto& seq : build_experience_sequences(story)) {
    total += seq.count();
    for (std::size_t i = 1; i < seq.experiences.size(); ++i) {
      EXPECT_LT(seq.experiences[i - 1].sentence_index, seq.experiences[i].sentence_index);
    }
  }
  EXPECT_EQ(total, pairs);
}

TEST(Sequences, SecondAndFourthSentence) {
  corpus::Story s;
  s.id = "x";
  s.context = {clause("Bob", "ate", "pie"), clause("Ann", "saw", "dog"), clause("Bob", "hid", "key"),
               clause("Ann", "fed", "cat")};
  s.ending = clause("Ann", "won", "prize");
  corpus::annotate_characters(s);
  const auto seq = build_experience_sequence(s, *s.find_character("ann"));
  ASSERT_EQ(seq.count(), 2u);
  EXPECT_EQ(seq.experiences[0].sentence_index, 1u);
  EXPECT_EQ(seq.experiences[1].sentence_index, 3u);
}

TEST(GroundTruth, AccidentEndingIsI) {
  const auto gt = ground_truth_character(accident());
  ASSERT_TRUE(gt.has_value());
  EXPECT_EQ(gt->canonical_id, "I");
}

TEST(GroundTruth, MatchesContextCharacterOrNone) {
  corpus::Story s;
  s.id = "x";
  s.context = {clause("Ann", "saw", "driver"), clause("driver", "hit", "car", "NOUN")};
  s.ending = coseg::testing::sentence({{"The", "the", "DET", 2, "det"},
                                       {"driver", "driver", "NOUN", 3, "nsubj"},
                                       {"left", "leave", "VERB", 0, "root"}});
  corpus::annotate_characters(s);
  auto gt = ground_truth_character(s);
  ASSERT_TRUE(gt.has_value());
  EXPECT_EQ(gt->canonical_id, "driver");

  s.ending = clause("Zed", "left", "town");
  EXPECT_FALSE(ground_truth_character(s).has_value());
  ASSERT_TRUE(ending_subject(s).has_value());
  EXPECT_EQ(ending_subject(s)->form, "Zed");
}

TEST(Extraction, ReExtractionAfterSerialisationIsIdentical) {
  const auto story = accident();
  auto back = corpus::parse_story_json(corpus::story_to_json(story), "x");
  corpus::annotate_characters(back);
  const auto a = build_experience_sequences(story);
  const auto b = build_experience_sequences(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].experiences, b[i].experiences);
}
