#include "courtside/text.hpp"

#include <gtest/gtest.h>

using namespace courtside;

TEST(Tokenize, WordsAndOffsets) {
    const auto t = text::tokenize("How many aces for Alcaraz's serve? 62.5%");
    ASSERT_EQ(t.size(), 7u);
    EXPECT_EQ(t[4].text, "Alcaraz's");
    EXPECT_EQ(t[6].text, "62.5");
    EXPECT_EQ(std::string("How many aces for Alcaraz's serve? 62.5%").substr(t[2].begin, 4), "aces");
}

TEST(Fold, StripsDiacritics) {
    EXPECT_EQ(text::fold("Świątek"), "swiatek");
    EXPECT_EQ(text::fold("MÜLLER"), "muller");
    EXPECT_EQ(text::fold("Đoković"), "dokovic");
}

TEST(Lemma, SuffixRules) {
    EXPECT_EQ(text::lemma("aces"), "ace");
    EXPECT_EQ(text::lemma("Matches"), "match");
    EXPECT_EQ(text::lemma("winning"), text::lemma("wins"));
    EXPECT_EQ(text::lemma("served"), text::lemma("serve"));
    EXPECT_EQ(text::lemma("serving"), text::lemma("serves"));
    EXPECT_EQ(text::lemma("chances"), text::lemma("chance"));
    EXPECT_EQ(text::lemma("won"), "win");
    EXPECT_EQ(text::lemma("statistics"), text::lemma("statistic"));
}

TEST(ContentLemmas, DropsStopwordsUnlessNothingLeft) {
    EXPECT_EQ(text::content_lemmas("where can I park?"), (std::vector<std::string>{"park"}));
    EXPECT_EQ(text::content_lemmas("who is he").size(), 3u);
}

TEST(EditDistance, Basics) {
    EXPECT_EQ(text::edit_distance("alcarez", "alcaraz"), 1u);
    EXPECT_EQ(text::edit_distance("", "abc"), 3u);
    EXPECT_EQ(text::edit_distance("sinner", "sinner"), 0u);
    EXPECT_EQ(text::edit_distance("kitten", "sitting"), 3u);
}

TEST(Numbers, Normalized) {
    EXPECT_EQ(text::numbers("He hit 1,234 serves at 62.5% and 7 aces."),
              (std::vector<std::string>{"1234", "62.5", "7"}));
    EXPECT_TRUE(text::numbers("no digits here").empty());
}

TEST(Utf8, LengthCountsCodePoints) {
    EXPECT_EQ(text::utf8_length("Świątek"), 7u);
    EXPECT_EQ(text::utf8_length("abc"), 3u);
}
