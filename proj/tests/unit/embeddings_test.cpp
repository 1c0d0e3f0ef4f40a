#include <gtest/gtest.h>

#include <cmath>

#include "oodsim/corpus.hpp"
#include "oodsim/embeddings.hpp"
#include "support.hpp"

using namespace oodsim;
using oodsim::testing::TempDir;

TEST(WordVectors, ParseText) {
    const auto t = parse_word_vectors("2 3\na 1 0 0\nb 0 1 0\n", VectorFormat::Text);
    EXPECT_EQ(t.dim(), 3u);
    EXPECT_EQ(t.size(), 2u);
    const auto b = t.find("b");
    ASSERT_TRUE(b);
    EXPECT_EQ((*b)[1], 1.0);
    EXPECT_FALSE(t.find("c"));
}

TEST(WordVectors, WrongValueCountNamesToken) {
    try {
        parse_word_vectors("2 3\na 1 0 0\nbee 0 1\n", VectorFormat::Text);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("'bee'"), std::string::npos) << e.what();
    }
}

TEST(WordVectors, MalformedInputs) {
    EXPECT_THROW(parse_word_vectors("", VectorFormat::Text), DataError);
    EXPECT_THROW(parse_word_vectors("x 3\n", VectorFormat::Text), DataError);
    EXPECT_THROW(parse_word_vectors("1 2\na 1 zz\n", VectorFormat::Text), DataError);
    EXPECT_THROW(parse_word_vectors("3 2\na 1 2\n", VectorFormat::Text), DataError);
    EXPECT_THROW(parse_word_vectors("1 2\na 1 nan\n", VectorFormat::Text), DataError);
}

TEST(WordVectors, DuplicatesKeepFirst) {
    const auto t = parse_word_vectors("2 1\na 1\na 2\n", VectorFormat::Text);
    EXPECT_EQ(t.size(), 1u);
    EXPECT_EQ(t.duplicates_skipped(), 1u);
    EXPECT_EQ((*t.find("a"))[0], 1.0);
}

TEST(WordVectors, BinaryRoundTripMatchesText) {
    const auto text = parse_word_vectors("3 3\na 1 0 0\nb 0 1 0\ncat 0.5 -0.25 2\n", VectorFormat::Text);
    const auto bin = serialize_word_vectors(text, VectorFormat::Binary);
    const auto back = parse_word_vectors(bin, VectorFormat::Binary);
    EXPECT_EQ(back, text);

    TempDir dir("vectors");
    write_word_vectors(text, dir / "v.bin", VectorFormat::Binary);
    write_word_vectors(text, dir / "v.txt", VectorFormat::Text);
    EXPECT_EQ(load_word_vectors(dir / "v.bin", VectorFormat::Binary), load_word_vectors(dir / "v.txt", VectorFormat::Text));
}

TEST(WordVectors, BinaryToleratesNewlinesAndDetectsTruncation) {
    const auto text = parse_word_vectors("2 2\na 1 2\nb 3 4\n", VectorFormat::Text);
    auto bin = serialize_word_vectors(text, VectorFormat::Binary);
    std::string with_nl = "2 2\n";
    // insert a newline after each 8-byte payload
    const auto body = bin.substr(4);
    with_nl += body.substr(0, 10) + "\n" + body.substr(10) + "\n";
    EXPECT_EQ(parse_word_vectors(with_nl, VectorFormat::Binary), text);
    EXPECT_THROW(parse_word_vectors(bin.substr(0, bin.size() - 3), VectorFormat::Binary), DataError);
}

TEST(Tokenize, Rules) {
    EXPECT_EQ(tokenize("Great, movie!"), (std::vector<std::string>{"great", "movie"}));
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_EQ(tokenize("don't stop"), (std::vector<std::string>{"don't", "stop"}));
    EXPECT_EQ(tokenize("  a\tb\nc  "), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(tokenize("x y　z"), (std::vector<std::string>{"x", "y", "z"}));
    EXPECT_EQ(tokenize("... !!"), std::vector<std::string>{});
    EXPECT_EQ(tokenize("cafÉ"), (std::vector<std::string>{"cafÉ"}));
}

namespace {
double norm(const Vector& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

WordVectorTable ab_table() {
    WordVectorTable t(2);
    t.add("a", std::vector<double>{1, 0});
    t.add("b", std::vector<double>{0, 1});
    return t;
}
} // namespace

TEST(EmbedSentence, MeanAndOov) {
    const auto t = ab_table();
    auto e = embed_sentence(t, "a b");
    EXPECT_EQ(e.vector, (Vector{0.5, 0.5}));
    EXPECT_EQ(e.oov_ratio, 0.0);
    EXPECT_FALSE(e.degenerate);
    EXPECT_EQ(embed_sentence(t, "a").vector, (Vector{1, 0}));
    e = embed_sentence(t, "zzz");
    EXPECT_EQ(e.vector, (Vector{0, 0}));
    EXPECT_EQ(e.oov_ratio, 1.0);
    EXPECT_TRUE(e.degenerate);
    e = embed_sentence(t, "a zzz");
    EXPECT_EQ(e.oov_ratio, 0.5);
    EXPECT_TRUE(embed_sentence(t, "").degenerate);
}

TEST(EmbedSentence, NormBoundedByLargestTokenNorm) {
    Rng rng(5);
    const auto vecs = oodsim::testing::random_points(rng, 6, 4, -3, 3);
    const auto t = oodsim::testing::letter_table(vecs);
    double max_norm = 0;
    for (const auto& v : vecs) max_norm = std::max(max_norm, norm(v));
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        for (int k = 0; k < 5; ++k) text += std::string(1, static_cast<char>('a' + rng.below(6))) + " ";
        const auto e = embed_sentence(t, text);
        EXPECT_LE(norm(e.vector), max_norm + 1e-12);
    }
}

TEST(TokenCloud, OccurrencePoints) {
    const auto t = ab_table();
    auto c = token_cloud(t, "a b");
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(c.weights, (std::vector<double>{0.5, 0.5}));
    c = token_cloud(t, "a a b");
    EXPECT_EQ(c.size(), 3u);
    for (double w : c.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
    EXPECT_TRUE(token_cloud(t, "zzz qqq").degenerate);
}

TEST(EmbedSet, LengthPreservingAndDeterministic) {
    const auto t = ab_table();
    Corpus c{"c", Task::Sentiment, Split::Train, {}};
    for (int i = 0; i < 20; ++i) {
        Sample s;
        s.id = std::to_string(i);
        s.text_primary = i == 3 ? "unknown words" : (i % 2 ? "a b" : "b");
        c.samples.push_back(s);
    }
    const auto e = embed_set(t, c);
    EXPECT_EQ(e.size(), 20u);
    EXPECT_EQ(e.clouds.size(), 20u);
    EXPECT_EQ(e.degenerate_count(), 1u);
    EXPECT_TRUE(e.sentences[3].degenerate);
    const auto e2 = embed_set(t, c);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(e.sentences[i].vector, e2.sentences[i].vector);
}
