#include <doctest.h>

#include <map>
#include <random>

#include "pan/errors.h"
#include "pan/text.h"

using namespace pan;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenizer normalizations") {
  CHECK(tokenize("soooo happy!!! #blessed") ==
        Tokens{"soo", "happy", "!", "!", "!", "<hashtag>", "blessed"});
  CHECK(tokenize("see http://t.co/x @bob") == Tokens{"see", "<url>", "<user>"});
  CHECK(tokenize("Visit www.example.com NOW") == Tokens{"visit", "<url>", "now"});
  CHECK(tokenize("I don't know") == Tokens{"i", "don't", "know"});
  CHECK(tokenize("paid 1,000 for 3.5 kg") == Tokens{"paid", "<number>", "for", "<number>", "kg"});
  CHECK(tokenize("2nd place") == Tokens{"2nd", "place"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t ").empty());
}

TEST_CASE("tokenizer keeps multi-byte characters together") {
  const auto t = tokenize("caf\xc3\xa9 ok");
  CHECK(t == Tokens{"caf\xc3\xa9", "ok"});
}

TEST_CASE("tokenizer output never contains whitespace or uppercase ASCII") {
  std::mt19937_64 rng(5);
  const std::string alphabet = "abcXYZ019 !?#@'.,\t:/w";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const auto n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    for (const auto& tok : tokenize(s)) {
      REQUIRE_FALSE(tok.empty());
      for (char c : tok) {
        CHECK(c != ' ');
        CHECK(c != '\t');
        CHECK_FALSE((c >= 'A' && c <= 'Z'));
      }
    }
  }
}

TEST_CASE("vocabulary from a small corpus") {
  const std::vector<Tokens> corpus{{"a", "b", "a"}, {"c", "a"}};
  const auto v1 = build_vocabulary(corpus, 1);
  CHECK(v1.tokens() == Tokens{"<pad>", "<unk>", "a", "b", "c"});
  const auto v2 = build_vocabulary(corpus, 2);
  CHECK(v2.tokens() == Tokens{"<pad>", "<unk>", "a"});
  CHECK(v2.index_of("b") == Vocabulary::kUnk);
}

TEST_CASE("vocabulary membership matches an independent count") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tokens> corpus(1 + rng() % 6);
    for (auto& doc : corpus) {
      const auto n = rng() % 8;
      for (std::size_t i = 0; i < n; ++i) doc.push_back(std::string(1, char('a' + rng() % 10)));
    }
    bool any = false;
    for (const auto& d : corpus) any = any || !d.empty();
    if (!any) continue;
    const int min_count = 1 + static_cast<int>(rng() % 3);
    std::map<std::string, int> counts;
    for (const auto& d : corpus)
      for (const auto& t : d) ++counts[t];
    const auto vocab = build_vocabulary(corpus, min_count);
    std::size_t expected = 2;
    for (const auto& [tok, n] : counts) {
      CHECK(vocab.contains(tok) == (n >= min_count));
      if (n >= min_count) ++expected;
    }
    CHECK(vocab.size() == expected);
  }
}

TEST_CASE("vocabulary argument errors") {
  CHECK_THROWS_AS(build_vocabulary({{"a"}}, 0), ConfigError);
  CHECK_THROWS_AS(build_vocabulary({}, 1), ContractError);
  CHECK_THROWS_AS(Vocabulary::from_tokens({"<unk>", "<pad>"}), ParseError);
  CHECK_THROWS_AS(Vocabulary::from_tokens({"<pad>", "<unk>", "x", "x"}), ParseError);
  Vocabulary v;
  CHECK_THROWS_AS(v.token(7), LookupError);
}

TEST_CASE("encode pads, truncates and decodes") {
  const auto vocab = build_vocabulary({{"i", "am", "happy"}}, 1);
  const auto e = encode({"i", "am", "sad"}, vocab, 5);
  CHECK(e.indices == std::vector<std::int32_t>{2, 3, Vocabulary::kUnk, 0, 0});
  CHECK(e.mask == std::vector<std::uint8_t>{1, 1, 1, 0, 0});
  CHECK(decode(e, vocab) == Tokens{"i", "am", "<unk>"});

  const auto t = encode({"i", "am", "happy", "i", "am"}, vocab, 2);
  CHECK(t.indices == std::vector<std::int32_t>{2, 3});
  CHECK(t.mask == std::vector<std::uint8_t>{1, 1});
  CHECK_THROWS_AS(encode({"i"}, vocab, 0), ConfigError);
}

TEST_CASE("encode round trip on in-vocabulary tokens") {
  std::mt19937_64 rng(3);
  const auto vocab = build_vocabulary({{"a", "b", "c", "d", "e"}}, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Tokens toks(1 + rng() % 12);
    for (auto& t : toks) t = std::string(1, char('a' + rng() % 5));
    const std::size_t max_len = 1 + rng() % 15;
    const auto d = decode(encode(toks, vocab, max_len), vocab);
    const Tokens prefix(toks.begin(), toks.begin() + std::min(max_len, toks.size()));
    CHECK(d == prefix);
  }
}
