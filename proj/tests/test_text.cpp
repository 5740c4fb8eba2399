#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "struggle/text.hpp"

using namespace struggle;

namespace {

// plain recursion over suffixes, only for short strings
std::size_t lev(const std::string& a, const std::string& b) {
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t sub = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    return std::min({sub, go(i + 1, j) + 1, go(i, j + 1) + 1});
  };
  return go(0, 0);
}

std::string random_word(std::mt19937& g) {
  std::uniform_int_distribution<int> len(0, 5), ch(0, 2);
  std::string s;
  for (int i = len(g); i > 0; --i) s.push_back(char('a' + ch(g)));
  return s;
}

}  // namespace

TEST_CASE("edit distance") {
  CHECK(text::edit_distance("abc", "abc") == 0);
  CHECK(text::edit_distance("abc", "") == 3);
  CHECK(text::edit_distance("kitten", "sitting") == 3);

  std::mt19937 g(3);
  for (int i = 0; i < 200; ++i) {
    auto a = random_word(g), b = random_word(g), c = random_word(g);
    auto ab = text::edit_distance(a, b);
    CHECK(ab == lev(a, b));
    CHECK(ab == text::edit_distance(b, a));
    CHECK(text::edit_distance(a, c) <= ab + text::edit_distance(b, c));
  }
}

TEST_CASE("query cosine") {
  CHECK(text::query_cosine("hair dye", "hair dye") == doctest::Approx(1.0));
  CHECK(text::query_cosine("hair dye", "chess") == 0.0);
  CHECK(text::query_cosine("hair dye", "hair dye brands") == doctest::Approx(2 / std::sqrt(6.0)));
  CHECK(text::query_cosine("curly hair dye", "hair dye brands") == doctest::Approx(2.0 / 3));
  CHECK(text::query_cosine("", "x") == 0.0);
  CHECK(text::query_cosine("Hair", "hair") == doctest::Approx(1.0));
}

TEST_CASE("tokenizers") {
  CHECK(text::query_terms("  Hair  Dye ") == std::vector<std::string>{"hair", "dye"});
  CHECK(text::alnum_tokens("https://www.best-horror-movies-2020.com/a_b") ==
        std::vector<std::string>{"https", "www", "best", "horror", "movies", "2020", "com", "a",
                                 "b"});
}

TEST_CASE("url domain") {
  CHECK(text::url_domain("https://www.salon.com/hair") == "salon.com");
  CHECK(text::url_domain("http://chess.example.com") == "chess.example.com");
  CHECK(text::url_domain("HTTPS://WWW.Clinic.org/x?y") == text::url_domain("https://www.Clinic.org/z"));
}
