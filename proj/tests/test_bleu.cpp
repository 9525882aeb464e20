#include <doctest.h>

#include <cmath>

#include "hop/bleu.hpp"

using namespace hop;

TEST_CASE("bleu4 reference values") {
  // one substituted token in five
  CHECK(bleu4({0, 1, 2, 3, 4}, {{0, 1, 5, 3, 4}}) ==
        doctest::Approx(0.4272870063962341).epsilon(1e-12));
  // short candidate, perfect prefix: pure brevity penalty exp(1 - 5/3)
  CHECK(bleu4({7, 8, 9}, {{7, 8, 9, 10, 11}}) ==
        doctest::Approx(std::exp(1.0 - 5.0 / 3.0)).epsilon(1e-12));
  CHECK(bleu4({0, 1, 2}, {{0, 1, 2, 3, 4}}) ==
        doctest::Approx(0.513417119032592).epsilon(1e-12));
  // clipped counts against two references
  CHECK(bleu4({1, 1, 2}, {{1, 2}, {1, 1}}) ==
        doctest::Approx(0.7937005259840998).epsilon(1e-12));
  // smoothing path: zero matches at both orders
  CHECK(bleu4({9, 9}, {{1, 2, 3}}) ==
        doctest::Approx(0.24761510494160163).epsilon(1e-12));
}

TEST_CASE("bleu4 fixed points") {
  CHECK(bleu4({4, 4, 4, 4}, {{4, 4, 4, 4}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bleu4({2, 7, 1, 8, 3, 6}, {{2, 7, 1, 8, 3, 6}}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bleu4({}, {{1, 2}}) == 0.0);
  CHECK(bleu4({1, 2}, {}) == 0.0);
  CHECK(bleu4({1, 2}, {{}}) == 0.0);
  // candidate longer than every reference pays no brevity penalty: the score
  // is the bare geometric mean (5/6 * 4/5 * 3/4 * 2/3)^(1/4)
  CHECK(bleu4({1, 2, 3, 4, 5, 6}, {{1, 2, 3, 4, 5}}) ==
        doctest::Approx(std::pow(1.0 / 3.0, 0.25)).epsilon(1e-12));
  CHECK(bleu4({5, 5}, {{5, 5}}) == doctest::Approx(1.0).epsilon(1e-12));
}
