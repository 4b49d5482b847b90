#include "ffl/params.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "doctest.h"

#include "ffl/rng.hpp"

using namespace ffl;

namespace {

ParamWords random_words(DetRng& rng, std::size_t n) {
  std::vector<std::uint32_t> words(n);
  for (auto& w : words) w = static_cast<std::uint32_t>(rng.next_u64());
  return ParamWords(std::move(words), LayerLayout::flat(n));
}

BitMask random_mask(DetRng& rng, std::size_t n) {
  BitMask m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, rng.below(2) == 1);
  return m;
}

}  // namespace

TEST_SUITE("params") {

TEST_CASE("layout invariants") {
  CHECK_THROWS_AS(LayerLayout({{0, 4, LayerKind::weight},
                               {5, 2, LayerKind::bias}},
                              WordRange{0, 7}),
                  ShapeError);
  CHECK_THROWS_AS(LayerLayout({{0, 4, LayerKind::weight}}, WordRange{1, 2}),
                  ShapeError);
  const auto flat = LayerLayout::flat(8);
  CHECK(flat.total_words() == 8);
  CHECK(flat.last_layer() == WordRange{0, 8});
}

TEST_CASE("xor_words basics") {
  DetRng rng(7);
  const auto a = random_words(rng, 32);
  const auto zero = ParamWords::zeros(a.layout());
  CHECK(xor_words(a, a) == zero);
  CHECK(xor_words(a, zero) == a);

  // 1.0f ^ 2.0f at the word level is the bit pattern of +infinity.
  const float one = 1.0f, two = 2.0f;
  const auto layout = LayerLayout::flat(1);
  const auto wa = ParamWords::from_floats(std::vector<float>{one}, layout);
  const auto wb = ParamWords::from_floats(std::vector<float>{two}, layout);
  CHECK(wa.word_at(0) == 0x3F800000u);
  CHECK(wb.word_at(0) == 0x40000000u);
  CHECK(xor_words(wa, wb).word_at(0) == 0x7F800000u);

  const auto extra = random_words(rng, 16);
  CHECK_THROWS_AS(xor_words(a, extra), ShapeError);
}

TEST_CASE("xor_words is associative and commutative") {
  DetRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_words(rng, 17);
    const auto b = random_words(rng, 17);
    const auto c = random_words(rng, 17);
    CHECK(xor_words(a, b) == xor_words(b, a));
    CHECK(xor_words(xor_words(a, b), c) == xor_words(a, xor_words(b, c)));
  }
}

TEST_CASE("mask_select definition") {
  const auto layout = LayerLayout::flat(4);
  const std::vector<float> vals{1.0f, 2.0f, 3.0f, 4.0f};
  const auto w = ParamWords::from_floats(vals, layout);
  BitMask m(4);
  m.set(0, true);
  m.set(2, true);
  const auto sel = mask_select(w, m);
  CHECK(sel.float_at(0) == 1.0f);
  CHECK(sel.word_at(1) == 0u);  // +0.0
  CHECK(sel.float_at(2) == 3.0f);
  CHECK(sel.word_at(3) == 0u);

  BitMask ones(4);
  for (int i = 0; i < 4; ++i) ones.set(i, true);
  CHECK(mask_select(w, ones) == w);
  CHECK(mask_select(w, BitMask(4)) == ParamWords::zeros(layout));

  CHECK_THROWS_AS(mask_select(w, BitMask(5)), ShapeError);
}

TEST_CASE("mask complement and reassembly") {
  DetRng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_words(rng, 33);
    const auto m = random_mask(rng, 33);
    const auto not_m = m.complement();
    // m ^ ~m = all ones, bit by bit.
    for (std::size_t i = 0; i < 33; ++i) {
      CHECK(m.test(i) != not_m.test(i));
    }
    // Zeroing identity behind the mix equation.
    CHECK(xor_words(w, mask_select(w, m)) == mask_select(w, not_m));
    // The two fragments reassemble w exactly.
    CHECK(xor_words(mask_select(w, m), mask_select(w, not_m)) == w);
  }
}

TEST_CASE("float/word conversion round-trips every pattern") {
  const auto layout = LayerLayout::flat(1);
  const std::vector<std::uint32_t> patterns{
      0x00000000u, 0x80000000u,              // +-0
      0x7F800000u, 0xFF800000u,              // +-inf
      0x7FC00001u, 0xFFC0BEEFu, 0x7F800001u, // NaNs with payloads
      0x3F800000u, 0x00000001u, 0x807FFFFFu  // one, denormals
  };
  for (const auto p : patterns) {
    const ParamWords w(std::vector<std::uint32_t>{p}, layout);
    const float f = w.float_at(0);
    CHECK(std::bit_cast<std::uint32_t>(f) == p);
  }
}

TEST_CASE("vector math") {
  const auto layout = LayerLayout::flat(2);
  const auto w =
      ParamWords::from_floats(std::vector<float>{3.0f, 4.0f}, layout);
  CHECK(l2_norm(w) == doctest::Approx(5.0));

  const std::vector<double> u{0.3, -1.0, 2.0};
  CHECK(cosine(u, u) == doctest::Approx(1.0));
  const std::vector<double> zero3{0, 0, 0};
  CHECK_THROWS_AS(cosine(u, zero3), std::domain_error);

  const std::vector<std::vector<double>> cols{{1.0}, {2.0}, {9.0}};
  CHECK(coordinate_median(cols) == std::vector<double>{2.0});
  const std::vector<std::vector<double>> even{{1.0}, {3.0}};
  CHECK(coordinate_median(even) == std::vector<double>{2.0});

  const auto scaled = scale(w, 2.0);
  CHECK(scaled.float_at(0) == 6.0f);
  CHECK(sub(add(w, w), w) == w);
}

TEST_CASE("last_layer slices the suffix") {
  LayerLayout layout({{0, 3, LayerKind::weight}, {3, 2, LayerKind::bias}},
                     WordRange{3, 2});
  const auto w = ParamWords::from_floats(
      std::vector<float>{1, 2, 3, 4, 5}, layout);
  CHECK(last_layer(w) == std::vector<double>{4.0, 5.0});
}

TEST_CASE("serialization is little-endian and bit-exact") {
  const auto layout = LayerLayout::flat(1);
  const ParamWords w(std::vector<std::uint32_t>{0x3F800000u}, layout);
  const auto bytes = serialize(w);
  CHECK(bytes == std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3F});

  DetRng rng(17);
  const auto big = random_words(rng, 5000);
  const auto ser = serialize(big);
  CHECK(ser.size() == 20000);
  CHECK(deserialize(ser, big.layout()) == big);

  CHECK_THROWS_AS(deserialize(std::vector<std::uint8_t>(7, 0),
                              LayerLayout::flat(2)),
                  FormatError);
}

}  // TEST_SUITE
