#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ffl/errors.hpp"

namespace ffl {

enum class LayerKind : std::uint8_t { weight, bias };

struct LayerSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  LayerKind kind = LayerKind::weight;
  bool operator==(const LayerSpan&) const = default;
};

struct WordRange {
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const WordRange&) const = default;
};

// Word layout of a flat parameter vector: contiguous non-overlapping spans
// covering [0, total), plus the suffix range holding the final layer's weight
// matrix and bias (the slice the similarity defense inspects).
class LayerLayout {
 public:
  LayerLayout() = default;
  LayerLayout(std::vector<LayerSpan> spans, WordRange last_layer);

  // Single weight span; the last layer is the whole vector.
  static LayerLayout flat(std::size_t n);

  std::size_t total_words() const { return total_; }
  const std::vector<LayerSpan>& spans() const { return spans_; }
  const WordRange& last_layer() const { return last_; }
  bool operator==(const LayerLayout&) const = default;

 private:
  std::vector<LayerSpan> spans_;
  WordRange last_;
  std::size_t total_ = 0;
};

// Per-parameter selection mask of |W| bits.
class BitMask {
 public:
  BitMask() = default;
  explicit BitMask(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}
  // bit i = bit (i % 8) of byte (i / 8), LSB first.
  static BitMask from_bytes(std::span<const std::uint8_t> bytes, std::size_t n);

  std::size_t size() const { return n_; }
  bool test(std::size_t i) const {
    return (words_[i / 64] >> (i % 64)) & 1u;
  }
  void set(std::size_t i, bool v);
  BitMask complement() const;
  std::size_t popcount() const;
  bool operator==(const BitMask&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

// Flat sequence of raw 32-bit parameter words with a layer layout. Ciphertext
// operations (XOR, masking, one-time pads) act on the words; the float view is
// only meaningful for plaintext values. Word<->float conversion is bit exact,
// including NaN payloads, which is why encrypted values never pass through the
// float pipeline.
class ParamWords {
 public:
  ParamWords() = default;
  ParamWords(std::vector<std::uint32_t> words, LayerLayout layout);

  static ParamWords zeros(const LayerLayout& layout);
  static ParamWords from_floats(std::span<const float> values,
                                LayerLayout layout);
  // Rounds each double to the nearest float32.
  static ParamWords from_doubles(std::span<const double> values,
                                 LayerLayout layout);

  std::size_t size() const { return words_.size(); }
  const LayerLayout& layout() const { return layout_; }
  std::span<const std::uint32_t> words() const { return words_; }
  std::uint32_t word_at(std::size_t i) const { return words_[i]; }
  void set_word(std::size_t i, std::uint32_t w) { words_[i] = w; }

  float float_at(std::size_t i) const;
  std::vector<float> to_floats() const;
  std::vector<double> to_doubles() const;

  bool operator==(const ParamWords&) const = default;

 private:
  std::vector<std::uint32_t> words_;
  LayerLayout layout_;
};

// Ciphertext-domain operators (raw words, never floats).
ParamWords xor_words(const ParamWords& a, const ParamWords& b);
ParamWords mask_select(const ParamWords& w, const BitMask& m);

// Plaintext vector math. Operands are decoded as IEEE-754 singles, computed in
// double, and re-encoded where the result is a parameter vector.
ParamWords scale(const ParamWords& w, double c);
ParamWords add(const ParamWords& a, const ParamWords& b);
ParamWords sub(const ParamWords& a, const ParamWords& b);
double l2_norm(const ParamWords& w);
double l2_norm(std::span<const double> v);
std::vector<double> last_layer(const ParamWords& w);
std::vector<double> last_layer(std::span<const double> v,
                               const LayerLayout& layout);
std::vector<double> coordinate_median(
    const std::vector<std::vector<double>>& vectors);
// Throws std::domain_error when either operand has zero norm.
double cosine(std::span<const double> u, std::span<const double> v);

// Little-endian word serialization; round-trip is the identity bit for bit.
std::vector<std::uint8_t> serialize(const ParamWords& w);
ParamWords deserialize(std::span<const std::uint8_t> bytes, LayerLayout layout);

}  // namespace ffl
