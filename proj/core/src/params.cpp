#include "ffl/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ffl {

LayerLayout::LayerLayout(std::vector<LayerSpan> spans, WordRange last_layer)
    : spans_(std::move(spans)), last_(last_layer) {
  std::size_t expected = 0;
  for (const auto& s : spans_) {
    if (s.offset != expected) {
      throw ShapeError("layer spans must be contiguous and non-overlapping");
    }
    expected += s.length;
  }
  total_ = expected;
  if (last_.offset + last_.length != total_) {
    throw ShapeError("last_layer_range must be a suffix of the full range");
  }
}

LayerLayout LayerLayout::flat(std::size_t n) {
  return LayerLayout({LayerSpan{0, n, LayerKind::weight}}, WordRange{0, n});
}

BitMask BitMask::from_bytes(std::span<const std::uint8_t> bytes,
                            std::size_t n) {
  if (bytes.size() * 8 < n) {
    throw ShapeError("not enough bytes for requested mask length");
  }
  BitMask m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if ((bytes[i / 8] >> (i % 8)) & 1u) m.set(i, true);
  }
  return m;
}

void BitMask::set(std::size_t i, bool v) {
  const std::uint64_t bit = std::uint64_t{1} << (i % 64);
  if (v) {
    words_[i / 64] |= bit;
  } else {
    words_[i / 64] &= ~bit;
  }
}

BitMask BitMask::complement() const {
  BitMask out(n_);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = ~words_[w];
  // Clear padding bits past n_ so equality stays well defined.
  if (n_ % 64 != 0 && !out.words_.empty()) {
    out.words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
  }
  return out;
}

std::size_t BitMask::popcount() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

ParamWords::ParamWords(std::vector<std::uint32_t> words, LayerLayout layout)
    : words_(std::move(words)), layout_(std::move(layout)) {
  if (words_.size() != layout_.total_words()) {
    throw ShapeError("word count does not match layout");
  }
}

ParamWords ParamWords::zeros(const LayerLayout& layout) {
  return ParamWords(std::vector<std::uint32_t>(layout.total_words(), 0),
                    layout);
}

ParamWords ParamWords::from_floats(std::span<const float> values,
                                   LayerLayout layout) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    words[i] = std::bit_cast<std::uint32_t>(values[i]);
  }
  return ParamWords(std::move(words), std::move(layout));
}

ParamWords ParamWords::from_doubles(std::span<const double> values,
                                    LayerLayout layout) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    words[i] = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
  }
  return ParamWords(std::move(words), std::move(layout));
}

float ParamWords::float_at(std::size_t i) const {
  return std::bit_cast<float>(words_[i]);
}

std::vector<float> ParamWords::to_floats() const {
  std::vector<float> out(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) out[i] = float_at(i);
  return out;
}

std::vector<double> ParamWords::to_doubles() const {
  std::vector<double> out(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out[i] = static_cast<double>(float_at(i));
  }
  return out;
}

namespace {

void require_same_shape(const ParamWords& a, const ParamWords& b) {
  if (a.size() != b.size() || !(a.layout() == b.layout())) {
    throw ShapeError("parameter vectors have different shapes");
  }
}

}  // namespace

ParamWords xor_words(const ParamWords& a, const ParamWords& b) {
  require_same_shape(a, b);
  std::vector<std::uint32_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a.word_at(i) ^ b.word_at(i);
  }
  return ParamWords(std::move(out), a.layout());
}

ParamWords mask_select(const ParamWords& w, const BitMask& m) {
  if (m.size() != w.size()) {
    throw ShapeError("mask length does not match parameter count");
  }
  std::vector<std::uint32_t> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = m.test(i) ? w.word_at(i) : 0u;
  }
  return ParamWords(std::move(out), w.layout());
}

ParamWords scale(const ParamWords& w, double c) {
  std::vector<double> v = w.to_doubles();
  for (auto& x : v) x *= c;
  return ParamWords::from_doubles(v, w.layout());
}

ParamWords add(const ParamWords& a, const ParamWords& b) {
  require_same_shape(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[i] = static_cast<double>(a.float_at(i)) + b.float_at(i);
  }
  return ParamWords::from_doubles(v, a.layout());
}

ParamWords sub(const ParamWords& a, const ParamWords& b) {
  require_same_shape(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[i] = static_cast<double>(a.float_at(i)) - b.float_at(i);
  }
  return ParamWords::from_doubles(v, a.layout());
}

double l2_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l2_norm(const ParamWords& w) {
  double s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w.float_at(i);
    s += x * x;
  }
  return std::sqrt(s);
}

std::vector<double> last_layer(std::span<const double> v,
                               const LayerLayout& layout) {
  const auto& r = layout.last_layer();
  if (v.size() != layout.total_words()) {
    throw ShapeError("vector length does not match layout");
  }
  return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(r.offset),
                             v.begin() +
                                 static_cast<std::ptrdiff_t>(r.offset +
                                                             r.length));
}

std::vector<double> last_layer(const ParamWords& w) {
  const auto v = w.to_doubles();
  return last_layer(v, w.layout());
}

std::vector<double> coordinate_median(
    const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) {
    throw std::domain_error("coordinate_median of empty list");
  }
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ShapeError("vectors have different lengths");
  }
  std::vector<double> out(dim);
  std::vector<double> column(vectors.size());
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < vectors.size(); ++k) column[k] = vectors[k][i];
    std::sort(column.begin(), column.end());
    const std::size_t n = column.size();
    out[i] = (n % 2 == 1) ? column[n / 2]
                          : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine: length mismatch");
  double uu = 0, vv = 0, uv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    uv += u[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) {
    throw std::domain_error("cosine of zero-norm vector");
  }
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<std::uint8_t> serialize(const ParamWords& w) {
  std::vector<std::uint8_t> out;
  out.reserve(4 * w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::uint32_t word = w.word_at(i);
    out.push_back(static_cast<std::uint8_t>(word));
    out.push_back(static_cast<std::uint8_t>(word >> 8));
    out.push_back(static_cast<std::uint8_t>(word >> 16));
    out.push_back(static_cast<std::uint8_t>(word >> 24));
  }
  return out;
}

ParamWords deserialize(std::span<const std::uint8_t> bytes,
                       LayerLayout layout) {
  if (bytes.size() != 4 * layout.total_words()) {
    throw FormatError("byte length is not 4 * |W|");
  }
  std::vector<std::uint32_t> words(layout.total_words());
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = static_cast<std::uint32_t>(bytes[4 * i]) |
               (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
               (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
  }
  return ParamWords(std::move(words), std::move(layout));
}

}  // namespace ffl
