#include "ffl/rng.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace ffl {

namespace {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != 32) {
    throw std::runtime_error("SHA-256 failed");
  }
  return out;
}

// 64 bytes of ChaCha20 keystream for (key, block counter). The 16-byte IV is
// the little-endian 32-bit counter followed by a zero nonce.
void chacha_block(const std::array<std::uint8_t, 32>& key,
                  std::uint64_t counter, std::array<std::uint8_t, 64>& out) {
  std::uint8_t iv[16] = {0};
  const auto c32 = static_cast<std::uint32_t>(counter);
  std::memcpy(iv, &c32, sizeof(c32));
  // Counters beyond 2^32 blocks roll into the nonce bytes.
  const auto hi = static_cast<std::uint32_t>(counter >> 32);
  std::memcpy(iv + 4, &hi, sizeof(hi));

  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  const std::array<std::uint8_t, 64> zeros{};
  int outl = 0;
  bool ok = EVP_EncryptInit_ex(ctx, EVP_chacha20(), nullptr, key.data(), iv) ==
                1 &&
            EVP_EncryptUpdate(ctx, out.data(), &outl, zeros.data(),
                              static_cast<int>(zeros.size())) == 1 &&
            outl == 64;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw std::runtime_error("ChaCha20 keystream failed");
}

}  // namespace

DetRng::DetRng(std::span<const std::uint8_t> seed) { key_ = sha256(seed); }

DetRng::DetRng(std::uint64_t seed) {
  std::uint8_t bytes[8];
  std::memcpy(bytes, &seed, sizeof(seed));
  key_ = sha256(bytes);
}

DetRng DetRng::fork(std::string_view label) const {
  std::vector<std::uint8_t> material(key_.begin(), key_.end());
  material.push_back(0x1f);  // separator between key and label
  material.insert(material.end(), label.begin(), label.end());
  DetRng child;
  child.key_ = sha256(material);
  return child;
}

DetRng DetRng::fork(std::string_view label, std::uint64_t index) const {
  std::vector<std::uint8_t> material(key_.begin(), key_.end());
  material.push_back(0x1f);
  material.insert(material.end(), label.begin(), label.end());
  material.push_back(0x1f);
  for (int i = 0; i < 8; ++i) {
    material.push_back(static_cast<std::uint8_t>(index >> (8 * i)));
  }
  DetRng child;
  child.key_ = sha256(material);
  return child;
}

void DetRng::refill() {
  chacha_block(key_, counter_++, buf_);
  pos_ = 0;
}

std::uint64_t DetRng::next_u64() {
  if (pos_ + 8 > buf_.size()) refill();
  std::uint64_t v;
  std::memcpy(&v, buf_.data() + pos_, sizeof(v));
  pos_ += 8;
  return v;
}

std::uint64_t DetRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("DetRng::below: bound is zero");
  // Rejection sampling over the largest multiple of bound.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double DetRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double DetRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double DetRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

void DetRng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (pos_ >= buf_.size()) refill();
    b = buf_[pos_++];
  }
}

std::array<std::uint8_t, 32> DetRng::bytes32() {
  std::array<std::uint8_t, 32> out{};
  fill(out);
  return out;
}

}  // namespace ffl
