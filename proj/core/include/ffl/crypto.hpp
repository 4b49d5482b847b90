#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffl/errors.hpp"
#include "ffl/params.hpp"
#include "ffl/rng.hpp"

namespace ffl {

// Public deterministic PRNG shared by every party: a ChaCha20 keystream keyed
// with SHA-256(seed). Identical seeds give identical streams on every
// platform. Bit i of the stream is bit (i % 8) of byte (i / 8), LSB first.
std::vector<std::uint8_t> prng_bytes(std::span<const std::uint8_t> seed,
                                     std::size_t n_bytes);
bool stream_bit(std::span<const std::uint8_t> stream, std::size_t i);

// 32-byte OTP seed. Drawn from the caller's generator so protocol runs can use
// a strong source and tests can inject fixed values.
struct Seed {
  std::array<std::uint8_t, 32> bytes{};
  static Seed random(DetRng& rng);
  bool operator==(const Seed&) const = default;
};

// Multiplicative group used for the mask agreement. Public values travel as
// fixed-width big-endian byte strings (width = modulus size), which also fixes
// the shared-secret-to-PRNG-seed encoding.
class DhGroup {
 public:
  // "modp2048-256": the 2048-bit MODP group with 256-bit prime-order
  // subgroup (RFC 5114). "test-23": p=23, g=5, for oracle-checkable tests.
  static const DhGroup& named(std::string_view name);

  const std::string& name() const;
  std::size_t modulus_bits() const;
  std::size_t modulus_bytes() const;
  std::size_t exponent_bits() const;

  // Uniform exponent in (1, q), big-endian.
  std::vector<std::uint8_t> random_exponent(DetRng& rng) const;
  // g^a mod p, fixed width. Exponent must satisfy 1 < a < q.
  std::vector<std::uint8_t> dh_public(
      std::span<const std::uint8_t> exponent) const;
  // peer^a mod p, fixed width. Rejects peer values outside (1, p-1).
  std::vector<std::uint8_t> dh_shared(std::span<const std::uint8_t> peer_pub,
                                      std::span<const std::uint8_t> exponent)
      const;

  struct Impl;

 private:
  explicit DhGroup(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// Mask m = PRNG(g^ab mod p): first n_params stream bits over the fixed-width
// encoding of the shared secret.
BitMask derive_mask(std::span<const std::uint8_t> shared_secret,
                    std::size_t n_params);

// One-time pad of layout.total_words() 32-bit words; word i is assembled
// little-endian from stream bytes [4i, 4i+4).
ParamWords gen_otp(const Seed& seed, const LayerLayout& layout);

class ServerKeyPair;

// Encryption half of the server's keypair, shareable with participants.
class ServerPublicKey {
 public:
  // RSA-OAEP(SHA-256); ciphertext length equals the modulus size (384 bytes
  // for the default 3072-bit key) and padding is randomized.
  std::vector<std::uint8_t> encrypt_seed(const Seed& seed) const;
  std::size_t ciphertext_bytes() const;

 private:
  friend class ServerKeyPair;
  struct Handle;
  std::shared_ptr<Handle> handle_;
};

class ServerKeyPair {
 public:
  static ServerKeyPair generate(int bits = 3072);

  ServerPublicKey public_key() const;
  // Throws CryptoError when the ciphertext is tampered or not a seed.
  Seed decrypt_seed(std::span<const std::uint8_t> ciphertext) const;
  std::size_t ciphertext_bytes() const;

 private:
  ServerKeyPair() = default;
  std::shared_ptr<ServerPublicKey::Handle> handle_;
};

}  // namespace ffl
