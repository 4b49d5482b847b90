#include "ffl/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/evp.h>
#include <openssl/rsa.h>

#include <cstring>
#include <map>
#include <mutex>

namespace ffl {

namespace {

// RFC 5114, 2048-bit MODP group with 256-bit prime-order subgroup.
constexpr const char* kModp2048P =
    "87A8E61DB4B6663CFFBBD19C651959998CEEF608660DD0F25D2CEED4435E3B00"
    "E00DF8F1D61957D4FAF7DF4561B2AA3016C3D91134096FAA3BF4296D830E9A7C"
    "209E0C6497517ABD5A8A9D306BCF67ED91F9E6725B4758C022E0B1EF4275BF7B"
    "6C5BFC11D45F9088B941F54EB1E59BB8BC39A0BF12307F5C4FDB70C581B23F76"
    "B63ACAE1CAA6B7902D52526735488A0EF13C6D9A51BFA4AB3AD8347796524D8E"
    "F6A167B5A41825D967E144E5140564251CCACB83E6B486F6B3CA3F7971506026"
    "C0B857F689962856DED4010ABD0BE621C3A3960A54E710C375F26375D7014103"
    "A4B54330C198AF126116D2276E11715F693877FAD7EF09CADB094AE91E1A1597";
constexpr const char* kModp2048G =
    "3FB32C9B73134D0B2E77506660EDBD484CA7B18F21EF205407F4793A1A0BA125"
    "10DBC15077BE463FFF4FED4AAC0BB555BE3A6C1B0C6B47B1BC3773BF7E8C6F62"
    "901228F8C28CBB18A55AE31341000A650196F931C77A57F2DDF463E5E9EC144B"
    "777DE62AAAB8A8628AC376D282D6ED3864E67982428EBC831D14348F6F2F9193"
    "B5045AF2767164E1DFC967C1FB3F2E55A4BD1BFFE83B9C80D052B985D182EA0A"
    "DB2A3B7313D3FE14C8484B1E052588B9B7D2BBD2DF016199ECD06E1557CD0915"
    "B3353BBB64E0EC377FD028370DF92B52C7891428CDC67EB6184B523D1DB246C3"
    "2F63078490F00EF8D647D148D47954515E2327CFEF98C582664B4C0F6CC41659";
constexpr const char* kModp2048Q =
    "8CF83642A709A097B447997640129DA299B1A47D1EB3750BA308B0FE64F5FBD3";

struct BnDeleter {
  void operator()(BIGNUM* bn) const { BN_free(bn); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct BnCtxDeleter {
  void operator()(BN_CTX* ctx) const { BN_CTX_free(ctx); }
};
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;

BnPtr bn_from_hex(const char* hex) {
  BIGNUM* bn = nullptr;
  if (BN_hex2bn(&bn, hex) == 0) throw CryptoError("BN_hex2bn failed");
  return BnPtr(bn);
}

BnPtr bn_from_bytes(std::span<const std::uint8_t> bytes) {
  BIGNUM* bn = BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr);
  if (bn == nullptr) throw CryptoError("BN_bin2bn failed");
  return BnPtr(bn);
}

std::vector<std::uint8_t> bn_to_fixed_bytes(const BIGNUM* bn,
                                            std::size_t width) {
  std::vector<std::uint8_t> out(width, 0);
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(width)) < 0) {
    throw CryptoError("BN_bn2binpad failed");
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> prng_bytes(std::span<const std::uint8_t> seed,
                                     std::size_t n_bytes) {
  if (seed.empty()) throw std::invalid_argument("prng seed is empty");
  // Key = SHA-256(seed); stream = ChaCha20 keystream, zero nonce, counter 0.
  std::array<std::uint8_t, 32> key{};
  unsigned int len = 0;
  if (EVP_Digest(seed.data(), seed.size(), key.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw CryptoError("SHA-256 failed");
  }
  std::vector<std::uint8_t> out(n_bytes, 0);
  if (n_bytes == 0) return out;
  std::uint8_t iv[16] = {0};
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (ctx == nullptr) throw CryptoError("EVP_CIPHER_CTX_new failed");
  int outl = 0;
  bool ok =
      EVP_EncryptInit_ex(ctx, EVP_chacha20(), nullptr, key.data(), iv) == 1 &&
      EVP_EncryptUpdate(ctx, out.data(), &outl, out.data(),
                        static_cast<int>(out.size())) == 1;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw CryptoError("ChaCha20 keystream failed");
  return out;
}

bool stream_bit(std::span<const std::uint8_t> stream, std::size_t i) {
  return (stream[i / 8] >> (i % 8)) & 1u;
}

Seed Seed::random(DetRng& rng) {
  Seed s;
  s.bytes = rng.bytes32();
  return s;
}

struct DhGroup::Impl {
  std::string name;
  BnPtr p, g, q;
  std::size_t exponent_bits = 0;
};

DhGroup::DhGroup(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

const DhGroup& DhGroup::named(std::string_view name) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<DhGroup>> groups;
  std::lock_guard<std::mutex> lock(mu);
  auto it = groups.find(std::string(name));
  if (it != groups.end()) return *it->second;

  auto impl = std::make_shared<Impl>();
  impl->name = std::string(name);
  if (name == "modp2048-256") {
    impl->p = bn_from_hex(kModp2048P);
    impl->g = bn_from_hex(kModp2048G);
    impl->q = bn_from_hex(kModp2048Q);
    impl->exponent_bits = 256;
  } else if (name == "test-23") {
    // Tiny oracle-checkable group for tests only: p=23, g=5, ord(g)=22.
    impl->p = bn_from_hex("17");
    impl->g = bn_from_hex("05");
    impl->q = bn_from_hex("16");
    impl->exponent_bits = 5;
  } else {
    throw ConfigError("unknown DH group: " + std::string(name));
  }
  auto [pos, inserted] = groups.emplace(
      std::string(name), std::unique_ptr<DhGroup>(new DhGroup(impl)));
  (void)inserted;
  return *pos->second;
}

const std::string& DhGroup::name() const { return impl_->name; }

std::size_t DhGroup::modulus_bits() const {
  return static_cast<std::size_t>(BN_num_bits(impl_->p.get()));
}

std::size_t DhGroup::modulus_bytes() const {
  return static_cast<std::size_t>(BN_num_bytes(impl_->p.get()));
}

std::size_t DhGroup::exponent_bits() const { return impl_->exponent_bits; }

std::vector<std::uint8_t> DhGroup::random_exponent(DetRng& rng) const {
  const std::size_t nbytes = (impl_->exponent_bits + 7) / 8;
  std::vector<std::uint8_t> buf(nbytes);
  // Rejection-sample until 1 < a < q.
  for (;;) {
    rng.fill(buf);
    if (impl_->exponent_bits % 8 != 0) {
      buf[0] &= static_cast<std::uint8_t>(
          (1u << (impl_->exponent_bits % 8)) - 1u);
    }
    BnPtr a = bn_from_bytes(buf);
    if (BN_cmp(a.get(), BN_value_one()) > 0 &&
        BN_cmp(a.get(), impl_->q.get()) < 0) {
      return buf;
    }
  }
}

namespace {

void check_exponent(const BIGNUM* a, const BIGNUM* q) {
  if (BN_cmp(a, BN_value_one()) <= 0 || BN_cmp(a, q) >= 0) {
    throw std::domain_error("DH exponent outside (1, subgroup order)");
  }
}

}  // namespace

std::vector<std::uint8_t> DhGroup::dh_public(
    std::span<const std::uint8_t> exponent) const {
  BnPtr a = bn_from_bytes(exponent);
  check_exponent(a.get(), impl_->q.get());
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr r(BN_new());
  if (BN_mod_exp(r.get(), impl_->g.get(), a.get(), impl_->p.get(),
                 ctx.get()) != 1) {
    throw CryptoError("BN_mod_exp failed");
  }
  return bn_to_fixed_bytes(r.get(), modulus_bytes());
}

std::vector<std::uint8_t> DhGroup::dh_shared(
    std::span<const std::uint8_t> peer_pub,
    std::span<const std::uint8_t> exponent) const {
  BnPtr a = bn_from_bytes(exponent);
  check_exponent(a.get(), impl_->q.get());
  BnPtr peer = bn_from_bytes(peer_pub);
  // Valid public values lie strictly between 1 and p-1.
  BnPtr p_minus_1(BN_dup(impl_->p.get()));
  BN_sub_word(p_minus_1.get(), 1);
  if (BN_cmp(peer.get(), BN_value_one()) <= 0 ||
      BN_cmp(peer.get(), p_minus_1.get()) >= 0) {
    throw ProtocolError("DH public value outside (1, p-1)");
  }
  BnCtxPtr ctx(BN_CTX_new());
  BnPtr r(BN_new());
  if (BN_mod_exp(r.get(), peer.get(), a.get(), impl_->p.get(), ctx.get()) !=
      1) {
    throw CryptoError("BN_mod_exp failed");
  }
  return bn_to_fixed_bytes(r.get(), modulus_bytes());
}

BitMask derive_mask(std::span<const std::uint8_t> shared_secret,
                    std::size_t n_params) {
  const auto stream = prng_bytes(shared_secret, (n_params + 7) / 8);
  return BitMask::from_bytes(stream, n_params);
}

ParamWords gen_otp(const Seed& seed, const LayerLayout& layout) {
  const std::size_t n = layout.total_words();
  const auto stream = prng_bytes(seed.bytes, 4 * n);
  std::vector<std::uint32_t> words(n);
  for (std::size_t i = 0; i < n; ++i) {
    words[i] = static_cast<std::uint32_t>(stream[4 * i]) |
               (static_cast<std::uint32_t>(stream[4 * i + 1]) << 8) |
               (static_cast<std::uint32_t>(stream[4 * i + 2]) << 16) |
               (static_cast<std::uint32_t>(stream[4 * i + 3]) << 24);
  }
  return ParamWords(std::move(words), layout);
}

struct ServerPublicKey::Handle {
  EVP_PKEY* key = nullptr;
  ~Handle() { EVP_PKEY_free(key); }
};

namespace {

struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* ctx) const { EVP_PKEY_CTX_free(ctx); }
};
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

void set_oaep_sha256(EVP_PKEY_CTX* ctx) {
  if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) <= 0 ||
      EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256()) <= 0) {
    throw CryptoError("failed to configure RSA-OAEP");
  }
}

}  // namespace

std::vector<std::uint8_t> ServerPublicKey::encrypt_seed(
    const Seed& seed) const {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(handle_->key, nullptr));
  if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) <= 0) {
    throw CryptoError("encrypt init failed");
  }
  set_oaep_sha256(ctx.get());
  std::size_t outlen = 0;
  if (EVP_PKEY_encrypt(ctx.get(), nullptr, &outlen, seed.bytes.data(),
                       seed.bytes.size()) <= 0) {
    throw CryptoError("encrypt size query failed");
  }
  std::vector<std::uint8_t> out(outlen);
  if (EVP_PKEY_encrypt(ctx.get(), out.data(), &outlen, seed.bytes.data(),
                       seed.bytes.size()) <= 0) {
    throw CryptoError("seed encryption failed");
  }
  out.resize(outlen);
  return out;
}

std::size_t ServerPublicKey::ciphertext_bytes() const {
  return static_cast<std::size_t>(EVP_PKEY_get_size(handle_->key));
}

ServerKeyPair ServerKeyPair::generate(int bits) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr));
  if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), bits) <= 0) {
    throw CryptoError("RSA keygen init failed");
  }
  EVP_PKEY* key = nullptr;
  if (EVP_PKEY_keygen(ctx.get(), &key) <= 0) {
    throw CryptoError("RSA keygen failed");
  }
  ServerKeyPair kp;
  kp.handle_ = std::make_shared<ServerPublicKey::Handle>();
  kp.handle_->key = key;
  return kp;
}

ServerPublicKey ServerKeyPair::public_key() const {
  ServerPublicKey pk;
  pk.handle_ = handle_;
  return pk;
}

std::size_t ServerKeyPair::ciphertext_bytes() const {
  return static_cast<std::size_t>(EVP_PKEY_get_size(handle_->key));
}

Seed ServerKeyPair::decrypt_seed(
    std::span<const std::uint8_t> ciphertext) const {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(handle_->key, nullptr));
  if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) <= 0) {
    throw CryptoError("decrypt init failed");
  }
  set_oaep_sha256(ctx.get());
  std::vector<std::uint8_t> out(ciphertext_bytes());
  std::size_t outlen = out.size();
  if (EVP_PKEY_decrypt(ctx.get(), out.data(), &outlen, ciphertext.data(),
                       ciphertext.size()) <= 0) {
    throw CryptoError("seed decryption failed");
  }
  if (outlen != 32) throw CryptoError("decrypted seed has wrong length");
  Seed s;
  std::memcpy(s.bytes.data(), out.data(), 32);
  return s;
}

}  // namespace ffl
