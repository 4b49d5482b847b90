#include "ffl/exchange.hpp"

#include <algorithm>
#include <bit>

#include "doctest.h"

#include "ffl/rng.hpp"

using namespace ffl;

namespace {

const ServerKeyPair& test_keypair() {
  static ServerKeyPair kp = ServerKeyPair::generate();
  return kp;
}

ParamWords random_update(DetRng& rng, std::size_t n) {
  std::vector<float> vals(n);
  for (auto& v : vals) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return ParamWords::from_floats(vals, LayerLayout::flat(n));
}

BitMask make_mask(std::initializer_list<int> bits) {
  BitMask m(bits.size());
  std::size_t i = 0;
  for (const int b : bits) m.set(i++, b != 0);
  return m;
}

struct ExchangeRun {
  ParamWords w_k, w_j;
  ParamWords mix_k, mix_j;  // decrypted
  BitMask mask;
  InitiatorSession* initiator = nullptr;
};

// Drives one complete exchange + server decryption.
ExchangeRun run_exchange(DetRng& rng, std::size_t n,
                         InitiatorSession& init, AcceptorSession& acc,
                         const ParamWords& w_k, const ParamWords& w_j) {
  (void)rng;
  (void)n;
  ExchangeRun out{w_k, w_j, ParamWords(), ParamWords(), BitMask(), &init};
  auto hello = init.hello();
  auto payload = acc.respond(hello);
  auto [sub_k, ret] = init.finalize(payload);
  auto sub_j = acc.finalize(ret);
  out.mix_k = server_decrypt(sub_k, test_keypair());
  out.mix_j = server_decrypt(sub_j, test_keypair());
  out.mask = init.mask();
  return out;
}

}  // namespace

TEST_SUITE("exchange") {

TEST_CASE("mix algebra with forced masks") {
  DetRng rng(21);
  const auto layout = LayerLayout::flat(4);
  const auto w_k = random_update(rng, 4);
  const auto w_j = random_update(rng, 4);
  const ParamWords r_j = gen_otp(Seed::random(rng), layout);
  const ParamWords rho_j = gen_otp(Seed::random(rng), layout);

  const BitMask m = make_mask({1, 0, 1, 0});
  const auto c_full = otp_encrypt_full(w_j, r_j, rho_j);
  const auto c_frag = otp_encrypt_fragment(w_j, m, rho_j);

  // rho_j cancels: the encrypted mix is the plain mix under r_j alone.
  const auto enc_mix = compose_encrypted_mix(w_k, m, c_full, c_frag);
  const auto mix = xor_words(enc_mix, r_j);
  CHECK(mix.word_at(0) == w_j.word_at(0));
  CHECK(mix.word_at(1) == w_k.word_at(1));
  CHECK(mix.word_at(2) == w_j.word_at(2));
  CHECK(mix.word_at(3) == w_k.word_at(3));

  // All-zero mask: no exchange. All-one mask: full swap.
  const BitMask zeros(4);
  const auto mix0 = xor_words(
      compose_encrypted_mix(w_k, zeros,
                            otp_encrypt_full(w_j, r_j, rho_j),
                            otp_encrypt_fragment(w_j, zeros, rho_j)),
      r_j);
  CHECK(mix0 == w_k);
  const BitMask ones = zeros.complement();
  const auto mix1 = xor_words(
      compose_encrypted_mix(w_k, ones,
                            otp_encrypt_full(w_j, r_j, rho_j),
                            otp_encrypt_fragment(w_j, ones, rho_j)),
      r_j);
  CHECK(mix1 == w_j);
}

TEST_CASE("rho cancellation is exact on symbolic words") {
  // Give every symbol its own bit so XOR parity is visible.
  const auto layout = LayerLayout::flat(3);
  auto symbol = [&](std::uint32_t bit) {
    return ParamWords(std::vector<std::uint32_t>(3, bit), layout);
  };
  const auto w_k = symbol(1u << 0);
  const auto w_j = symbol(1u << 1);
  const auto r_j = symbol(1u << 2);
  const auto rho_j = symbol(1u << 3);

  for (const auto& m : {make_mask({0, 0, 0}), make_mask({1, 1, 1}),
                        make_mask({1, 0, 1})}) {
    const auto enc_mix = compose_encrypted_mix(
        w_k, m, otp_encrypt_full(w_j, r_j, rho_j),
        otp_encrypt_fragment(w_j, m, rho_j));
    for (std::size_t i = 0; i < 3; ++i) {
      const auto word = enc_mix.word_at(i);
      CHECK((word & (1u << 3)) == 0u);       // no rho_j anywhere
      CHECK((word & (1u << 2)) != 0u);       // exactly one r_j
      const bool has_wj = (word & (1u << 1)) != 0u;
      const bool has_wk = (word & (1u << 0)) != 0u;
      CHECK(has_wj == m.test(i));
      CHECK(has_wk == !m.test(i));
    }
  }
}

TEST_CASE("full session round trip partitions the coordinates") {
  DetRng rng(22);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const std::size_t n = 64;

  for (int trial = 0; trial < 5; ++trial) {
    const auto w_k = random_update(rng, n);
    const auto w_j = random_update(rng, n);
    InitiatorSession init(group, pk, 0, w_k, rng.fork("i", trial));
    AcceptorSession acc(group, pk, 1, w_j, rng.fork("a", trial));
    const auto run = run_exchange(rng, n, init, acc, w_k, w_j);

    CHECK(acc.mask() == run.mask);
    for (std::size_t i = 0; i < n; ++i) {
      if (run.mask.test(i)) {
        CHECK(run.mix_k.word_at(i) == w_j.word_at(i));
        CHECK(run.mix_j.word_at(i) == w_k.word_at(i));
      } else {
        CHECK(run.mix_k.word_at(i) == w_k.word_at(i));
        CHECK(run.mix_j.word_at(i) == w_j.word_at(i));
      }
    }
  }
}

TEST_CASE("acceptor payload structure") {
  DetRng rng(23);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const std::size_t n = 16;
  const auto w_k = random_update(rng, n);
  const auto w_j = random_update(rng, n);

  InitiatorSession init(group, pk, 0, w_k, rng.fork("i"));
  AcceptorSession acc(group, pk, 1, w_j, rng.fork("a"));
  auto hello = init.hello();
  auto payload = acc.respond(hello);

  CHECK(payload.c_full.layout() == w_j.layout());
  CHECK(payload.c_frag.layout() == w_j.layout());
  CHECK(test_keypair().decrypt_seed(hello.enc_seed) == init.seed_r());
  CHECK(test_keypair().decrypt_seed(payload.enc_seed) == acc.seed_r());

  // c_full ^ c_frag equals r_j exactly where the mask is 0 (Prop. 1's
  // mechanical core), and (W_j . m) ^ r_j where it is 1.
  const auto r_j = gen_otp(acc.seed_r(), w_j.layout());
  const auto rho_j = gen_otp(acc.seed_rho(), w_j.layout());
  const auto combined = xor_words(payload.c_full, payload.c_frag);
  const auto& m = acc.mask();
  for (std::size_t i = 0; i < n; ++i) {
    if (!m.test(i)) {
      CHECK(combined.word_at(i) == r_j.word_at(i));
    } else {
      CHECK(combined.word_at(i) == (w_j.word_at(i) ^ r_j.word_at(i)));
    }
  }
  // With rho known (test hook), c_full strips back to W_j.
  CHECK(xor_words(xor_words(payload.c_full, rho_j), r_j) == w_j);
}

TEST_CASE("initiator leakage view is exactly the mask-0 set") {
  DetRng rng(24);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const std::size_t n = 48;
  const auto w_k = random_update(rng, n);
  const auto w_j = random_update(rng, n);

  InitiatorSession init(group, pk, 0, w_k, rng.fork("i"));
  AcceptorSession acc(group, pk, 1, w_j, rng.fork("a"));
  const auto run = run_exchange(rng, n, init, acc, w_k, w_j);
  const auto leak = init.view_leakage();

  std::vector<std::size_t> zero_positions;
  for (std::size_t i = 0; i < n; ++i) {
    if (!run.mask.test(i)) zero_positions.push_back(i);
  }
  CHECK(leak.positions == zero_positions);

  const auto r_j = gen_otp(acc.seed_r(), w_j.layout());
  for (std::size_t t = 0; t < leak.positions.size(); ++t) {
    const auto pos = leak.positions[t];
    CHECK(leak.recovered_pad_words[t] == r_j.word_at(pos));
    // Where the pad leaks, W_j does not survive in k's mix.
    CHECK(run.mix_k.word_at(pos) == w_k.word_at(pos));
  }
}

TEST_CASE("sessions are fresh per run") {
  DetRng rng(25);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const auto w = random_update(rng, 8);
  InitiatorSession s1(group, pk, 0, w, rng.fork("s", 1));
  InitiatorSession s2(group, pk, 0, w, rng.fork("s", 2));
  const auto h1 = s1.hello();
  const auto h2 = s2.hello();
  CHECK(h1.dh_pub != h2.dh_pub);
  CHECK(!(s1.seed_r() == s2.seed_r()));
  CHECK(!(s1.seed_rho() == s2.seed_rho()));
}

TEST_CASE("message ordering is enforced") {
  DetRng rng(26);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const auto w = random_update(rng, 8);

  InitiatorSession init(group, pk, 0, w, rng.fork("i"));
  AcceptorSession acc(group, pk, 1, w, rng.fork("a"));

  AcceptorPayload fake;  // finalize before hello
  fake.c_full = w;
  fake.c_frag = w;
  CHECK_THROWS_AS(init.finalize(fake), ProtocolError);

  ReturnPayload ret{w, w};  // finalize before respond
  CHECK_THROWS_AS(acc.finalize(ret), ProtocolError);

  auto hello = init.hello();
  CHECK_THROWS_AS(init.hello(), ProtocolError);  // replay

  auto payload = acc.respond(hello);
  CHECK_THROWS_AS(acc.respond(hello), ProtocolError);  // replay

  auto [sub, ret2] = init.finalize(payload);
  CHECK_THROWS_AS(init.finalize(payload), ProtocolError);  // replay
}

TEST_CASE("invalid group element aborts the acceptor") {
  DetRng rng(27);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const auto w = random_update(rng, 8);

  AcceptorSession acc(group, pk, 1, w, rng.fork("a"));
  InitiatorHello bad;
  bad.dh_pub = std::vector<std::uint8_t>(256, 0);
  bad.dh_pub.back() = 1;  // the unit element is rejected
  bad.enc_seed = std::vector<std::uint8_t>(384, 0);
  CHECK_THROWS_AS(acc.respond(bad), ProtocolError);
  // The session stays aborted afterwards.
  InitiatorSession init(group, pk, 0, w, rng.fork("i"));
  CHECK_THROWS_AS(acc.respond(init.hello()), ProtocolError);
}

TEST_CASE("server decryption failures reject the submission") {
  DetRng rng(28);
  const auto& group = DhGroup::named("modp2048-256");
  const auto pk = test_keypair().public_key();
  const std::size_t n = 32;
  const auto w_k = random_update(rng, n);
  const auto w_j = random_update(rng, n);

  InitiatorSession init(group, pk, 0, w_k, rng.fork("i"));
  AcceptorSession acc(group, pk, 1, w_j, rng.fork("a"));
  auto hello = init.hello();
  auto payload = acc.respond(hello);
  auto [sub, ret] = init.finalize(payload);

  auto tampered = sub;
  tampered.enc_partner_seed[17] ^= 0x01;
  CHECK_THROWS_AS(server_decrypt(tampered, test_keypair()), CryptoError);

  // Decrypting with the wrong pad garbles roughly half of all bits.
  const auto truth = server_decrypt(sub, test_keypair());
  const auto wrong_pad = gen_otp(Seed::random(rng), w_k.layout());
  const auto garbled = xor_words(sub.enc_mixed, wrong_pad);
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    flipped += static_cast<std::size_t>(
        std::popcount(garbled.word_at(i) ^ truth.word_at(i)));
  }
  CHECK(static_cast<double>(flipped) >= 0.45 * 32.0 * n);
}

TEST_CASE("self submission round trips") {
  DetRng rng(29);
  const auto pk = test_keypair().public_key();
  const auto w = random_update(rng, 24);
  const auto sub = self_submission(pk, 7, w, rng.fork("self"));
  CHECK(sub.sender == 7);
  CHECK(server_decrypt(sub, test_keypair()) == w);
}

}  // TEST_SUITE
