#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ffl/crypto.hpp"
#include "ffl/params.hpp"
#include "ffl/rng.hpp"

namespace ffl {

// Wire messages of the two-party fragment exchange. Big integers travel as
// fixed-width big-endian bytes, parameter vectors as little-endian words, and
// seed ciphertexts at the keypair's fixed size.

struct InitiatorHello {
  std::vector<std::uint8_t> dh_pub;    // g^a mod p
  std::vector<std::uint8_t> enc_seed;  // Enc_pkA(s_rk)
};

struct AcceptorPayload {
  std::vector<std::uint8_t> dh_pub;    // g^b mod p
  std::vector<std::uint8_t> enc_seed;  // Enc_pkA(s_rj)
  ParamWords c_full;                   // W_j ^ r_j ^ rho_j
  ParamWords c_frag;                   // (W_j . ~m) ^ rho_j
};

struct ReturnPayload {
  ParamWords c_full;  // W_k ^ r_k ^ rho_k
  ParamWords c_frag;  // (W_k . ~m) ^ rho_k
};

struct MixedSubmission {
  ParamWords enc_mixed;
  // The *partner's* OTP seed ciphertext: the seed swap is what lets the server
  // decrypt a submission without linking it to the originator of its pads.
  std::vector<std::uint8_t> enc_partner_seed;
  int sender = -1;  // pseudonym
};

// The ciphertext algebra, exposed for oracle tests with hand-picked masks and
// pads. A party sends its update twice: fully padded, and masked-complement
// padded. XORing both received ciphertexts into the own masked update cancels
// the rho pad and leaves the mix encrypted under the partner's r pad alone.
ParamWords otp_encrypt_full(const ParamWords& w, const ParamWords& pad_r,
                            const ParamWords& pad_rho);
ParamWords otp_encrypt_fragment(const ParamWords& w, const BitMask& mask,
                                const ParamWords& pad_rho);
ParamWords compose_encrypted_mix(const ParamWords& own, const BitMask& mask,
                                 const ParamWords& c_full,
                                 const ParamWords& c_frag);

// What an Initiator can derive about the Acceptor's pad from its transcript:
// exactly the pad words at mask-0 positions (where its own parameters, not the
// partner's, survive in the mix).
struct LeakageReport {
  std::vector<std::size_t> positions;            // mask == 0 coordinates
  std::vector<std::uint32_t> recovered_pad_words;  // r_j words there
};

// One Initiator half-session. Message order is hello -> finalize; a repeated
// or out-of-order call aborts with ProtocolError. `own_update` is the basis of
// this party's mixed submission; the fragments sent to the partner come from
// `outgoing_update`, which defaults to the same vector (they differ only for
// Strategy-3 adversaries).
class InitiatorSession {
 public:
  InitiatorSession(const DhGroup& group, ServerPublicKey server_pk,
                   int pseudonym, ParamWords own_update, DetRng rng);

  void set_outgoing_update(ParamWords w);

  InitiatorHello hello();
  std::pair<MixedSubmission, ReturnPayload> finalize(
      const AcceptorPayload& payload);

  // Valid after finalize().
  const BitMask& mask() const;
  LeakageReport view_leakage() const;

  // Test/simulator hooks.
  const Seed& seed_r() const { return seed_r_; }
  const Seed& seed_rho() const { return seed_rho_; }

 private:
  enum class State { created, hello_sent, done, aborted };

  const DhGroup& group_;
  ServerPublicKey server_pk_;
  int pseudonym_;
  ParamWords own_update_;
  ParamWords outgoing_update_;
  DetRng rng_;
  State state_ = State::created;
  std::vector<std::uint8_t> exponent_;
  Seed seed_r_, seed_rho_;
  BitMask mask_;
  ParamWords received_c_full_, received_c_frag_;
};

class AcceptorSession {
 public:
  AcceptorSession(const DhGroup& group, ServerPublicKey server_pk,
                  int pseudonym, ParamWords own_update, DetRng rng);

  void set_outgoing_update(ParamWords w);

  AcceptorPayload respond(const InitiatorHello& hello);
  MixedSubmission finalize(const ReturnPayload& ret);

  // Valid after respond().
  const BitMask& mask() const;

  const Seed& seed_r() const { return seed_r_; }
  const Seed& seed_rho() const { return seed_rho_; }

 private:
  enum class State { created, responded, done, aborted };

  const DhGroup& group_;
  ServerPublicKey server_pk_;
  int pseudonym_;
  ParamWords own_update_;
  ParamWords outgoing_update_;
  DetRng rng_;
  State state_ = State::created;
  Seed seed_r_, seed_rho_;
  BitMask mask_;
  std::vector<std::uint8_t> initiator_enc_seed_;
};

// Degenerate exchange for an unmatched participant: the update under a fresh
// self-chosen OTP, seed encrypted to the server. No mask is involved.
MixedSubmission self_submission(const ServerPublicKey& server_pk,
                                int pseudonym, const ParamWords& update,
                                DetRng rng);

// Server side: decrypt the swapped seed, regenerate the pad, strip it.
// Throws CryptoError when the seed ciphertext does not decrypt; the caller
// rejects the submission and flags the sender.
ParamWords server_decrypt(const MixedSubmission& submission,
                          const ServerKeyPair& server_key);

}  // namespace ffl
