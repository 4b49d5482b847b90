#include "ffl/exchange.hpp"

namespace ffl {

ParamWords otp_encrypt_full(const ParamWords& w, const ParamWords& pad_r,
                            const ParamWords& pad_rho) {
  return xor_words(xor_words(w, pad_r), pad_rho);
}

ParamWords otp_encrypt_fragment(const ParamWords& w, const BitMask& mask,
                                const ParamWords& pad_rho) {
  return xor_words(mask_select(w, mask.complement()), pad_rho);
}

ParamWords compose_encrypted_mix(const ParamWords& own, const BitMask& mask,
                                 const ParamWords& c_full,
                                 const ParamWords& c_frag) {
  ParamWords mix = xor_words(own, mask_select(own, mask));
  mix = xor_words(mix, c_full);
  return xor_words(mix, c_frag);
}

InitiatorSession::InitiatorSession(const DhGroup& group,
                                   ServerPublicKey server_pk, int pseudonym,
                                   ParamWords own_update, DetRng rng)
    : group_(group),
      server_pk_(std::move(server_pk)),
      pseudonym_(pseudonym),
      own_update_(std::move(own_update)),
      outgoing_update_(own_update_),
      rng_(std::move(rng)) {
  // Fresh per-session randomness: exponent and both OTP seeds.
  exponent_ = group_.random_exponent(rng_);
  seed_r_ = Seed::random(rng_);
  seed_rho_ = Seed::random(rng_);
}

void InitiatorSession::set_outgoing_update(ParamWords w) {
  if (state_ == State::done) {
    throw ProtocolError("session already finalized");
  }
  if (!(w.layout() == own_update_.layout())) {
    throw ShapeError("outgoing update layout mismatch");
  }
  outgoing_update_ = std::move(w);
}

InitiatorHello InitiatorSession::hello() {
  if (state_ != State::created) {
    throw ProtocolError("hello already sent");
  }
  state_ = State::hello_sent;
  return InitiatorHello{group_.dh_public(exponent_),
                        server_pk_.encrypt_seed(seed_r_)};
}

std::pair<MixedSubmission, ReturnPayload> InitiatorSession::finalize(
    const AcceptorPayload& payload) {
  if (state_ != State::hello_sent) {
    throw ProtocolError("finalize out of order");
  }
  state_ = State::aborted;  // until the payload checks out
  if (!(payload.c_full.layout() == own_update_.layout()) ||
      !(payload.c_frag.layout() == own_update_.layout())) {
    throw ProtocolError("payload layout mismatch");
  }
  const auto shared = group_.dh_shared(payload.dh_pub, exponent_);
  mask_ = derive_mask(shared, own_update_.size());

  const auto& layout = own_update_.layout();
  const ParamWords pad_r = gen_otp(seed_r_, layout);
  const ParamWords pad_rho = gen_otp(seed_rho_, layout);

  // (W_k)'_mix = W_k ^ (W_k . m) ^ (W_j ^ r_j ^ rho_j) ^ ((W_j . ~m) ^ rho_j)
  ParamWords mix =
      compose_encrypted_mix(own_update_, mask_, payload.c_full, payload.c_frag);

  ReturnPayload ret{otp_encrypt_full(outgoing_update_, pad_r, pad_rho),
                    otp_encrypt_fragment(outgoing_update_, mask_, pad_rho)};

  received_c_full_ = payload.c_full;
  received_c_frag_ = payload.c_frag;
  state_ = State::done;

  MixedSubmission sub{std::move(mix), payload.enc_seed, pseudonym_};
  return {std::move(sub), std::move(ret)};
}

const BitMask& InitiatorSession::mask() const {
  if (state_ != State::done) {
    throw ProtocolError("mask not derived yet");
  }
  return mask_;
}

LeakageReport InitiatorSession::view_leakage() const {
  if (state_ != State::done) {
    throw ProtocolError("leakage view requires a completed session");
  }
  // c_full ^ c_frag = (W_j . m) ^ r_j, so wherever m is 0 the masked term
  // vanishes and the pad word is exposed. Those are exactly the coordinates
  // where the initiator's own parameters, not W_j, survive in its mix.
  LeakageReport report;
  const ParamWords combined = xor_words(received_c_full_, received_c_frag_);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (!mask_.test(i)) {
      report.positions.push_back(i);
      report.recovered_pad_words.push_back(combined.word_at(i));
    }
  }
  return report;
}

AcceptorSession::AcceptorSession(const DhGroup& group,
                                 ServerPublicKey server_pk, int pseudonym,
                                 ParamWords own_update, DetRng rng)
    : group_(group),
      server_pk_(std::move(server_pk)),
      pseudonym_(pseudonym),
      own_update_(std::move(own_update)),
      outgoing_update_(own_update_),
      rng_(std::move(rng)) {}

void AcceptorSession::set_outgoing_update(ParamWords w) {
  if (state_ != State::created) {
    throw ProtocolError("outgoing update must be set before responding");
  }
  if (!(w.layout() == own_update_.layout())) {
    throw ShapeError("outgoing update layout mismatch");
  }
  outgoing_update_ = std::move(w);
}

AcceptorPayload AcceptorSession::respond(const InitiatorHello& hello) {
  if (state_ != State::created) {
    throw ProtocolError("respond already called");
  }
  state_ = State::aborted;  // until the hello checks out
  const auto exponent = group_.random_exponent(rng_);
  seed_r_ = Seed::random(rng_);
  seed_rho_ = Seed::random(rng_);

  // Throws ProtocolError on an invalid group element, aborting the session.
  const auto shared = group_.dh_shared(hello.dh_pub, exponent);
  mask_ = derive_mask(shared, own_update_.size());
  initiator_enc_seed_ = hello.enc_seed;

  const auto& layout = own_update_.layout();
  const ParamWords pad_r = gen_otp(seed_r_, layout);
  const ParamWords pad_rho = gen_otp(seed_rho_, layout);

  state_ = State::responded;
  return AcceptorPayload{
      group_.dh_public(exponent), server_pk_.encrypt_seed(seed_r_),
      otp_encrypt_full(outgoing_update_, pad_r, pad_rho),
      otp_encrypt_fragment(outgoing_update_, mask_, pad_rho)};
}

MixedSubmission AcceptorSession::finalize(const ReturnPayload& ret) {
  if (state_ != State::responded) {
    throw ProtocolError("finalize out of order");
  }
  if (!(ret.c_full.layout() == own_update_.layout()) ||
      !(ret.c_frag.layout() == own_update_.layout())) {
    throw ProtocolError("return payload layout mismatch");
  }
  // (W_j)'_mix = W_j ^ (W_j . m) ^ (W_k ^ r_k ^ rho_k) ^ ((W_k . ~m) ^ rho_k)
  ParamWords mix = compose_encrypted_mix(own_update_, mask_, ret.c_full,
                                         ret.c_frag);
  state_ = State::done;
  return MixedSubmission{std::move(mix), initiator_enc_seed_, pseudonym_};
}

const BitMask& AcceptorSession::mask() const {
  if (state_ != State::responded && state_ != State::done) {
    throw ProtocolError("mask not derived yet");
  }
  return mask_;
}

MixedSubmission self_submission(const ServerPublicKey& server_pk,
                                int pseudonym, const ParamWords& update,
                                DetRng rng) {
  const Seed seed = Seed::random(rng);
  const ParamWords pad = gen_otp(seed, update.layout());
  return MixedSubmission{xor_words(update, pad), server_pk.encrypt_seed(seed),
                         pseudonym};
}

ParamWords server_decrypt(const MixedSubmission& submission,
                          const ServerKeyPair& server_key) {
  const Seed seed = server_key.decrypt_seed(submission.enc_partner_seed);
  const ParamWords pad = gen_otp(seed, submission.enc_mixed.layout());
  return xor_words(submission.enc_mixed, pad);
}

}  // namespace ffl
