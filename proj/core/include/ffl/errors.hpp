#pragma once

#include <stdexcept>

namespace ffl {

// Operand shapes/layouts disagree.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed bytes on the wire or on disk.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Protocol state machine violation: bad group element, replay, out-of-order
// message.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ciphertext failed to decrypt or verify.
struct CryptoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid simulation or CLI configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Local training produced a non-finite loss.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ffl
