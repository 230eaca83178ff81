#pragma once

#include <stdexcept>
#include <string>

namespace relsem {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shape / axis disagreements.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Token or label id outside its vocabulary.
class VocabError : public Error {
public:
    using Error::Error;
};

// An attention or loss mask that excludes every position.
class MaskError : public Error {
public:
    using Error::Error;
};

// Unknown label string or target id out of range.
class LabelError : public Error {
public:
    using Error::Error;
};

// An instance violating its own invariants (overlapping spans, bad indices).
class InstanceError : public Error {
public:
    using Error::Error;
};

// Malformed input file (missing field, ragged columns).
class FormatError : public Error {
public:
    using Error::Error;
};

// Encoded template cannot fit max-positions even after truncation.
class LengthError : public Error {
public:
    using Error::Error;
};

// Gold/predicted lists that cannot be aligned.
class PairingError : public Error {
public:
    using Error::Error;
};

// Checkpoint file unreadable or version mismatch.
class CheckpointError : public Error {
public:
    using Error::Error;
};

// Bad run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A gradient or loss went NaN/Inf; message names the culprit.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

}  // namespace relsem
