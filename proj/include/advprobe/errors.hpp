#pragma once

#include <stdexcept>
#include <string>

namespace advprobe {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (names the offending line where possible).
class ParseError : public Error {
public:
    using Error::Error;
};

// Data that parses but violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Unknown adverb or missing entry.
class LookupError : public Error {
public:
    using Error::Error;
};

// Bad arguments to an operation (e.g. zero or multiple mask slots).
class InputError : public Error {
public:
    using Error::Error;
};

// Metric requested on degenerate input (all ties, zero variance, empty).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// Cosine of a zero vector.
class UndefinedCosineError : public Error {
public:
    using Error::Error;
};

// Scale reference collapsed (v_top == v_end).
class DegenerateReferenceError : public Error {
public:
    using Error::Error;
};

// Character span does not line up with the provider's tokenization.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Model backend failure (load, transport, protocol).
class GatewayError : public Error {
public:
    using Error::Error;
};

// Operation requires a capability the configured model lacks.
class CapabilityError : public Error {
public:
    using Error::Error;
};

} // namespace advprobe
