#pragma once

#include <stdexcept>
#include <string>

namespace talkdet {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File missing / unreadable / unwritable.
struct IoError : Error {
    using Error::Error;
};

// Syntactically broken input (bad JSON, bad PNM header, bad CSV).
struct ParseError : Error {
    using Error::Error;
};

// Well-formed input that violates a documented invariant
// (size mismatch, duplicate annotation, single-class dataset, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Operands whose dimensions do not agree.
struct DimensionError : Error {
    using Error::Error;
};

// Serialized artifact with an unknown format_version.
struct VersionError : Error {
    using Error::Error;
};

// Serialized artifact that is truncated or structurally damaged.
struct CorruptError : Error {
    using Error::Error;
};

} // namespace talkdet
