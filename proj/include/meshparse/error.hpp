#pragma once

#include <stdexcept>
#include <string>

namespace meshparse {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated precondition of an operation (bad arguments, mismatched inputs).
class ContractError : public Error {
public:
    using Error::Error;
};

// Malformed input file. The message names the line or byte offset.
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally valid input that breaks a data invariant (e.g. face index out of range).
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class FusionError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ContractError(what);
}

}  // namespace meshparse
