#pragma once

#include <stdexcept>
#include <string>

namespace aclp {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (CSV, BIF, timestamps, JSON configs).
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input that violates a semantic contract
// (cycle in a network, CPT row not summing to one, unknown variable).
struct DataError : Error {
    using Error::Error;
};

// The request exceeds a documented size cap of an exact algorithm.
struct CapabilityError : Error {
    using Error::Error;
};

}  // namespace aclp
