#pragma once

#include <stdexcept>
#include <string>

namespace nsm {

// Invalid argument or configuration value.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A photon-number sum could not be truncated within tolerance.
class TruncationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A quantity is undefined for the given inputs (e.g. conditioning on a zero-probability event).
class DegenerateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A parameter choice violates a required inequality; the message names it.
class ConstraintError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Malformed or out-of-order protocol message.
class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what)
{
  if (!ok)
    throw DomainError(what);
}

} // namespace nsm
