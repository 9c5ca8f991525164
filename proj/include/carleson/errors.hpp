#pragma once

#include <stdexcept>
#include <string>

namespace carleson {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instance data violates a structural requirement (ordering, positivity,
/// lengths, atoms placed on the node sequence, ...).
class InvalidInstance : public Error {
 public:
  using Error::Error;
};

/// A function or kernel was requested at one of the nodes, where it is
/// undefined.
class PointOnGamma : public InvalidInstance {
 public:
  using InvalidInstance::InvalidInstance;
};

/// A test function was requested for an index whose defining sum is empty.
class EmptyRange : public Error {
 public:
  using Error::Error;
};

}  // namespace carleson
