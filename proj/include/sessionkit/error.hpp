#pragma once

#include <stdexcept>
#include <string>

namespace sessionkit {

// Base for every error the library throws. Recoverable anomalies (malformed
// log lines, aborted wake-ups, ineligible trend users) are counted instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source could not be opened or read.
class IoFailure : public Error {
 public:
  using Error::Error;
};

// Bad value in an input file; the message names file, line and field.
class InputError : public Error {
 public:
  using Error::Error;
};

// Seconds-of-day outside [0, 86400).
class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyGraph : public Error {
 public:
  using Error::Error;
};

// User without any non-noise session-cluster.
class EmptyProfile : public Error {
 public:
  using Error::Error;
};

// RRS requested but every cluster was filtered out.
class NoClusters : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

}  // namespace sessionkit
