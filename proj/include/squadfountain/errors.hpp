#pragma once

#include <stdexcept>
#include <string>

namespace sqf {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class MalformedInput : public Error {
 public:
  using Error::Error;
};

// Raised when a ripple symbol is requested from an empty ripple.
class StalledDecoder : public Error {
 public:
  using Error::Error;
};

class DopingUnavailable : public Error {
 public:
  using Error::Error;
};

class ExhaustedNetwork : public Error {
 public:
  using Error::Error;
};

// The expected-doping iteration did not reach its threshold within k rounds.
class Diverged : public Error {
 public:
  using Error::Error;
};

}  // namespace sqf
