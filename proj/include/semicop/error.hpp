#pragma once

#include <stdexcept>
#include <string>

namespace semicop {

// Exit-code classes used by the CLI: usage/config -> 1, data -> 2, numerical -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Parameter outside a copula family's domain, or a point on the boundary of (0,1)^d.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace semicop
