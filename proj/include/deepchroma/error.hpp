#ifndef DEEPCHROMA_ERROR_HPP
#define DEEPCHROMA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace deepchroma {

/// Malformed input data, files, or models. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or preconditions supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace deepchroma

#endif  // DEEPCHROMA_ERROR_HPP
