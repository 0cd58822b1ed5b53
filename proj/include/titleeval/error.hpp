#pragma once

#include <stdexcept>
#include <string>

namespace titleeval {

// Every failure the library reports surfaces as this type; the message is a
// single line suitable for a CLI diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace titleeval
