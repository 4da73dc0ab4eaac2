#pragma once

#include <stdexcept>
#include <string>

namespace mrdaw {

enum class Errc {
  invalid_argument,
  empty_capture,
  no_loops,
  decode,
  parse,
  io,
  bind,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mrdaw
