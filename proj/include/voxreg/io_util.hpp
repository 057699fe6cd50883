#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace voxreg {

// Raised for file-format and filesystem problems; the CLI maps it to exit 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes the whole payload to <path>.tmp and renames it into place, so
// readers never observe partial files.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace voxreg
