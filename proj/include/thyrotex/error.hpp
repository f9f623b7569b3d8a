#pragma once

#include <stdexcept>
#include <string>

namespace thyrotex {

// All library failures surface as this type; the message names the offending
// input (path, row, dimension) where one exists.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace thyrotex
