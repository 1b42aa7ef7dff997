#pragma once

#include <stdexcept>
#include <string>

namespace valuescape {

// All pipeline stages throw Error with a message naming the offending
// field, record or stage. Nothing else is thrown on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace valuescape
