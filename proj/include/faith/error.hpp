#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace faith {

/// Error thrown by every module on contract violations. The message carries
/// enough context (ids, line numbers, field names) to act on without a debugger.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

namespace detail {
inline void append_parts(std::ostringstream&) {}

template <typename T, typename... Rest>
void append_parts(std::ostringstream& out, const T& part, const Rest&... rest) {
    out << part;
    append_parts(out, rest...);
}
}  // namespace detail

template <typename... Parts>
[[noreturn]] void raise(const Parts&... parts) {
    std::ostringstream out;
    detail::append_parts(out, parts...);
    throw Error(out.str());
}

template <typename... Parts>
void require(bool condition, const Parts&... parts) {
    if (!condition) {
        raise(parts...);
    }
}

}  // namespace faith
