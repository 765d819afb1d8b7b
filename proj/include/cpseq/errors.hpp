#pragma once
// Error taxonomy shared by all cpseq modules.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cpseq {

enum class Errc {
    validation,     // bad input to an operation
    configuration,  // bad or missing static configuration
    range,          // value outside a schema-declared bound
    integrity,      // digest chain or structural verification failure
    storage,        // persistence layer unavailable or corrupt
    authorization,  // actor lacks the right to perform the action
    unknown_asset,  // identity not present in the relevant view
    uniqueness,     // would violate an at-most-once rule (e.g. double mint)
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

// Logical time shared by every module; a single global tick drives the
// simulation (sensors, proxies, ledger rounds).
using Tick = std::uint64_t;

}  // namespace cpseq
