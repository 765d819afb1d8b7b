#include "cpseq/errors.hpp"

namespace cpseq {

const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::validation: return "validation";
        case Errc::configuration: return "configuration";
        case Errc::range: return "range";
        case Errc::integrity: return "integrity";
        case Errc::storage: return "storage";
        case Errc::authorization: return "authorization";
        case Errc::unknown_asset: return "unknown_asset";
        case Errc::uniqueness: return "uniqueness";
    }
    return "unknown";
}

}  // namespace cpseq
