#pragma once

#include <string>
#include <utility>

namespace thinwalk {

enum class Membership { In, Out, Unknown };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::In: return "IN";
        case Membership::Out: return "OUT";
        case Membership::Unknown: return "UNKNOWN";
    }
    return "?";
}

/// IN and OUT always carry a witness; UNKNOWN carries the reason.
struct OracleVerdict {
    Membership status = Membership::Unknown;
    std::string certificate;

    static OracleVerdict in(std::string why) { return {Membership::In, std::move(why)}; }
    static OracleVerdict out(std::string why) { return {Membership::Out, std::move(why)}; }
    static OracleVerdict unknown(std::string why) { return {Membership::Unknown, std::move(why)}; }

    bool is_in() const noexcept { return status == Membership::In; }
    bool is_out() const noexcept { return status == Membership::Out; }
    bool is_unknown() const noexcept { return status == Membership::Unknown; }
};

}  // namespace thinwalk
