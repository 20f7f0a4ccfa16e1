#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evdeg {

/// Error categories surfaced by the CLI as machine-parseable codes.
enum class errc {
    usage,    // bad arguments or option combinations
    parse,    // malformed input file
    domain,   // estimator precondition violated (empty tail, bad k, ...)
    io,       // filesystem failure
    numeric,  // degenerate arithmetic (zero denominator, singular term)
};

inline std::string_view errc_name(errc c) {
    switch (c) {
        case errc::usage: return "usage";
        case errc::parse: return "parse";
        case errc::domain: return "domain";
        case errc::io: return "io";
        case errc::numeric: return "numeric";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    errc category() const noexcept { return category_; }

private:
    errc category_;
};

}  // namespace evdeg
