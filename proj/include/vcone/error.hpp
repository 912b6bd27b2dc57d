#pragma once
#include <stdexcept>
#include <string>

namespace vcone {

// Bad arguments or malformed input files.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A strategy table has no entry for a transcript that the geometry realizes.
struct totality_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Results that contradict each other (e.g. S > 7 without signalling).
struct internal_inconsistency : std::logic_error {
    using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw invalid_input(what);
}

}  // namespace vcone
