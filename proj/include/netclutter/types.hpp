#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace netclutter {

inline constexpr int kSchemaVersion = 1;

/// Bad arguments, malformed input files, violated preconditions. CLI exit 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem / parse failures. CLI exit 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A mixture fit collapsed onto a single component. CLI exit 3 unless allowed.
struct DegenerateFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Wall-clock budget exceeded (whole-network runs on large inputs).
struct TimeBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vertex {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Segment {
    int id = 0;
    int a = 0;
    int b = 0;
    double length = 0.0;
};

/// A location on the network: arclength offset from vertex `a` of a segment.
struct NetPoint {
    int segment_id = 0;
    double offset = 0.0;
};

enum class Label : std::uint8_t { clutter = 0, feature = 1 };

inline const char* to_string(Label l) {
    return l == Label::feature ? "feature" : "clutter";
}

inline Label label_from_string(std::string_view s) {
    if (s == "feature") return Label::feature;
    if (s == "clutter") return Label::clutter;
    throw ValidationError("unknown label: " + std::string(s));
}

}  // namespace netclutter
