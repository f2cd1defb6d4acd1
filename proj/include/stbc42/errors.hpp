#pragma once

#include <stdexcept>
#include <string>

namespace stbc42 {

/// Gram-Schmidt hit a numerically dependent column (degenerate channel).
struct RankDeficient : std::runtime_error {
    explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

/// An exhaustive enumeration was requested beyond the configured budget.
struct SearchSpaceTooLarge : std::runtime_error {
    explicit SearchSpaceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

/// Constellation size is not a supported square QAM order.
struct NotSquareQam : std::runtime_error {
    explicit NotSquareQam(const std::string& what) : std::runtime_error(what) {}
};

/// A simulation configuration violates one of its invariants.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Result emission failed to write.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace stbc42
