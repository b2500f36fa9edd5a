#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace surrocal {

// Thrown for any violated precondition or malformed input. `what()` carries
// enough context (field path, offending value) to act on from the CLI.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw error(msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

inline double sigmoid(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline constexpr const char* kVersion = "0.1.0";

} // namespace surrocal
