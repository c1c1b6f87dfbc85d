#pragma once

#include <stdexcept>
#include <string>

namespace riskscope {

// Error taxonomy used across the library.  Every throw carries a message that
// names the offending argument or the unsupported capability.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid inputs: dimension mismatches, out-of-domain parameters, empty sets.
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Structurally valid request that this build does not support.
struct CapabilityError : Error {
    explicit CapabilityError(const std::string& msg) : Error(msg) {}
};

// Malformed external data (CSV/JSON).  line/col are 1-based; col counts
// fields for CSV and is 0 when not applicable.
struct ParseError : Error {
    int line = 0;
    int col = 0;
    ParseError(const std::string& msg, int line_, int col_ = 0)
        : Error(msg + " (line " + std::to_string(line_) +
                (col_ > 0 ? ", column " + std::to_string(col_) : "") + ")"),
          line(line_), col(col_) {}
};

// Structurally invalid document: missing or mistyped fields.  The message
// names the field and the enclosing object.
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

// Iterative routine exhausted its budget before reaching tolerance.
struct ConvergenceError : Error {
    double best_residual;
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg + " (best residual " + std::to_string(residual) + ")"),
          best_residual(residual) {}
};

// Internal consistency failure (bracket collapse, impossible state).
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Experiment configuration problems (schema-valid JSON but unusable values).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace riskscope
