#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qstab {

// Base for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidDimension : Error {
    explicit InvalidDimension(const std::string& m) : Error("invalid_dimension", m) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& m) : Error("shape_mismatch", m) {}
};

struct NormalizationError : Error {
    explicit NormalizationError(const std::string& m) : Error("normalization", m) {}
};

struct InvalidState : Error {
    explicit InvalidState(const std::string& m) : Error("invalid_state", m) {}
};

class TruncationTooSmall : public Error {
public:
    TruncationTooSmall(const std::string& m, int required_dim)
        : Error("truncation_too_small", m), required_dim_(required_dim) {}
    int required_dim() const noexcept { return required_dim_; }

private:
    int required_dim_;
};

struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& m) : Error("degenerate_input", m) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& m) : Error("capacity", m) {}
};

struct UnsupportedStructure : Error {
    explicit UnsupportedStructure(const std::string& m) : Error("unsupported_structure", m) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& m) : Error("precondition", m) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& m) : Error("invalid_argument", m) {}
};

// Raised when a numerical contract (trace drift, positivity) is broken
// during a computation.
struct NumericalContractError : Error {
    explicit NumericalContractError(const std::string& m) : Error("numerical_contract", m) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& m, std::size_t offset, std::vector<std::string> expected)
        : Error("parse_error", m), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(const std::string& name, std::size_t offset, std::vector<std::string> known)
        : Error("unknown_identifier", build_message(name, offset, known)),
          name_(name), offset_(offset), known_(std::move(known)) {}

    const std::string& name() const noexcept { return name_; }
    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& known() const noexcept { return known_; }

private:
    static std::string build_message(const std::string& name, std::size_t offset,
                                     const std::vector<std::string>& known) {
        std::string msg = "unknown identifier '" + name + "' at offset " + std::to_string(offset) +
                          "; known params: [";
        for (std::size_t i = 0; i < known.size(); ++i) {
            if (i) msg += ", ";
            msg += known[i];
        }
        return msg + "]";
    }

    std::string name_;
    std::size_t offset_;
    std::vector<std::string> known_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config_error", m) {}
};

}  // namespace qstab
