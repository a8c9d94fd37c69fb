#ifndef TOWER_ERRORS_HPP
#define TOWER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tower {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an interval comparison stays undecided at the precision cap.
struct PrecisionCapExceeded : Error {
    explicit PrecisionCapExceeded(const std::string& msg) : Error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// The rational prime fails Dedekind's criterion for Z[theta]; the caller
// must pick another prime.
struct GoodPrimeRequired : Error {
    explicit GoodPrimeRequired(const std::string& msg) : Error(msg) {}
};

// An enumeration hit its element budget; partial counts are in the message.
struct BudgetExceeded : Error {
    explicit BudgetExceeded(const std::string& msg) : Error(msg) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

struct DetNotOne : Error {
    explicit DetNotOne(const std::string& msg) : Error(msg) {}
};

struct RelatorFailure : Error {
    explicit RelatorFailure(const std::string& msg) : Error(msg) {}
};

struct PresentationRequired : Error {
    explicit PresentationRequired(const std::string& msg) : Error(msg) {}
};

// A certified inequality that the underlying theory guarantees failed to
// verify.  Surfacing this halts the run with a dedicated exit code.
struct FalsifiedInvariant : Error {
    explicit FalsifiedInvariant(const std::string& msg) : Error(msg) {}
};

} // namespace tower

#endif
