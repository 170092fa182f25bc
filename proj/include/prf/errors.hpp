#pragma once

#include <stdexcept>
#include <string>

namespace prf {

// Input outside the mathematical domain of an operation (e.g. a point off [0,1)^d).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid model, function or budget parameters.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A data structure was found in a state its construction should have ruled out.
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values or a failed numeric check; `partial` carries whatever was computed.
struct NumericError : std::runtime_error {
    NumericError(const std::string& what, std::string partial_report = {})
        : std::runtime_error(what), partial(std::move(partial_report)) {}
    std::string partial;
};

}  // namespace prf
