#pragma once

#include <stdexcept>
#include <string>

namespace fsdlab {

/// Domain error with a stable machine-readable name (printed by the CLI on exit 1).
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define FSDLAB_ERROR_TYPE(NAME)                                        \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& what) : Error(#NAME, what) {} \
    }

FSDLAB_ERROR_TYPE(ZeroMass);
FSDLAB_ERROR_TYPE(Empty);
FSDLAB_ERROR_TYPE(EmptyInput);
FSDLAB_ERROR_TYPE(OutOfRange);
FSDLAB_ERROR_TYPE(ParseError);
FSDLAB_ERROR_TYPE(Underflow);
FSDLAB_ERROR_TYPE(Unsupported);
FSDLAB_ERROR_TYPE(UnsupportedMethod);
FSDLAB_ERROR_TYPE(Infeasible);
FSDLAB_ERROR_TYPE(AllEvaporated);
FSDLAB_ERROR_TYPE(CapSaturated);

#undef FSDLAB_ERROR_TYPE

}  // namespace fsdlab
