#pragma once

#include <stdexcept>
#include <string>

namespace flab {

/// Raised when a caller breaks a documented precondition (e.g. sensing from a wall cell).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class MapIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The procedural generator could not place the requested rooms.
class LayoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PredictorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace flab
