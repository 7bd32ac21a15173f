// Exception hierarchy. The three base classes map onto CLI exit codes:
// ConfigError -> 2, SolverError -> 3, IoError -> 4.
#pragma once

#include <stdexcept>
#include <string>

namespace insobs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : ConfigError {
    using ConfigError::ConfigError;
};
struct ValidationError : ConfigError {
    using ConfigError::ConfigError;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// attitude primitives
struct NotARotation : SolverError {
    using SolverError::SolverError;
};
struct DegenerateDirections : SolverError {
    using SolverError::SolverError;
};
struct Inconsistent : SolverError {
    using SolverError::SolverError;
};
struct ConstantDirection : SolverError {
    using SolverError::SolverError;
};
struct NormInfeasible : SolverError {
    using SolverError::SolverError;
};
struct NotPerpendicular : SolverError {
    using SolverError::SolverError;
};

// simulator
struct OutsideRotation : SolverError {
    using SolverError::SolverError;
};
struct SegmentTooShort : SolverError {
    using SolverError::SolverError;
};

// observers
struct CoplanarPositions : SolverError {
    using SolverError::SolverError;
};
struct SingularGram : SolverError {
    using SolverError::SolverError;
};
struct VanishingFdot : SolverError {
    using SolverError::SolverError;
};
struct InconsistentSegment : SolverError {
    using SolverError::SolverError;
};
struct NoFeasiblePair : SolverError {
    using SolverError::SolverError;
};
struct IllConditionedGram : SolverError {
    using SolverError::SolverError;
};
struct DependentAxes : SolverError {
    using SolverError::SolverError;
};
struct ParallelFdot : SolverError {
    using SolverError::SolverError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace insobs
