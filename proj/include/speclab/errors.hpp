#pragma once
#include <stdexcept>
#include <string>

namespace speclab {

// Failure taxonomy used across the library. Each condition named by the
// operation contracts gets its own type so callers and tests can match on it.
struct SpeclabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionFailure : SpeclabError { using SpeclabError::SpeclabError; };
struct QuadratureFailure   : SpeclabError { using SpeclabError::SpeclabError; };
struct DegenerateMode      : SpeclabError { using SpeclabError::SpeclabError; };
struct SingularCoefficient : SpeclabError { using SpeclabError::SpeclabError; };
struct MultipleEigenvalues : SpeclabError { using SpeclabError::SpeclabError; };
struct SolverFailure       : SpeclabError { using SpeclabError::SpeclabError; };
struct PositivityViolation : SpeclabError { using SpeclabError::SpeclabError; };
struct OverflowGuard       : SpeclabError { using SpeclabError::SpeclabError; };
struct RankDeficiency      : SpeclabError { using SpeclabError::SpeclabError; };
struct ZoneViolation       : SpeclabError { using SpeclabError::SpeclabError; };
struct HypothesisViolation : SpeclabError { using SpeclabError::SpeclabError; };
struct CertificationFailure: SpeclabError { using SpeclabError::SpeclabError; };
struct PartitionFailure    : SpeclabError { using SpeclabError::SpeclabError; };
struct StepMismatch        : SpeclabError { using SpeclabError::SpeclabError; };
struct TrackingLoss        : SpeclabError { using SpeclabError::SpeclabError; };
struct ConfigError         : SpeclabError { using SpeclabError::SpeclabError; };

} // namespace speclab
