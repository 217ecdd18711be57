#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghostflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid model parameters (non-finite input, singular kinetic tensor, hbar <= 0).
struct ModelError : Error {
    using Error::Error;
};

// nu^2 == Omega: the second-representation denominators vanish.
struct DegeneracyError : ModelError {
    using ModelError::ModelError;
};

// Non-positive step, or a trajectory grid the packet series does not span.
struct GridError : Error {
    using Error::Error;
};

// |det X(t)| below threshold in the Riccati linearization (focal point).
struct OracleSingularityError : Error {
    using Error::Error;
};

// Density sampling requested for a packet with non-positive amplitude matrix.
struct NonNormalisableDensityError : Error {
    using Error::Error;
};

// Amplitude R underflowed along a growing direction of a non-normalisable packet.
struct AmplitudeUnderflowError : Error {
    using Error::Error;
};

// Configuration file / preset problems; carries every violated invariant.
struct ScenarioError : Error {
    explicit ScenarioError(const std::string& context, std::vector<std::string> issues);
    std::vector<std::string> issues;
};

// No regime branch fired; carries the measured evidence.
struct InconclusiveRegimeError : Error {
    explicit InconclusiveRegimeError(std::map<std::string, double> evidence);
    std::map<std::string, double> evidence;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace ghostflow
