#pragma once

#include <stdexcept>
#include <string>

namespace superbsde {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// problem / expression evaluation
struct EvaluationError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// supconv
struct GrowthError : Error { using Error::Error; };

// forward
struct SimulationError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };

// pde
struct BlowUpError : Error { using Error::Error; };
struct CflError : Error { using Error::Error; };
struct FitError : Error { using Error::Error; };

// mcsolver
struct OccupancyError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };

// bounds
struct KindError : Error { using Error::Error; };
struct TerminalTimeError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct IterationError : Error { using Error::Error; };
struct GradientError : Error { using Error::Error; };

// verify / cli
struct DominanceError : Error { using Error::Error; };
struct CalibrationError : Error { using Error::Error; };
struct ManifestError : Error { using Error::Error; };

} // namespace superbsde
