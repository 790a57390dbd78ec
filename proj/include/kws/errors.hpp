#pragma once

#include <stdexcept>
#include <string>

namespace kws {

// Error taxonomy. The CLI maps these onto exit codes:
// usage/config -> 2, data/format -> 3, numerical abort -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };        // dimension mismatch
struct ParamError : Error { using Error::Error; };        // invalid argument or config value
struct VocabError : Error { using Error::Error; };        // phoneme id out of range
struct AlignmentError : Error { using Error::Error; };    // spans not a partition, length mismatch
struct ContractError : Error { using Error::Error; };     // API misuse (e.g. backward on non-scalar)
struct GenerationError : Error { using Error::Error; };   // corpus generation infeasible
struct AugmentationError : Error { using Error::Error; }; // edit planning exhausted retries
struct SamplingError : Error { using Error::Error; };     // memory bank sampling infeasible
struct FormatError : Error { using Error::Error; };       // parse or serialize failure
struct MetricError : Error { using Error::Error; };       // degenerate metric input
struct CompatibilityError : Error { using Error::Error; };// checkpoint/dataset hash mismatch
struct NumericError : Error { using Error::Error; };      // non-finite loss abort
struct UsageError : Error { using Error::Error; };        // CLI usage

}  // namespace kws
