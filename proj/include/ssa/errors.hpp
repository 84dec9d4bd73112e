#pragma once

#include <stdexcept>

namespace ssa {

// Failure modes named after what went wrong, so callers and tests can catch
// them individually. All derive from std::runtime_error.
struct EmptyInitialSample : std::runtime_error { using std::runtime_error::runtime_error; };
struct ZeroSurvivors : std::runtime_error { using std::runtime_error::runtime_error; };
struct NonPositiveLevels : std::runtime_error { using std::runtime_error::runtime_error; };
struct InfeasibleState : std::runtime_error { using std::runtime_error::runtime_error; };
struct TooLarge : std::runtime_error { using std::runtime_error::runtime_error; };
struct RefuseRareRegime : std::runtime_error { using std::runtime_error::runtime_error; };
struct InvalidTarget : std::runtime_error { using std::runtime_error::runtime_error; };
struct InvalidRange : std::runtime_error { using std::runtime_error::runtime_error; };
struct InvalidProbability : std::runtime_error { using std::runtime_error::runtime_error; };
struct ZeroTruth : std::runtime_error { using std::runtime_error::runtime_error; };
struct NonPositiveEstimate : std::runtime_error { using std::runtime_error::runtime_error; };

}  // namespace ssa
