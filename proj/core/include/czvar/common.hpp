#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace czvar {

// Error taxonomy. Every failure a caller can act on has its own type; all of
// them derive from the standard exception that best matches their meaning.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};
struct TruncationTooFine : std::domain_error {
    using std::domain_error::domain_error;
};
struct InvalidWeight : std::domain_error {
    using std::domain_error::domain_error;
};
struct RankDeficiency : std::domain_error {
    using std::domain_error::domain_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Number of worker threads used by the parallel loops below. Defaults to 1;
/// set once at program start (the CLI's --jobs flag).
void set_worker_count(unsigned jobs);
unsigned worker_count();

/// Runs body(i) for i in [0, count). Iterations must be independent; each
/// writes only its own output slot, so results do not depend on the number of
/// workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace czvar
