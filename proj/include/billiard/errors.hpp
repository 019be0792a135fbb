#pragma once

#include <stdexcept>
#include <string>

namespace billiard {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define BILLIARD_DEFINE_ERROR(Name)                          \
  struct Name : Error {                                      \
    explicit Name(const std::string& msg) : Error(msg) {}    \
  }

BILLIARD_DEFINE_ERROR(OverlappingScatterers);
BILLIARD_DEFINE_ERROR(DegenerateRadius);
BILLIARD_DEFINE_ERROR(ScanBudgetExceeded);
BILLIARD_DEFINE_ERROR(IndexOutOfRange);
BILLIARD_DEFINE_ERROR(GrazingInput);
BILLIARD_DEFINE_ERROR(NoIntersection);
BILLIARD_DEFINE_ERROR(ZeroVector);
BILLIARD_DEFINE_ERROR(RefinementBudgetExceeded);
BILLIARD_DEFINE_ERROR(GrazingQuery);
BILLIARD_DEFINE_ERROR(WordNotInTrie);
BILLIARD_DEFINE_ERROR(JunctionMismatch);
BILLIARD_DEFINE_ERROR(InsufficientDepth);
BILLIARD_DEFINE_ERROR(EmptyCell);
BILLIARD_DEFINE_ERROR(InsufficientData);
BILLIARD_DEFINE_ERROR(EmptyTrie);
BILLIARD_DEFINE_ERROR(ReducibleMatrix);
BILLIARD_DEFINE_ERROR(MissingArtifact);
BILLIARD_DEFINE_ERROR(BadConfig);

#undef BILLIARD_DEFINE_ERROR

}  // namespace billiard
