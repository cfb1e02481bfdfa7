#pragma once

#include <stdexcept>
#include <string>

namespace macfb {

enum class Err {
  NonStochasticRow,
  NegativeEntry,
  LengthMismatch,
  AlphabetMismatch,
  InvalidNoise,
  NonConvergence,
  InvalidStoppingTime,
  InconsistentLabels,
  DegenerateTest,
  SupportOverflow,
  InsufficientData,
  TooLarge,
  NoQualifyingNodes,
  HypothesisViolated,
  NotSupermartingale,
  BadInput,
};

/// Library-wide exception; `code` identifies the failed contract.
class Error : public std::runtime_error {
public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }

private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

}  // namespace macfb
