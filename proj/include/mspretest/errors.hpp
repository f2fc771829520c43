#pragma once

#include <stdexcept>
#include <string>

namespace mspretest {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Data for which a statistic is undefined (zero variance, constant sample).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative numeric routine failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too many degenerate replicates in a simulation run.
class DegenerateThresholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mspretest
