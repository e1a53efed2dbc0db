#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqdet {

/// Argument outside the domain of an operation (non-finite input, label/model mismatch, bad range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A K-L number is unbounded because one channel puts zero mass where the other does not.
class InfiniteInformationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A posterior update would leave every hypothesis with zero mass.
class DegenerateUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sequential test exceeded its sample cap without stopping.
class NonTerminationError : public std::runtime_error {
 public:
  NonTerminationError(const std::string& what, std::size_t samples)
      : std::runtime_error(what), samples_(samples) {}

  std::size_t samples() const noexcept { return samples_; }

 private:
  std::size_t samples_;
};

}  // namespace seqdet
