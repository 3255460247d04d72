#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace atpm {

/// Analysis activity codes. Every series past ingestion uses these values.
enum class Activity : std::uint8_t { other = 0, home = 1, work = 2, trip = 3 };

inline constexpr int kActivityCount = 4;

using Code = std::uint8_t;
using CodeSequence = std::vector<Code>;

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad sizes, out-of-range values).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// CSV header does not match the declared schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Runs `body(i)` for i in [0, n) on up to `threads` workers.
/// Work is partitioned statically; callers write into disjoint slots so
/// results never depend on the thread count.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// SplitMix64 finalizer; used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace atpm
