#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace semlead {

inline constexpr const char* kVersion = "0.3.1";

/// Error caused by bad input, configuration or missing artifacts. The CLI maps
/// it to exit code 1; anything else escaping main is an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model of the wrong kind was handed to an operation.
class KindMismatch : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite parameter.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a named sub-stream, e.g. derive_seed(seed, {epoch, thread}).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> salt) {
  std::uint64_t h = splitmix64(seed);
  for (auto s : salt) h = splitmix64(h ^ (s + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace semlead
