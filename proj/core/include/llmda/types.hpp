#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace llmda {

/// Dense entity identifier, assigned in first-seen order or from an id map.
enum class EntityId : std::uint32_t {};

/// Relation identifier. Forward relation j has id 2j, its inverse 2j+1.
enum class RelationId : std::uint32_t {};

/// Day index relative to the dataset epoch (granularity: 24 hours).
using Timestamp = std::int64_t;

constexpr std::uint32_t value_of(EntityId e) noexcept { return static_cast<std::uint32_t>(e); }
constexpr std::uint32_t value_of(RelationId r) noexcept { return static_cast<std::uint32_t>(r); }

constexpr RelationId inverse_of(RelationId r) noexcept {
  return RelationId{value_of(r) ^ 1u};
}
constexpr bool is_inverse(RelationId r) noexcept { return (value_of(r) & 1u) != 0; }

struct Quadruple {
  EntityId subject{};
  RelationId relation{};
  EntityId object{};
  Timestamp t = 0;

  auto operator<=>(const Quadruple&) const = default;
};

/// Stored edges are quadruples; inverse augmentation adds (o, inv_r, s, t).
using Edge = Quadruple;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : Error(where + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class LeakageError : public Error {
 public:
  using Error::Error;
};

}  // namespace llmda

template <>
struct std::hash<llmda::Quadruple> {
  std::size_t operator()(const llmda::Quadruple& q) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(llmda::value_of(q.subject));
    mix(llmda::value_of(q.relation));
    mix(llmda::value_of(q.object));
    mix(static_cast<std::uint64_t>(q.t));
    return static_cast<std::size_t>(h);
  }
};
