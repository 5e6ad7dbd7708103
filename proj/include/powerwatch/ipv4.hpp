#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace powerwatch {

// IPv4 address held in host byte order.
struct Ipv4Address {
  std::uint32_t value = 0;

  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t v) : value(v) {}

  // Dotted-quad only; rejects leading '+', empty octets, octets > 255.
  static std::optional<Ipv4Address> parse(std::string_view text);

  std::string to_string() const;

  friend constexpr auto operator<=>(Ipv4Address, Ipv4Address) = default;
};

// An address block such as 10.0.0.0/8. A /32 is a single address.
struct CidrBlock {
  Ipv4Address base;
  int prefix = 32;

  // Accepts "a.b.c.d" (treated as /32) or "a.b.c.d/n". Host bits in the
  // base are masked off.
  static std::optional<CidrBlock> parse(std::string_view text);

  constexpr std::uint32_t mask() const {
    return prefix == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix);
  }

  constexpr bool contains(Ipv4Address a) const {
    return (a.value & mask()) == (base.value & mask());
  }

  std::string to_string() const;

  friend constexpr bool operator==(const CidrBlock&, const CidrBlock&) = default;
};

}  // namespace powerwatch

template <>
struct std::hash<powerwatch::Ipv4Address> {
  std::size_t operator()(powerwatch::Ipv4Address a) const noexcept {
    // Fibonacci hashing spreads sequential addresses across buckets.
    return static_cast<std::size_t>(a.value * 0x9E3779B97F4A7C15ull);
  }
};
