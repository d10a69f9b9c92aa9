#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace subcompat {

/// A subset of {1, ..., n}. Member i is stored in bit (i - 1), so the mask
/// value does not depend on n and subsets order by mask value.
class SubsetMask {
 public:
  static constexpr int kMaxMembers = 31;

  constexpr SubsetMask() = default;
  constexpr explicit SubsetMask(std::uint32_t bits) : bits_(bits) {}

  /// Builds a subset from 1-based member indices; throws InputError on
  /// indices outside [1, kMaxMembers].
  static SubsetMask of(std::initializer_list<int> members);
  static SubsetMask from_members(std::span<const int> members);
  static constexpr SubsetMask full(int n) {
    return SubsetMask(n >= 32 ? ~0u : (1u << n) - 1u);
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int member) const {
    return member >= 1 && member <= kMaxMembers && ((bits_ >> (member - 1)) & 1u);
  }
  constexpr bool is_subset_of(SubsetMask other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  /// True when every member lies in {1, ..., n}.
  constexpr bool within(int n) const { return is_subset_of(full(n)); }

  std::vector<int> members() const;
  /// Renders as "{1,2,3}".
  std::string to_string() const;

  friend constexpr SubsetMask operator|(SubsetMask a, SubsetMask b) {
    return SubsetMask(a.bits_ | b.bits_);
  }
  friend constexpr SubsetMask operator&(SubsetMask a, SubsetMask b) {
    return SubsetMask(a.bits_ & b.bits_);
  }
  /// Set difference.
  friend constexpr SubsetMask operator-(SubsetMask a, SubsetMask b) {
    return SubsetMask(a.bits_ & ~b.bits_);
  }
  friend constexpr bool operator==(SubsetMask, SubsetMask) = default;
  friend constexpr auto operator<=>(SubsetMask, SubsetMask) = default;

 private:
  std::uint32_t bits_ = 0;
};

/// Gathers the bits of `value` selected by `mask` into the low bits of the
/// result, preserving order (software PEXT).
constexpr std::uint32_t gather_bits(std::uint32_t value, std::uint32_t mask) {
  std::uint32_t out = 0;
  int k = 0;
  for (; mask != 0; mask &= mask - 1, ++k) {
    const std::uint32_t low = mask & (~mask + 1u);
    if (value & low) out |= 1u << k;
  }
  return out;
}

/// Inverse of gather_bits: spreads the low bits of `value` onto the set bits
/// of `mask` (software PDEP).
constexpr std::uint32_t scatter_bits(std::uint32_t value, std::uint32_t mask) {
  std::uint32_t out = 0;
  int k = 0;
  for (; mask != 0; mask &= mask - 1, ++k) {
    const std::uint32_t low = mask & (~mask + 1u);
    if ((value >> k) & 1u) out |= low;
  }
  return out;
}

}  // namespace subcompat
