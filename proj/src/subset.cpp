#include "subcompat/subset.hpp"

#include "subcompat/errors.hpp"

namespace subcompat {

SubsetMask SubsetMask::of(std::initializer_list<int> members) {
  return from_members(std::span<const int>(members.begin(), members.size()));
}

SubsetMask SubsetMask::from_members(std::span<const int> members) {
  std::uint32_t bits = 0;
  for (int m : members) {
    if (m < 1 || m > kMaxMembers) {
      throw InputError("subset member " + std::to_string(m) + " out of range");
    }
    bits |= 1u << (m - 1);
  }
  return SubsetMask(bits);
}

std::vector<int> SubsetMask::members() const {
  std::vector<int> out;
  for (int i = 1; i <= kMaxMembers; ++i) {
    if (contains(i)) out.push_back(i);
  }
  return out;
}

std::string SubsetMask::to_string() const {
  std::string s = "{";
  bool first = true;
  for (int m : members()) {
    if (!first) s += ',';
    s += std::to_string(m);
    first = false;
  }
  return s + "}";
}

}  // namespace subcompat
