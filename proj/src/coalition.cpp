#include "reachavoid/coalition.hpp"

#include <algorithm>
#include <stdexcept>

namespace reachavoid {

Coalition::Coalition(std::vector<std::size_t> members)
    : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw std::invalid_argument("coalition has a repeated pursuer");
  }
}

Coalition::Coalition(std::initializer_list<std::size_t> members)
    : Coalition(std::vector<std::size_t>(members)) {}

bool Coalition::contains(std::size_t pursuer) const {
  return std::binary_search(members_.begin(), members_.end(), pursuer);
}

bool Coalition::intersects(const Coalition& other) const {
  auto a = members_.begin();
  auto b = other.members_.begin();
  while (a != members_.end() && b != other.members_.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

bool Coalition::is_subset_of(const Coalition& other) const {
  return std::includes(other.members_.begin(), other.members_.end(),
                       members_.begin(), members_.end());
}

std::vector<Coalition> Coalition::proper_subcoalitions() const {
  std::vector<Coalition> out;
  const std::size_t n = members_.size();
  if (n < 2 || n > 20) return out;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) subset.push_back(members_[k]);
    }
    out.emplace_back(std::move(subset));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

std::string Coalition::to_string() const {
  std::string s = "{";
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (k) s += ",";
    s += "P" + std::to_string(members_[k]);
  }
  return s + "}";
}

}  // namespace reachavoid
