#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace reachavoid {

/// Strictly increasing set of pursuer indices.
///
/// Game-graph vertices hold at most three members (`matchable()`); the
/// interception solver itself accepts any non-empty coalition so larger
/// teams can be reduced.
class Coalition {
 public:
  static constexpr std::size_t kMaxMatchable = 3;

  Coalition() = default;
  explicit Coalition(std::vector<std::size_t> members);
  Coalition(std::initializer_list<std::size_t> members);

  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool matchable() const { return !empty() && size() <= kMaxMatchable; }

  bool contains(std::size_t pursuer) const;
  bool intersects(const Coalition& other) const;
  bool is_subset_of(const Coalition& other) const;

  // All non-empty proper subsets, smallest first.
  std::vector<Coalition> proper_subcoalitions() const;

  std::string to_string() const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const Coalition&, const Coalition&) = default;
  friend auto operator<=>(const Coalition&, const Coalition&) = default;

 private:
  std::vector<std::size_t> members_;
};

}  // namespace reachavoid
