#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace covert {

using FluentId = std::uint32_t;

// Fixed-width bitset over a fluent universe. Used for states and for the
// pre/add/delete lists of actions; all set algebra is word-parallel.
class FluentSet {
 public:
  FluentSet() = default;
  explicit FluentSet(std::size_t universe)
      : universe_(universe), words_((universe + 63) / 64, 0) {}
  FluentSet(std::size_t universe, std::initializer_list<FluentId> ids) : FluentSet(universe) {
    for (FluentId id : ids) insert(id);
  }

  std::size_t universe() const noexcept { return universe_; }

  bool contains(FluentId id) const noexcept {
    return id < universe_ && ((words_[id / 64] >> (id % 64)) & 1u);
  }
  void insert(FluentId id) { words_[id / 64] |= std::uint64_t{1} << (id % 64); }
  void erase(FluentId id) { words_[id / 64] &= ~(std::uint64_t{1} << (id % 64)); }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }

  bool is_subset_of(const FluentSet& other) const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~other.words_[i]) return false;
    return true;
  }
  bool intersects(const FluentSet& other) const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & other.words_[i]) return true;
    return false;
  }
  std::size_t intersection_size(const FluentSet& other) const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
    return n;
  }
  std::size_t union_size(const FluentSet& other) const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      n += static_cast<std::size_t>(std::popcount(words_[i] | other.words_[i]));
    return n;
  }

  FluentSet& operator|=(const FluentSet& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  FluentSet& operator&=(const FluentSet& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }
  // Set difference.
  FluentSet& operator-=(const FluentSet& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
  }

  std::vector<FluentId> ids() const {
    std::vector<FluentId> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        out.push_back(static_cast<FluentId>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
        bits &= bits - 1;
      }
    }
    return out;
  }

  std::size_t hash() const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ universe_;
    for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }

  friend bool operator==(const FluentSet&, const FluentSet&) = default;
  // Total order used to canonicalize beliefs.
  friend std::strong_ordering operator<=>(const FluentSet& a, const FluentSet& b) {
    if (auto c = a.universe_ <=> b.universe_; c != 0) return c;
    return std::lexicographical_compare_three_way(a.words_.begin(), a.words_.end(),
                                                  b.words_.begin(), b.words_.end());
  }

 private:
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

inline FluentSet operator|(FluentSet a, const FluentSet& b) { return a |= b; }
inline FluentSet operator&(FluentSet a, const FluentSet& b) { return a &= b; }
inline FluentSet operator-(FluentSet a, const FluentSet& b) { return a -= b; }

struct FluentSetHash {
  std::size_t operator()(const FluentSet& s) const noexcept { return s.hash(); }
};

}  // namespace covert
