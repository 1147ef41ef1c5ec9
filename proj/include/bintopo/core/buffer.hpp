#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "bintopo/core/design.hpp"
#include "bintopo/core/rng.hpp"

namespace bintopo {

struct Experience {
  Design design;
  double payoff = 0.0;
};

// Bounded FIFO store of (design, payoff) pairs.
class ExperienceBuffer {
 public:
  explicit ExperienceBuffer(std::size_t capacity);

  void push(Experience e);
  void push(const Design& d, double payoff) { push(Experience{d, payoff}); }

  // Uniform with replacement. Throws EmptyBuffer when empty.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;
  std::vector<Experience> sample(std::size_t batch, Rng& rng) const;

  const Experience& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t capacity_;
  std::deque<Experience> entries_;
};

}  // namespace bintopo
