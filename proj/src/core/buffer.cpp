#include "bintopo/core/buffer.hpp"

#include "bintopo/core/errors.hpp"

namespace bintopo {

ExperienceBuffer::ExperienceBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("buffer capacity must be positive");
}

void ExperienceBuffer::push(Experience e) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(e));
}

std::vector<std::size_t> ExperienceBuffer::sample_indices(std::size_t batch,
                                                          Rng& rng) const {
  if (entries_.empty()) throw EmptyBuffer("cannot sample from an empty buffer");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.below(entries_.size());
  return idx;
}

std::vector<Experience> ExperienceBuffer::sample(std::size_t batch, Rng& rng) const {
  std::vector<Experience> out;
  out.reserve(batch);
  for (auto i : sample_indices(batch, rng)) out.push_back(entries_[i]);
  return out;
}

}  // namespace bintopo
