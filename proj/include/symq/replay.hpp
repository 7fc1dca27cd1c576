#pragma once

#include <cstdint>
#include <vector>

#include "symq/rng.hpp"

namespace symq {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Fixed-capacity ring: oldest entries are overwritten first. Mini-batches
// are uniform draws with replacement.
class ReplayBuffer {
  public:
    ReplayBuffer(int capacity, int state_dim, int action_dim);

    void push(const Transition& t);
    std::vector<Transition> sample_batch(int n, Rng& rng) const;

    // i-th remaining transition in insertion order (0 = oldest).
    const Transition& nth_oldest(int64_t i) const {
        const int64_t base = size() < capacity_ ? 0 : next_;
        return storage_[static_cast<size_t>((base + i) % size())];
    }

    int64_t size() const { return static_cast<int64_t>(storage_.size()); }
    int64_t capacity() const { return capacity_; }
    int64_t total_pushed() const { return total_pushed_; }

  private:
    int64_t capacity_;
    int state_dim_;
    int action_dim_;
    int64_t next_ = 0;       // ring write position
    int64_t total_pushed_ = 0;
    std::vector<Transition> storage_;
};

} // namespace symq
