#include "symq/replay.hpp"

#include <cmath>

#include "symq/error.hpp"

namespace symq {

ReplayBuffer::ReplayBuffer(int capacity, int state_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
    if (capacity < 1) throw ConfigError("ReplayBuffer: capacity must be positive");
    if (state_dim < 1 || action_dim < 1) throw ConfigError("ReplayBuffer: dims must be positive");
    storage_.reserve(static_cast<size_t>(capacity));
}

void ReplayBuffer::push(const Transition& t) {
    if (static_cast<int>(t.state.size()) != state_dim_ ||
        static_cast<int>(t.next_state.size()) != state_dim_ ||
        static_cast<int>(t.action.size()) != action_dim_)
        throw ShapeError("ReplayBuffer::push: dimension mismatch");
    for (double x : t.state)
        if (!std::isfinite(x)) throw DataError("ReplayBuffer::push: non-finite state");
    for (double x : t.next_state)
        if (!std::isfinite(x)) throw DataError("ReplayBuffer::push: non-finite next_state");
    for (double x : t.action)
        if (!std::isfinite(x)) throw DataError("ReplayBuffer::push: non-finite action");
    if (!std::isfinite(t.reward)) throw DataError("ReplayBuffer::push: non-finite reward");

    if (size() < capacity_) {
        storage_.push_back(t);
    } else {
        storage_[static_cast<size_t>(next_)] = t;
    }
    next_ = (next_ + 1) % capacity_;
    ++total_pushed_;
}

std::vector<Transition> ReplayBuffer::sample_batch(int n, Rng& rng) const {
    if (storage_.empty()) throw StateError("ReplayBuffer::sample_batch: empty buffer");
    if (n < 1) throw ConfigError("ReplayBuffer::sample_batch: need n >= 1");
    std::vector<Transition> batch;
    batch.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        batch.push_back(storage_[static_cast<size_t>(rng.uniform_int(storage_.size()))]);
    return batch;
}

} // namespace symq
