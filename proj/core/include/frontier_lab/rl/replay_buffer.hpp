#pragma once

#include <cstddef>
#include <vector>

#include "frontier_lab/random.hpp"
#include "frontier_lab/rl/observation.hpp"

namespace flab::rl {

struct Transition {
    ObservationPtr obs;
    int action = 0;
    float reward = 0.0f;
    ObservationPtr next_obs;
    bool done = false;
};

/// Fixed-capacity FIFO ring. Index 0 is the oldest stored transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    /// Throws ContractViolation if the action is not valid under obs->valid.
    void push(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return storage_.size(); }
    std::size_t total_pushed() const { return pushed_; }
    const Transition& at(std::size_t i) const;
    /// Uniform with replacement.
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

private:
    std::vector<Transition> storage_;
    std::size_t head_ = 0;  // next write slot
    std::size_t size_ = 0;
    std::size_t pushed_ = 0;
};

}  // namespace flab::rl
