#include "frontier_lab/rl/replay_buffer.hpp"

namespace flab::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : storage_(capacity) {
    if (capacity == 0) throw ContractViolation("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (!t.obs || !t.next_obs) throw ContractViolation("transition without observations");
    if (t.action < 0 || t.action >= static_cast<int>(t.obs->valid.size()) || !t.obs->valid[t.action]) {
        throw ContractViolation("transition action is not a valid slot");
    }
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % storage_.size();
    size_ = std::min(size_ + 1, storage_.size());
    ++pushed_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= size_) throw ContractViolation("replay index out of range");
    const std::size_t oldest = size_ < storage_.size() ? 0 : head_;
    return storage_[(oldest + i) % storage_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
    if (size_ == 0) throw ContractViolation("sampling from an empty replay buffer");
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(size_));
    return idx;
}

}  // namespace flab::rl
