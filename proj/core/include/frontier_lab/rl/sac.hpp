#pragma once

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "frontier_lab/rl/networks.hpp"
#include "frontier_lab/rl/replay_buffer.hpp"

namespace flab::rl {

struct SacConfig {
    double gamma = 0.99;
    int batch = 256;
    int buffer_capacity = 10000;
    int learning_starts = 1000;
    int gradient_steps = 4;
    double tau = 0.02;
    int train_freq = 1;
    double learning_rate = 0.00073;
    int hidden = 256;
    /// Temperature: auto-tuned toward scale * ln(valid slots) unless fixed.
    bool auto_alpha = true;
    double initial_alpha = 1.0;
    double target_entropy_scale = 0.3;

    void validate() const;
};

void to_json(nlohmann::json& j, const SacConfig& c);
void from_json(const nlohmann::json& j, SacConfig& c);

/// Minibatch in network layout. Masks hold 1 for valid slots, 0 for padding.
template <typename T>
struct Batch {
    NetInput<T> obs, next_obs;
    Mat<T> mask, next_mask;
    std::vector<int> actions;
    std::vector<T> rewards;
    std::vector<T> dones;

    int size() const { return static_cast<int>(actions.size()); }
};

template <typename T>
NetInput<T> stack_inputs(const std::vector<const Observation*>& obs) {
    NetInput<T> in;
    const auto b = static_cast<Eigen::Index>(obs.size());
    in.images.resize(b, static_cast<Eigen::Index>(obs.front()->image.size()));
    in.features.resize(b, static_cast<Eigen::Index>(obs.front()->features.size()));
    for (Eigen::Index i = 0; i < b; ++i) {
        const Observation& o = *obs[i];
        if (static_cast<Eigen::Index>(o.image.size()) != in.images.cols() ||
            static_cast<Eigen::Index>(o.features.size()) != in.features.cols()) {
            throw ContractViolation("observations in one batch differ in shape");
        }
        for (Eigen::Index c = 0; c < in.images.cols(); ++c) in.images(i, c) = static_cast<T>(o.image[c]);
        for (Eigen::Index c = 0; c < in.features.cols(); ++c) in.features(i, c) = static_cast<T>(o.features[c]);
    }
    return in;
}

template <typename T>
Mat<T> stack_masks(const std::vector<const Observation*>& obs) {
    Mat<T> m(static_cast<Eigen::Index>(obs.size()), static_cast<Eigen::Index>(obs.front()->valid.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index a = 0; a < m.cols(); ++a) m(i, a) = obs[i]->valid[a] ? T(1) : T(0);
    return m;
}

template <typename T>
Batch<T> make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices) {
    std::vector<const Observation*> o, n;
    Batch<T> b;
    for (std::size_t i : indices) {
        const Transition& t = buffer.at(i);
        o.push_back(t.obs.get());
        n.push_back(t.next_obs.get());
        b.actions.push_back(t.action);
        b.rewards.push_back(static_cast<T>(t.reward));
        b.dones.push_back(t.done ? T(1) : T(0));
    }
    b.obs = stack_inputs<T>(o);
    b.next_obs = stack_inputs<T>(n);
    b.mask = stack_masks<T>(o);
    b.next_mask = stack_masks<T>(n);
    return b;
}

/// Row-wise softmax restricted to mask==1 entries. Masked entries get probability
/// 0 and log-probability 0 so that products with them vanish.
template <typename T>
void masked_softmax(const Mat<T>& logits, const Mat<T>& mask, Mat<T>& probs, Mat<T>& log_probs) {
    probs = Mat<T>::Zero(logits.rows(), logits.cols());
    log_probs = Mat<T>::Zero(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (Eigen::Index a = 0; a < logits.cols(); ++a)
            if (mask(i, a) > T(0)) mx = std::max(mx, logits(i, a));
        if (!std::isfinite(mx)) continue;  // no valid slot: all-zero row
        T sum = 0;
        for (Eigen::Index a = 0; a < logits.cols(); ++a)
            if (mask(i, a) > T(0)) sum += std::exp(logits(i, a) - mx);
        const T log_sum = std::log(sum);
        for (Eigen::Index a = 0; a < logits.cols(); ++a) {
            if (mask(i, a) <= T(0)) continue;
            log_probs(i, a) = logits(i, a) - mx - log_sum;
            probs(i, a) = std::exp(log_probs(i, a));
        }
    }
}

struct SacDiagnostics {
    bool performed = false;
    std::string note;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha = 0.0;
    double entropy = 0.0;
    double mean_q = 0.0;
};

/// Discrete soft actor-critic over a masked N-way action space.
template <typename T>
class SacAgent {
public:
    SacAgent(const NetworkShape& shape, const SacConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), actor_(shape), critic_(shape), target_(shape) {
        cfg.validate();
        Rng rng(seed);
        actor_.init(rng);
        critic_.init(rng);
        copy_parameters(target_.parameters(), critic_.parameters());
        actor_opt_ = Adam<T>(actor_.parameters(), cfg.learning_rate);
        critic_opt_ = Adam<T>(critic_.parameters(), cfg.learning_rate);
        alpha_param_.name = "log_alpha";
        alpha_param_.resize(1, 1);
        alpha_param_.value(0, 0) = static_cast<T>(std::log(cfg.initial_alpha));
        alpha_opt_ = Adam<T>({&alpha_param_}, cfg.learning_rate);
    }

    SacAgent(const SacAgent&) = delete;
    SacAgent& operator=(const SacAgent&) = delete;

    /// Valid-slot probabilities for one observation.
    std::vector<double> policy(const Observation& obs) const {
        const std::vector<const Observation*> one{&obs};
        Mat<T> probs, logp;
        masked_softmax<T>(actor_.infer(stack_inputs<T>(one)), stack_masks<T>(one), probs, logp);
        std::vector<double> out(probs.cols());
        for (Eigen::Index a = 0; a < probs.cols(); ++a) out[a] = static_cast<double>(probs(0, a));
        return out;
    }

    /// Argmax (deterministic) or a categorical sample over valid slots; -1 when
    /// no slot is valid.
    int act(const Observation& obs, bool deterministic, Rng& rng) const {
        if (obs.valid_count() == 0) return -1;
        const std::vector<const Observation*> one{&obs};
        const Mat<T> logits = actor_.infer(stack_inputs<T>(one));
        if (deterministic) return masked_argmax(logits, obs.valid);
        Mat<T> probs, logp;
        masked_softmax<T>(logits, stack_masks<T>(one), probs, logp);
        const double u = rng.uniform();
        double acc = 0.0;
        int last = -1;
        for (Eigen::Index a = 0; a < probs.cols(); ++a) {
            if (!obs.valid[a]) continue;
            last = static_cast<int>(a);
            acc += static_cast<double>(probs(0, a));
            if (u < acc) return last;
        }
        return last;
    }

    static int masked_argmax(const Mat<T>& logits, const std::vector<std::uint8_t>& valid) {
        int best = -1;
        for (Eigen::Index a = 0; a < logits.cols(); ++a) {
            if (!valid[a]) continue;
            if (best < 0 || logits(0, a) > logits(0, best)) best = static_cast<int>(a);
        }
        return best;
    }

    T alpha() const { return std::exp(alpha_param_.value(0, 0)); }

    /// y = r + gamma (1 - d) sum_a pi'(a) (min Q'(a) - alpha log pi'(a)).
    std::vector<T> targets(const Batch<T>& b) const {
        Mat<T> probs, logp;
        masked_softmax<T>(actor_.infer(b.next_obs), b.next_mask, probs, logp);
        const auto [q1, q2] = target_.infer(b.next_obs);
        const T a = alpha();
        std::vector<T> y(b.size());
        for (int i = 0; i < b.size(); ++i) {
            T v = 0;
            for (Eigen::Index k = 0; k < probs.cols(); ++k) {
                if (b.next_mask(i, k) <= T(0)) continue;
                v += probs(i, k) * (std::min(q1(i, k), q2(i, k)) - a * logp(i, k));
            }
            y[i] = b.rewards[i] + static_cast<T>(cfg_.gamma) * (T(1) - b.dones[i]) * v;
        }
        return y;
    }

    /// 0.5 (mean (Q1(s,a) - y)^2 + mean (Q2(s,a) - y)^2) without touching gradients.
    T critic_loss_value(const Batch<T>& b, const std::vector<T>& y) const {
        const auto [q1, q2] = critic_.infer(b.obs);
        T loss = 0;
        for (int i = 0; i < b.size(); ++i) {
            const T e1 = q1(i, b.actions[i]) - y[i], e2 = q2(i, b.actions[i]) - y[i];
            loss += e1 * e1 + e2 * e2;
        }
        return T(0.5) * loss / static_cast<T>(b.size());
    }

    /// Zeroes critic gradients, then accumulates d(critic loss)/d(params).
    T critic_loss_backward(const Batch<T>& b, const std::vector<T>& y) {
        critic_opt_.zero_grad();
        const auto [q1, q2] = critic_.forward(b.obs);
        Mat<T> d1 = Mat<T>::Zero(q1.rows(), q1.cols()), d2 = Mat<T>::Zero(q2.rows(), q2.cols());
        T loss = 0;
        const T inv_b = T(1) / static_cast<T>(b.size());
        for (int i = 0; i < b.size(); ++i) {
            const int a = b.actions[i];
            const T e1 = q1(i, a) - y[i], e2 = q2(i, a) - y[i];
            loss += e1 * e1 + e2 * e2;
            d1(i, a) = e1 * inv_b;
            d2(i, a) = e2 * inv_b;
        }
        critic_.backward(d1, d2);
        return T(0.5) * loss * inv_b;
    }

    /// min(Q1, Q2) from the current critic, used as a constant by the actor loss.
    Mat<T> min_q(const NetInput<T>& in) const {
        const auto [q1, q2] = critic_.infer(in);
        return q1.cwiseMin(q2);
    }

    /// mean_i sum_a pi(a) (alpha log pi(a) - q(a)) with q and alpha held fixed.
    T actor_loss_value(const Batch<T>& b, const Mat<T>& q, T a) const {
        Mat<T> probs, logp;
        masked_softmax<T>(actor_.infer(b.obs), b.mask, probs, logp);
        return expected_soft_value(probs, logp, q, b.mask, a) / static_cast<T>(b.size());
    }

    /// Zeroes actor gradients, then accumulates d(actor loss)/d(params). Returns
    /// the loss and the batch-mean policy entropy.
    std::pair<T, T> actor_loss_backward(const Batch<T>& b, const Mat<T>& q, T a) {
        actor_opt_.zero_grad();
        const Mat<T> logits = actor_.forward(b.obs);
        Mat<T> probs, logp;
        masked_softmax<T>(logits, b.mask, probs, logp);
        const T inv_b = T(1) / static_cast<T>(b.size());
        // dL/dz_j = pi_j (f_j - sum_k pi_k f_k), f = alpha log pi - q
        Mat<T> dz = Mat<T>::Zero(logits.rows(), logits.cols());
        T entropy = 0;
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            T mean_f = 0;
            for (Eigen::Index k = 0; k < logits.cols(); ++k)
                if (b.mask(i, k) > T(0)) mean_f += probs(i, k) * (a * logp(i, k) - q(i, k));
            for (Eigen::Index k = 0; k < logits.cols(); ++k) {
                if (b.mask(i, k) <= T(0)) continue;
                dz(i, k) = probs(i, k) * ((a * logp(i, k) - q(i, k)) - mean_f) * inv_b;
                entropy -= probs(i, k) * logp(i, k);
            }
        }
        actor_.backward(dz);
        return {expected_soft_value(probs, logp, q, b.mask, a) * inv_b, entropy * inv_b};
    }

    /// One full gradient step: critic, actor, temperature, then Polyak averaging.
    SacDiagnostics update(const Batch<T>& b) {
        SacDiagnostics diag;
        const T a = alpha();
        const auto y = targets(b);
        diag.critic_loss = static_cast<double>(critic_loss_backward(b, y));
        critic_opt_.step();

        const Mat<T> q = min_q(b.obs);
        const auto [actor_loss, entropy] = actor_loss_backward(b, q, a);
        actor_opt_.step();
        diag.actor_loss = static_cast<double>(actor_loss);
        diag.entropy = static_cast<double>(entropy);
        diag.mean_q = static_cast<double>(q.sum() / static_cast<T>(q.size()));

        if (cfg_.auto_alpha) {
            // d/dlog_alpha of log_alpha * (H - H_target), H_target per sample
            // scaled by the log of its valid-slot count.
            T grad = 0;
            Mat<T> probs, logp;
            masked_softmax<T>(actor_.infer(b.obs), b.mask, probs, logp);
            for (Eigen::Index i = 0; i < probs.rows(); ++i) {
                T h = 0;
                for (Eigen::Index k = 0; k < probs.cols(); ++k) h -= probs(i, k) * logp(i, k);
                const T target = static_cast<T>(cfg_.target_entropy_scale * std::log(std::max<double>(1.0, b.mask.row(i).sum())));
                grad += h - target;
            }
            alpha_opt_.zero_grad();
            alpha_param_.grad(0, 0) = grad / static_cast<T>(b.size());
            alpha_opt_.step();
        }
        diag.alpha = static_cast<double>(alpha());
        soft_update(target_.parameters(), critic_.parameters(), cfg_.tau);
        diag.performed = true;
        return diag;
    }

    /// gradient_steps sampled updates, or a no-op until the buffer passes learning_starts.
    SacDiagnostics train_step(const ReplayBuffer& buffer, Rng& rng) {
        if (buffer.size() <= static_cast<std::size_t>(cfg_.learning_starts)) {
            SacDiagnostics d;
            d.note = "buffer below learning_starts";
            return d;
        }
        SacDiagnostics last;
        for (int g = 0; g < cfg_.gradient_steps; ++g) {
            last = update(make_batch<T>(buffer, buffer.sample_indices(cfg_.batch, rng)));
        }
        return last;
    }

    ActorNetwork<T>& actor() { return actor_; }
    CriticNetwork<T>& critic() { return critic_; }
    CriticNetwork<T>& target_critic() { return target_; }
    const ActorNetwork<T>& actor() const { return actor_; }
    Parameter<T>& log_alpha() { return alpha_param_; }
    const SacConfig& config() const { return cfg_; }
    const NetworkShape& shape() const { return actor_.shape(); }

    /// Every tensor by a unique name, including the target critic ("target/" prefix).
    std::vector<std::pair<std::string, Parameter<T>*>> named_tensors() {
        std::vector<std::pair<std::string, Parameter<T>*>> out;
        for (auto* p : actor_.parameters()) out.emplace_back(p->name, p);
        for (auto* p : critic_.parameters()) out.emplace_back(p->name, p);
        for (auto* p : target_.parameters()) out.emplace_back("target/" + p->name, p);
        out.emplace_back(alpha_param_.name, &alpha_param_);
        return out;
    }

private:
    static T expected_soft_value(const Mat<T>& probs, const Mat<T>& logp, const Mat<T>& q, const Mat<T>& mask, T a) {
        T total = 0;
        for (Eigen::Index i = 0; i < probs.rows(); ++i)
            for (Eigen::Index k = 0; k < probs.cols(); ++k)
                if (mask(i, k) > T(0)) total += probs(i, k) * (a * logp(i, k) - q(i, k));
        return total;
    }

    SacConfig cfg_;
    ActorNetwork<T> actor_;
    CriticNetwork<T> critic_, target_;
    Parameter<T> alpha_param_;
    Adam<T> actor_opt_, critic_opt_, alpha_opt_;
};

}  // namespace flab::rl
