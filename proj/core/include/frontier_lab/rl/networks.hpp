#pragma once

#include <array>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>

#include "frontier_lab/rl/nn.hpp"

namespace flab::rl {

struct ConvStage {
    int out_channels;
    int kernel;
    int stride;
};

/// Three convolution stages and one fully connected stage to `latent` features,
/// each followed by a ReLU.
struct EncoderSpec {
    int input_side = 128;
    int input_channels = 1;
    std::array<ConvStage, 3> stages{{{16, 8, 4}, {32, 4, 2}, {32, 3, 1}}};
    int latent = 256;

    /// Side length after each stage; throws ConfigError if a stage does not fit.
    std::array<int, 3> stage_sides() const;
    int input_size() const { return input_channels * input_side * input_side; }

    static EncoderSpec full_size() { return {}; }
    /// 32x32 input used by the desk-scale profile.
    static EncoderSpec desk() { return {32, 1, {{{8, 4, 2}, {16, 3, 2}, {16, 3, 1}}}, 256}; }
    /// 8x8 input used for gradient checks.
    static EncoderSpec miniature(int latent = 256) { return {8, 1, {{{2, 3, 1}, {3, 3, 1}, {3, 2, 2}}}, latent}; }
};

void to_json(nlohmann::json& j, const EncoderSpec& spec);
void from_json(const nlohmann::json& j, EncoderSpec& spec);

template <typename T>
class MapEncoder {
public:
    MapEncoder() = default;
    MapEncoder(const EncoderSpec& spec, const std::string& name) : spec_(spec) {
        const auto sides = spec.stage_sides();
        int in_ch = spec.input_channels, side = spec.input_side;
        for (int i = 0; i < 3; ++i) {
            const auto& st = spec.stages[i];
            conv_[i] = Conv2d<T>(in_ch, st.out_channels, st.kernel, st.stride, side,
                                 name + ".conv" + std::to_string(i + 1));
            in_ch = st.out_channels;
            side = sides[i];
        }
        fc_ = Linear<T>(in_ch * side * side, spec.latent, name + ".fc");
    }

    void init(Rng& rng) {
        for (auto& c : conv_) c.init(rng);
        fc_.init(rng);
    }

    Mat<T> forward(const Mat<T>& images) {
        Mat<T> h = images;
        for (int i = 0; i < 3; ++i) h = relu_[i].forward(conv_[i].forward(h));
        return relu_[3].forward(fc_.forward(h));
    }

    Mat<T> infer(const Mat<T>& images) const {
        Mat<T> h = images;
        for (int i = 0; i < 3; ++i) h = ReLU<T>::infer(conv_[i].infer(h));
        return ReLU<T>::infer(fc_.infer(h));
    }

    void backward(const Mat<T>& dlatent) {
        Mat<T> d = fc_.backward(relu_[3].backward(dlatent));
        for (int i = 2; i >= 0; --i) d = conv_[i].backward(relu_[i].backward(d));
    }

    void collect(ParamList<T>& out) {
        for (auto& c : conv_) c.collect(out);
        fc_.collect(out);
    }

    const EncoderSpec& spec() const { return spec_; }

private:
    EncoderSpec spec_;
    std::array<Conv2d<T>, 3> conv_;
    Linear<T> fc_;
    std::array<ReLU<T>, 4> relu_;
};

/// Two hidden fully connected layers with ReLU, linear output.
template <typename T>
class MlpHead {
public:
    MlpHead() = default;
    MlpHead(int in, int hidden, int out, const std::string& name)
        : l1_(in, hidden, name + ".fc1"), l2_(hidden, hidden, name + ".fc2"), l3_(hidden, out, name + ".out") {}

    void init(Rng& rng) {
        l1_.init(rng);
        l2_.init(rng);
        l3_.init(rng);
    }
    Mat<T> forward(const Mat<T>& x) { return l3_.forward(r2_.forward(l2_.forward(r1_.forward(l1_.forward(x))))); }
    Mat<T> infer(const Mat<T>& x) const {
        return l3_.infer(ReLU<T>::infer(l2_.infer(ReLU<T>::infer(l1_.infer(x)))));
    }
    Mat<T> backward(const Mat<T>& dy) {
        return l1_.backward(r1_.backward(l2_.backward(r2_.backward(l3_.backward(dy)))));
    }
    void collect(ParamList<T>& out) {
        l1_.collect(out);
        l2_.collect(out);
        l3_.collect(out);
    }

private:
    Linear<T> l1_, l2_, l3_;
    ReLU<T> r1_, r2_;
};

/// Batch input for the actor/critic: one image row and one feature row per sample.
template <typename T>
struct NetInput {
    Mat<T> images;    // B x (C * side * side)
    Mat<T> features;  // B x (5N + 1)
};

template <typename T>
Mat<T> concat_columns(const Mat<T>& a, const Mat<T>& b) {
    Mat<T> out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

struct NetworkShape {
    EncoderSpec encoder;
    int feature_size = 51;  // 5N + 1
    int actions = 10;
    int hidden = 256;
};

void to_json(nlohmann::json& j, const NetworkShape& s);
void from_json(const nlohmann::json& j, NetworkShape& s);

/// Encoder followed by an MLP over [latent | features] producing one logit per slot.
template <typename T>
class ActorNetwork {
public:
    ActorNetwork() = default;
    explicit ActorNetwork(const NetworkShape& shape)
        : shape_(shape),
          encoder_(shape.encoder, "actor.encoder"),
          head_(shape.encoder.latent + shape.feature_size, shape.hidden, shape.actions, "actor.head") {}

    void init(Rng& rng) {
        encoder_.init(rng);
        head_.init(rng);
    }

    Mat<T> forward(const NetInput<T>& in) { return head_.forward(concat_columns(encoder_.forward(in.images), in.features)); }
    Mat<T> infer(const NetInput<T>& in) const {
        return head_.infer(concat_columns(encoder_.infer(in.images), in.features));
    }
    void backward(const Mat<T>& dlogits) {
        const Mat<T> dx = head_.backward(dlogits);
        encoder_.backward(dx.leftCols(shape_.encoder.latent));
    }

    /// The observation vector as seen by this network: latent ‖ features.
    Mat<T> observation(const NetInput<T>& in) const { return concat_columns(encoder_.infer(in.images), in.features); }

    ParamList<T> parameters() {
        ParamList<T> out;
        encoder_.collect(out);
        head_.collect(out);
        return out;
    }
    ParamList<T> encoder_parameters() {
        ParamList<T> out;
        encoder_.collect(out);
        return out;
    }
    ParamList<T> head_parameters() {
        ParamList<T> out;
        head_.collect(out);
        return out;
    }
    const NetworkShape& shape() const { return shape_; }

private:
    NetworkShape shape_;
    MapEncoder<T> encoder_;
    MlpHead<T> head_;
};

/// One encoder shared by twin Q heads; each head outputs one value per slot.
template <typename T>
class CriticNetwork {
public:
    CriticNetwork() = default;
    explicit CriticNetwork(const NetworkShape& shape)
        : shape_(shape),
          encoder_(shape.encoder, "critic.encoder"),
          q1_(shape.encoder.latent + shape.feature_size, shape.hidden, shape.actions, "critic.q1"),
          q2_(shape.encoder.latent + shape.feature_size, shape.hidden, shape.actions, "critic.q2") {}

    void init(Rng& rng) {
        encoder_.init(rng);
        q1_.init(rng);
        q2_.init(rng);
    }

    std::pair<Mat<T>, Mat<T>> forward(const NetInput<T>& in) {
        const Mat<T> x = concat_columns(encoder_.forward(in.images), in.features);
        return {q1_.forward(x), q2_.forward(x)};
    }
    std::pair<Mat<T>, Mat<T>> infer(const NetInput<T>& in) const {
        const Mat<T> x = concat_columns(encoder_.infer(in.images), in.features);
        return {q1_.infer(x), q2_.infer(x)};
    }
    void backward(const Mat<T>& dq1, const Mat<T>& dq2) {
        const Mat<T> dx = q1_.backward(dq1) + q2_.backward(dq2);
        encoder_.backward(dx.leftCols(shape_.encoder.latent));
    }

    ParamList<T> parameters() {
        ParamList<T> out;
        encoder_.collect(out);
        q1_.collect(out);
        q2_.collect(out);
        return out;
    }
    ParamList<T> encoder_parameters() {
        ParamList<T> out;
        encoder_.collect(out);
        return out;
    }
    ParamList<T> head_parameters() {
        ParamList<T> out;
        q1_.collect(out);
        q2_.collect(out);
        return out;
    }
    const NetworkShape& shape() const { return shape_; }

private:
    NetworkShape shape_;
    MapEncoder<T> encoder_;
    MlpHead<T> q1_, q2_;
};

/// target <- (1 - tau) * target + tau * source, parameter by parameter.
template <typename T>
void soft_update(const ParamList<T>& target, const ParamList<T>& source, double tau) {
    if (target.size() != source.size()) throw ContractViolation("soft update: parameter lists differ");
    const T a = static_cast<T>(1.0 - tau), b = static_cast<T>(tau);
    for (std::size_t i = 0; i < target.size(); ++i) target[i]->value = a * target[i]->value + b * source[i]->value;
}

template <typename T>
void copy_parameters(const ParamList<T>& target, const ParamList<T>& source) {
    if (target.size() != source.size()) throw ContractViolation("copy: parameter lists differ");
    for (std::size_t i = 0; i < target.size(); ++i) target[i]->value = source[i]->value;
}

}  // namespace flab::rl
