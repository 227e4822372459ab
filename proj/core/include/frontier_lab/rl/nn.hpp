#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/random.hpp"

namespace flab::rl {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
struct Parameter {
    std::string name;
    Mat<T> value;
    Mat<T> grad;

    void resize(Eigen::Index rows, Eigen::Index cols) {
        value = Mat<T>::Zero(rows, cols);
        grad = Mat<T>::Zero(rows, cols);
    }
    /// PyTorch-style default init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    void init_uniform(Rng& rng, Eigen::Index fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
    }
};

template <typename T>
using ParamList = std::vector<Parameter<T>*>;

template <typename T>
void zero_grads(const ParamList<T>& params) {
    for (auto* p : params) p->grad.setZero();
}

/// y = x W + b on row-major batches (one sample per row).
template <typename T>
class Linear {
public:
    Linear() = default;
    Linear(int in, int out, const std::string& name) : in_(in), out_(out) {
        w_.name = name + ".weight";
        b_.name = name + ".bias";
        w_.resize(in, out);
        b_.resize(1, out);
    }

    void init(Rng& rng) {
        w_.init_uniform(rng, in_);
        b_.init_uniform(rng, in_);
    }

    Mat<T> forward(const Mat<T>& x) {
        x_ = x;
        return infer(x);
    }

    Mat<T> infer(const Mat<T>& x) const {
        if (x.cols() != in_) throw ContractViolation("linear input width mismatch for " + w_.name);
        Mat<T> y = x * w_.value;
        y.rowwise() += b_.value.row(0);
        return y;
    }

    Mat<T> backward(const Mat<T>& dy) {
        w_.grad.noalias() += x_.transpose() * dy;
        b_.grad.row(0) += dy.colwise().sum();
        return dy * w_.value.transpose();
    }

    void collect(ParamList<T>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }

    int in() const { return in_; }
    int out() const { return out_; }

private:
    int in_ = 0, out_ = 0;
    Parameter<T> w_, b_;
    Mat<T> x_;
};

/// Square-input 2D convolution, no padding. Samples are rows laid out
/// channel-major (C x H x W). Implemented as im2col + one GEMM per batch.
template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int input_side, const std::string& name)
        : in_ch_(in_channels), out_ch_(out_channels), k_(kernel), s_(stride), in_side_(input_side) {
        if (kernel < 1 || stride < 1 || input_side < kernel) {
            throw ContractViolation("conv stage " + name + " does not fit its input");
        }
        out_side_ = (input_side - kernel) / stride + 1;
        w_.name = name + ".weight";
        b_.name = name + ".bias";
        w_.resize(out_channels, patch());
        b_.resize(out_channels, 1);
    }

    void init(Rng& rng) {
        w_.init_uniform(rng, patch());
        b_.init_uniform(rng, patch());
    }

    int out_side() const { return out_side_; }
    int out_channels() const { return out_ch_; }
    int input_size() const { return in_ch_ * in_side_ * in_side_; }
    int output_size() const { return out_ch_ * out_side_ * out_side_; }

    Mat<T> forward(const Mat<T>& x) {
        im2col(x, cols_);
        batch_ = static_cast<int>(x.rows());
        return apply(cols_, batch_);
    }

    Mat<T> infer(const Mat<T>& x) const {
        Mat<T> cols;
        im2col(x, cols);
        return apply(cols, static_cast<int>(x.rows()));
    }

    Mat<T> backward(const Mat<T>& dy) {
        const int area = out_side_ * out_side_;
        Mat<T> dyr(out_ch_, static_cast<Eigen::Index>(batch_) * area);
        for (int b = 0; b < batch_; ++b)
            for (int c = 0; c < out_ch_; ++c)
                for (int p = 0; p < area; ++p) dyr(c, static_cast<Eigen::Index>(b) * area + p) = dy(b, c * area + p);
        w_.grad.noalias() += dyr * cols_.transpose();
        b_.grad.col(0) += dyr.rowwise().sum();
        const Mat<T> dcols = w_.value.transpose() * dyr;
        Mat<T> dx = Mat<T>::Zero(batch_, input_size());
        col2im(dcols, dx);
        return dx;
    }

    void collect(ParamList<T>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }

private:
    int patch() const { return in_ch_ * k_ * k_; }

    void im2col(const Mat<T>& x, Mat<T>& cols) const {
        if (x.cols() != input_size()) throw ContractViolation("conv input size mismatch for " + w_.name);
        const int batch = static_cast<int>(x.rows());
        const int area = out_side_ * out_side_;
        cols.resize(patch(), static_cast<Eigen::Index>(batch) * area);
        for (int b = 0; b < batch; ++b) {
            const T* src = x.row(b).data();
            for (int c = 0; c < in_ch_; ++c) {
                const T* plane = src + c * in_side_ * in_side_;
                for (int ki = 0; ki < k_; ++ki) {
                    for (int kj = 0; kj < k_; ++kj) {
                        T* dst = cols.row((c * k_ + ki) * k_ + kj).data() + static_cast<Eigen::Index>(b) * area;
                        for (int oy = 0; oy < out_side_; ++oy) {
                            const T* line = plane + (oy * s_ + ki) * in_side_ + kj;
                            for (int ox = 0; ox < out_side_; ++ox) dst[oy * out_side_ + ox] = line[ox * s_];
                        }
                    }
                }
            }
        }
    }

    void col2im(const Mat<T>& dcols, Mat<T>& dx) const {
        const int batch = static_cast<int>(dx.rows());
        const int area = out_side_ * out_side_;
        for (int b = 0; b < batch; ++b) {
            T* dst = dx.row(b).data();
            for (int c = 0; c < in_ch_; ++c) {
                T* plane = dst + c * in_side_ * in_side_;
                for (int ki = 0; ki < k_; ++ki) {
                    for (int kj = 0; kj < k_; ++kj) {
                        const T* src = dcols.row((c * k_ + ki) * k_ + kj).data() + static_cast<Eigen::Index>(b) * area;
                        for (int oy = 0; oy < out_side_; ++oy) {
                            T* line = plane + (oy * s_ + ki) * in_side_ + kj;
                            for (int ox = 0; ox < out_side_; ++ox) line[ox * s_] += src[oy * out_side_ + ox];
                        }
                    }
                }
            }
        }
    }

    Mat<T> apply(const Mat<T>& cols, int batch) const {
        const int area = out_side_ * out_side_;
        Mat<T> yr = w_.value * cols;
        yr.colwise() += b_.value.col(0);
        Mat<T> y(batch, output_size());
        for (int b = 0; b < batch; ++b)
            for (int c = 0; c < out_ch_; ++c)
                for (int p = 0; p < area; ++p) y(b, c * area + p) = yr(c, static_cast<Eigen::Index>(b) * area + p);
        return y;
    }

    int in_ch_ = 0, out_ch_ = 0, k_ = 0, s_ = 0, in_side_ = 0, out_side_ = 0;
    int batch_ = 0;
    Parameter<T> w_, b_;
    Mat<T> cols_;
};

template <typename T>
class ReLU {
public:
    Mat<T> forward(const Mat<T>& x) {
        mask_ = (x.array() > T(0)).template cast<T>();
        return (x.array() * mask_.array()).matrix();
    }
    static Mat<T> infer(const Mat<T>& x) { return x.cwiseMax(T(0)); }
    Mat<T> backward(const Mat<T>& dy) const { return (dy.array() * mask_.array()).matrix(); }

private:
    Mat<T> mask_;
};

/// Adam with PyTorch defaults (beta1 0.9, beta2 0.999, eps 1e-8).
template <typename T>
class Adam {
public:
    Adam() = default;
    Adam(ParamList<T> params, double lr) : params_(std::move(params)), lr_(lr) {
        for (auto* p : params_) {
            m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
            v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        const T step = static_cast<T>(lr_ / bc1);
        const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
        const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = *params_[i];
            m_[i] = b1 * m_[i] + (T(1) - b1) * p.grad;
            v_[i] = b2 * v_[i] + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
            p.value.array() -= step * m_[i].array() / ((v_[i].array().sqrt() * inv_sqrt_bc2) + T(eps_));
        }
    }

    void zero_grad() { zero_grads(params_); }
    long steps() const { return t_; }
    const ParamList<T>& params() const { return params_; }

private:
    ParamList<T> params_;
    std::vector<Mat<T>> m_, v_;
    double lr_ = 1e-3;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
};

template <typename T>
std::size_t parameter_count(const ParamList<T>& params) {
    std::size_t n = 0;
    for (auto* p : params) n += static_cast<std::size_t>(p->value.size());
    return n;
}

}  // namespace flab::rl
