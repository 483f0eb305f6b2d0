#include "terradapt/basis/net.hpp"

#include <cmath>
#include <random>

namespace terradapt::basis {

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity" || name == "linear") return Activation::Identity;
    throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }

void NetGradients::set_zero_like(const std::vector<DenseLayer>& layers) {
    dW.clear();
    db.clear();
    for (const auto& l : layers) {
        dW.push_back(MatX::Zero(l.W.rows(), l.W.cols()));
        db.push_back(VecX::Zero(l.b.size()));
    }
}

BasisNet::BasisNet(int input_dim, const std::vector<int>& hidden, BasisShape shape, Activation act)
    : input_dim_(input_dim), shape_(shape), act_(act) {
    if (input_dim <= 0) throw ConfigError("basis net input dimension must be positive");
    if (shape.n <= 0 || shape.m <= 0 || shape.n_theta <= 0) throw ConfigError("basis shape must be positive");
    int fan_in = input_dim;
    auto add = [&](int out) {
        if (out <= 0) throw ConfigError("hidden layer width must be positive");
        layers_.push_back({MatX::Zero(out, fan_in), VecX::Zero(out), VecX::Ones(fan_in).normalized()});
        fan_in = out;
    };
    for (int h : hidden) add(h);
    add(shape.size());
}

BasisNet BasisNet::initialized(int input_dim, const std::vector<int>& hidden, BasisShape shape,
                               Activation act, std::uint64_t seed) {
    BasisNet net(input_dim, hidden, shape, act);
    std::mt19937_64 rng(seed);
    for (auto& l : net.layers_) {
        const double r = 1.0 / std::sqrt(static_cast<double>(l.W.cols()));
        std::uniform_real_distribution<double> u(-r, r);
        for (Eigen::Index j = 0; j < l.W.cols(); ++j)
            for (Eigen::Index i = 0; i < l.W.rows(); ++i) l.W(i, j) = u(rng);
        for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = u(rng);
        std::normal_distribution<double> n(0.0, 1.0);
        for (Eigen::Index i = 0; i < l.power_vec.size(); ++i) l.power_vec(i) = n(rng);
        l.power_vec.normalize();
    }
    net.spectral_normalize();
    return net;
}

VecX BasisNet::stack_input(const VecX& x, const VecX& e) const {
    if (x.size() + e.size() != input_dim_)
        throw DimensionError("basis net expects " + std::to_string(input_dim_) + " inputs, got "
                             + std::to_string(x.size() + e.size()));
    VecX in(input_dim_);
    in << x, e;
    return in;
}

MatX BasisNet::forward_batch(const MatX& X, ForwardCache* cache) const {
    if (X.rows() != input_dim_) throw DimensionError("basis net input has the wrong row count");
    if (cache) {
        cache->a.clear();
        cache->a.push_back(X);
    }
    MatX a = X;
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        MatX z = layers_[k].W * a;
        z.colwise() += layers_[k].b;
        if (k + 1 < layers_.size() && act_ == Activation::Tanh) z = z.array().tanh().matrix();
        a = std::move(z);
        if (cache) cache->a.push_back(a);
    }
    return a;
}

VecX BasisNet::forward_flat(const VecX& input) const { return forward_batch(input); }

BasisOutput BasisNet::forward(const VecX& x, const VecX& e) const {
    return {shape_, forward_flat(stack_input(x, e))};
}

NetGradients BasisNet::backward(const ForwardCache& cache, const MatX& d_out) const {
    if (cache.a.size() != layers_.size() + 1) throw DimensionError("forward cache does not match net");
    if (d_out.rows() != output_dim() || d_out.cols() != cache.a[0].cols())
        throw DimensionError("upstream gradient has the wrong shape");
    NetGradients g;
    g.dW.resize(layers_.size());
    g.db.resize(layers_.size());
    MatX delta = d_out;
    for (std::size_t k = layers_.size(); k-- > 0;) {
        if (k + 1 < layers_.size() && act_ == Activation::Tanh)
            delta = (delta.array() * (1.0 - cache.a[k + 1].array().square())).matrix();
        g.dW[k].noalias() = delta * cache.a[k].transpose();
        g.db[k] = delta.rowwise().sum();
        delta = layers_[k].W.transpose() * delta;
    }
    g.d_input = std::move(delta);
    return g;
}

NetGradients BasisNet::backward(const VecX& x, const VecX& e, const VecX& d_out) const {
    ForwardCache cache;
    (void)forward_batch(stack_input(x, e), &cache);
    return backward(cache, d_out);
}

double power_iteration_norm(const MatX& W, VecX& v, int iterations) {
    if (v.size() != W.cols() || !(v.norm() > 0.0) || !v.allFinite()) v = VecX::Ones(W.cols()).normalized();
    VecX u = W * v;
    for (int it = 0; it < iterations; ++it) {
        VecX w = W.transpose() * u;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        u = W * v;
    }
    return u.norm();
}

std::vector<double> BasisNet::spectral_normalize(int iterations, bool exact_check) {
    std::vector<double> sigmas;
    for (auto& l : layers_) {
        if (!l.W.allFinite()) throw NumericalError("non-finite weights before spectral normalization");
        if (l.W.isZero(0.0)) {
            sigmas.push_back(0.0);
            continue;
        }
        const double sigma = power_iteration_norm(l.W, l.power_vec, iterations);
        sigmas.push_back(sigma);
        if (sigma > 1.0) l.W /= sigma;
        if (exact_check) {
            const double exact = exact_spectral_norm(l.W);
            if (exact > 1.0) l.W /= exact;
        }
    }
    return sigmas;
}

int BasisNet::num_parameters() const {
    int n = 0;
    for (const auto& l : layers_) n += static_cast<int>(l.W.size() + l.b.size());
    return n;
}

VecX BasisNet::parameters() const {
    VecX p(num_parameters());
    Eigen::Index o = 0;
    for (const auto& l : layers_) {
        p.segment(o, l.W.size()) = l.W.reshaped();
        o += l.W.size();
        p.segment(o, l.b.size()) = l.b;
        o += l.b.size();
    }
    return p;
}

void BasisNet::set_parameters(const VecX& p) {
    if (p.size() != num_parameters()) throw DimensionError("parameter vector has the wrong size");
    Eigen::Index o = 0;
    for (auto& l : layers_) {
        l.W.reshaped() = p.segment(o, l.W.size());
        o += l.W.size();
        l.b = p.segment(o, l.b.size());
        o += l.b.size();
    }
}

VecX BasisNet::flatten(const NetGradients& g) {
    Eigen::Index n = 0;
    for (std::size_t k = 0; k < g.dW.size(); ++k) n += g.dW[k].size() + g.db[k].size();
    VecX p(n);
    Eigen::Index o = 0;
    for (std::size_t k = 0; k < g.dW.size(); ++k) {
        p.segment(o, g.dW[k].size()) = g.dW[k].reshaped();
        o += g.dW[k].size();
        p.segment(o, g.db[k].size()) = g.db[k];
        o += g.db[k].size();
    }
    return p;
}

bool BasisNet::all_finite() const {
    for (const auto& l : layers_)
        if (!l.W.allFinite() || !l.b.allFinite()) return false;
    return true;
}

} // namespace terradapt::basis

namespace terradapt::basis {

double exact_spectral_norm(const MatX& W) {
    if (W.size() == 0) return 0.0;
    const MatX G = W.rows() <= W.cols() ? MatX(W * W.transpose()) : MatX(W.transpose() * W);
    Eigen::SelfAdjointEigenSolver<MatX> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

} // namespace terradapt::basis
