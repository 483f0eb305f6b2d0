#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terradapt/basis/basis_output.hpp"

namespace terradapt::basis {

enum class Activation { Tanh, Identity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct DenseLayer {
    MatX W;  // out x in
    VecX b;
    VecX power_vec;  // right singular vector estimate, warm start for power iteration
};

struct NetGradients {
    std::vector<MatX> dW;
    std::vector<VecX> db;
    MatX d_input;  // input_dim x batch

    void set_zero_like(const std::vector<DenseLayer>& layers);
};

struct ForwardCache {
    // a[0] = input, a[k] = output of layer k (post-activation for hidden layers).
    std::vector<MatX> a;
};

// Fully connected net with activation on hidden layers and a linear output
// layer. Inputs are stacked (state sub-vector, feature vector).
class BasisNet {
public:
    BasisNet() = default;
    BasisNet(int input_dim, const std::vector<int>& hidden, BasisShape shape, Activation act);

    // Uniform(+-1/sqrt(fan_in)) weights and biases, then one spectral
    // normalization pass.
    static BasisNet initialized(int input_dim, const std::vector<int>& hidden, BasisShape shape,
                                Activation act, std::uint64_t seed);

    [[nodiscard]] int input_dim() const { return input_dim_; }
    [[nodiscard]] int output_dim() const { return shape_.size(); }
    [[nodiscard]] const BasisShape& shape() const { return shape_; }
    [[nodiscard]] Activation activation() const { return act_; }
    [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
    [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }

    // Columns of X are inputs; returns output_dim x batch.
    [[nodiscard]] MatX forward_batch(const MatX& X, ForwardCache* cache = nullptr) const;
    [[nodiscard]] VecX forward_flat(const VecX& input) const;
    [[nodiscard]] BasisOutput forward(const VecX& x, const VecX& e) const;

    // Reverse mode through a cached forward pass. d_out is output_dim x batch.
    [[nodiscard]] NetGradients backward(const ForwardCache& cache, const MatX& d_out) const;
    // Single-sample convenience: upstream gradient on the flat output.
    [[nodiscard]] NetGradients backward(const VecX& x, const VecX& e, const VecX& d_out) const;

    // Divides each W_i by max(1, sigma_i), sigma_i from warm-started power
    // iteration. Power iteration approaches sigma from below, so a matrix can
    // end slightly above unit norm; when exact_check is set the largest
    // eigenvalue of the smaller Gram matrix is then computed and W_i divided
    // once more if it still exceeds 1. Zero matrices are left unchanged.
    // Returns the power-iteration estimates.
    std::vector<double> spectral_normalize(int iterations = 30, bool exact_check = true);

    [[nodiscard]] int num_parameters() const;
    [[nodiscard]] VecX parameters() const;
    void set_parameters(const VecX& p);
    [[nodiscard]] static VecX flatten(const NetGradients& g);

    [[nodiscard]] bool all_finite() const;

private:
    [[nodiscard]] VecX stack_input(const VecX& x, const VecX& e) const;

    int input_dim_ = 0;
    BasisShape shape_;
    Activation act_ = Activation::Tanh;
    std::vector<DenseLayer> layers_;
};

// Power iteration on W^T W starting from (and updating) v. Returns the
// estimate of the largest singular value.
double power_iteration_norm(const MatX& W, VecX& v, int iterations);

// Largest singular value from the eigenvalues of the smaller Gram matrix.
double exact_spectral_norm(const MatX& W);

} // namespace terradapt::basis
