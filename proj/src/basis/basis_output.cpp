#include "terradapt/basis/basis_output.hpp"

namespace terradapt::basis {

BasisOutput::BasisOutput(BasisShape shape, VecX flat) : shape_(shape), flat_(std::move(flat)) {
    if (flat_.size() != shape_.size())
        throw DimensionError("basis output has " + std::to_string(flat_.size()) + " entries, shape needs "
                             + std::to_string(shape_.size()));
}

BasisOutput BasisOutput::zeros(BasisShape shape) { return {shape, VecX::Zero(shape.size())}; }

double BasisOutput::at(int i, int a, int b) const { return flat_(flat_index(shape_, i, a, b)); }

MatX BasisOutput::component(int i) const {
    if (i < 0 || i >= shape_.n_theta) throw DimensionError("basis component index out of range");
    MatX c(shape_.n, shape_.m);
    for (int a = 0; a < shape_.n; ++a)
        for (int b = 0; b < shape_.m; ++b) c(a, b) = at(i, a, b);
    return c;
}

MatX BasisOutput::design(const VecX& u) const {
    if (u.size() != shape_.m) throw DimensionError("input size does not match basis column count");
    MatX H = MatX::Zero(shape_.n, shape_.n_theta);
    for (int i = 0; i < shape_.n_theta; ++i)
        for (int a = 0; a < shape_.n; ++a)
            for (int b = 0; b < shape_.m; ++b) H(a, i) += at(i, a, b) * u(b);
    return H;
}

MatX contract(const BasisOutput& phi, const VecX& theta) {
    const BasisShape& s = phi.shape();
    if (theta.size() != s.n_theta) throw DimensionError("theta size does not match basis");
    MatX out = MatX::Zero(s.n, s.m);
    for (int i = 0; i < s.n_theta; ++i)
        for (int a = 0; a < s.n; ++a)
            for (int b = 0; b < s.m; ++b) out(a, b) += theta(i) * phi.at(i, a, b);
    return out;
}

} // namespace terradapt::basis
