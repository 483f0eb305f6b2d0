#pragma once

#include "terradapt/common/math.hpp"

namespace terradapt::basis {

// Shape of the basis tensor: n_theta matrices of size n x m.
struct BasisShape {
    int n = 2;
    int m = 2;
    int n_theta = 4;

    [[nodiscard]] int size() const { return n * m * n_theta; }
    bool operator==(const BasisShape&) const = default;
};

// Flat storage of Phi. Entry (a, b) of component i lives at
// i * (n * m) + a * m + b: theta index slowest, each matrix row-major.
class BasisOutput {
public:
    BasisOutput() = default;
    BasisOutput(BasisShape shape, VecX flat);
    static BasisOutput zeros(BasisShape shape);

    [[nodiscard]] const BasisShape& shape() const { return shape_; }
    [[nodiscard]] const VecX& flat() const { return flat_; }
    [[nodiscard]] VecX& flat() { return flat_; }

    [[nodiscard]] double at(int i, int a, int b) const;
    [[nodiscard]] MatX component(int i) const;

    // H = [Phi_1 u, ..., Phi_ntheta u], an n x n_theta matrix.
    [[nodiscard]] MatX design(const VecX& u) const;

private:
    BasisShape shape_;
    VecX flat_;
};

inline int flat_index(const BasisShape& s, int i, int a, int b) { return i * (s.n * s.m) + a * s.m + b; }

// sum_i theta_i Phi_i
MatX contract(const BasisOutput& phi, const VecX& theta);

} // namespace terradapt::basis
