#pragma once

#include <memory>

#include "terradapt/basis/net.hpp"

namespace terradapt::basis {

// Phi(x, E) as seen by the controller.
class BasisFunction {
public:
    virtual ~BasisFunction() = default;
    [[nodiscard]] virtual BasisOutput evaluate(const VecX& x, const VecX& e) const = 0;
    [[nodiscard]] virtual BasisShape shape() const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

// Canonical basis of n x m matrices; n_theta = n * m. Ignores its inputs.
class ConstantBasis final : public BasisFunction {
public:
    explicit ConstantBasis(int n = 2, int m = 2);
    [[nodiscard]] BasisOutput evaluate(const VecX& x, const VecX& e) const override;
    [[nodiscard]] BasisShape shape() const override { return out_.shape(); }
    [[nodiscard]] std::string name() const override { return "constant"; }

private:
    BasisOutput out_;
};

class NetBasis final : public BasisFunction {
public:
    explicit NetBasis(std::shared_ptr<const BasisNet> net);
    [[nodiscard]] BasisOutput evaluate(const VecX& x, const VecX& e) const override;
    [[nodiscard]] BasisShape shape() const override { return net_->shape(); }
    [[nodiscard]] std::string name() const override { return "dnn"; }
    [[nodiscard]] const BasisNet& net() const { return *net_; }

private:
    std::shared_ptr<const BasisNet> net_;
};

} // namespace terradapt::basis
