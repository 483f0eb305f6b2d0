#include "terradapt/basis/basis_function.hpp"

namespace terradapt::basis {

ConstantBasis::ConstantBasis(int n, int m) {
    const BasisShape s{n, m, n * m};
    out_ = BasisOutput::zeros(s);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < m; ++b) out_.flat()(flat_index(s, a * m + b, a, b)) = 1.0;
}

BasisOutput ConstantBasis::evaluate(const VecX&, const VecX&) const { return out_; }

NetBasis::NetBasis(std::shared_ptr<const BasisNet> net) : net_(std::move(net)) {
    if (!net_) throw ConfigError("net basis needs a network");
}

BasisOutput NetBasis::evaluate(const VecX& x, const VecX& e) const { return net_->forward(x, e); }

} // namespace terradapt::basis
