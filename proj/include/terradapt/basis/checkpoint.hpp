#pragma once

#include <filesystem>

#include "terradapt/basis/net.hpp"

namespace terradapt::basis {

struct Checkpoint {
    BasisNet net;
    // theta fitted over the training data with the final weights; the
    // controller starts from it.
    VecX theta0;
};

// Binary container, little-endian: magic "TDBASIS1", u32 version, u32 input
// dim, u32 n, m, n_theta, u32 activation tag, u32 layer count, then per layer
// u32 rows, cols, rows*cols f64 (row-major W), rows f64 (b); u32 theta length,
// f64 theta; finally a CRC-32 of every preceding byte.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace terradapt::basis
