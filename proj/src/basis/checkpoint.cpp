#include "terradapt/basis/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace terradapt::basis {

namespace {

constexpr char kMagic[8] = {'T', 'D', 'B', 'A', 'S', 'I', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    std::vector<char>& buffer() { return buf_; }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(const std::vector<char>& buf, std::size_t end) : buf_(buf), end_(end) {}
    void bytes(void* p, std::size_t n) {
        if (pos_ + n > end_) throw IoError("checkpoint truncated");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        bytes(&v, sizeof v);
        return v;
    }
    double f64() {
        double v = 0.0;
        bytes(&v, sizeof v);
        return v;
    }
    [[nodiscard]] std::size_t pos() const { return pos_; }

private:
    const std::vector<char>& buf_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
    return static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const BasisNet& net = ckpt.net;
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(net.input_dim()));
    w.u32(static_cast<std::uint32_t>(net.shape().n));
    w.u32(static_cast<std::uint32_t>(net.shape().m));
    w.u32(static_cast<std::uint32_t>(net.shape().n_theta));
    w.u32(net.activation() == Activation::Tanh ? 0U : 1U);
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& l : net.layers()) {
        w.u32(static_cast<std::uint32_t>(l.W.rows()));
        w.u32(static_cast<std::uint32_t>(l.W.cols()));
        for (Eigen::Index i = 0; i < l.W.rows(); ++i)
            for (Eigen::Index j = 0; j < l.W.cols(); ++j) w.f64(l.W(i, j));
        for (Eigen::Index i = 0; i < l.b.size(); ++i) w.f64(l.b(i));
    }
    w.u32(static_cast<std::uint32_t>(ckpt.theta0.size()));
    for (Eigen::Index i = 0; i < ckpt.theta0.size(); ++i) w.f64(ckpt.theta0(i));
    w.u32(crc_of(w.buffer().data(), w.buffer().size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < sizeof kMagic + 8) throw IoError(path.string() + ": checkpoint truncated");
    const std::size_t body = buf.size() - 4;
    std::uint32_t stored = 0;
    std::memcpy(&stored, buf.data() + body, 4);
    if (stored != crc_of(buf.data(), body)) throw IoError(path.string() + ": checkpoint checksum mismatch");

    Reader r(buf, body);
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw IoError(path.string() + ": not a basis checkpoint");
    if (r.u32() != kVersion) throw IoError(path.string() + ": unsupported checkpoint version");
    const int input_dim = static_cast<int>(r.u32());
    BasisShape shape;
    shape.n = static_cast<int>(r.u32());
    shape.m = static_cast<int>(r.u32());
    shape.n_theta = static_cast<int>(r.u32());
    const std::uint32_t act_tag = r.u32();
    if (act_tag > 1) throw IoError(path.string() + ": unknown activation tag");
    const std::uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 64) throw IoError(path.string() + ": bad layer count");

    std::vector<MatX> Ws;
    std::vector<VecX> bs;
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        const auto rows = static_cast<Eigen::Index>(r.u32());
        const auto cols = static_cast<Eigen::Index>(r.u32());
        if (rows * cols * 8 > static_cast<Eigen::Index>(buf.size())) throw IoError(path.string() + ": bad layer dims");
        MatX W(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) W(i, j) = r.f64();
        VecX b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) b(i) = r.f64();
        Ws.push_back(std::move(W));
        bs.push_back(std::move(b));
    }
    const auto nt = static_cast<Eigen::Index>(r.u32());
    if (nt * 8 > static_cast<Eigen::Index>(buf.size())) throw IoError(path.string() + ": bad theta length");
    VecX theta(nt);
    for (Eigen::Index i = 0; i < nt; ++i) theta(i) = r.f64();
    if (r.pos() != body) throw IoError(path.string() + ": trailing bytes in checkpoint");

    std::vector<int> hidden;
    for (std::uint32_t k = 0; k + 1 < n_layers; ++k) hidden.push_back(static_cast<int>(Ws[k].rows()));
    BasisNet net(input_dim, hidden, shape, act_tag == 0 ? Activation::Tanh : Activation::Identity);
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        auto& l = net.layers()[k];
        if (l.W.rows() != Ws[k].rows() || l.W.cols() != Ws[k].cols())
            throw IoError(path.string() + ": layer shapes inconsistent with header");
        l.W = Ws[k];
        l.b = bs[k];
    }
    return {std::move(net), std::move(theta)};
}

} // namespace terradapt::basis
