#include "tdsc/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "tdsc/errors.hpp"
#include "tdsc/rng.hpp"

namespace tdsc {

namespace {

constexpr double kMinColumnNorm = 1e-12;

void check_dims(const NetworkParams& p) {
    const Index hidden = p.w1.rows();
    const Index output = p.wg.rows();
    if (p.b1.size() != hidden || p.w2.rows() != hidden || p.w2.cols() != hidden ||
        p.b2.size() != hidden || p.wg.cols() != hidden || p.bg.size() != output ||
        p.wh.rows() != output || p.wh.cols() != hidden || p.bh.size() != output) {
        throw DimensionMismatch("inconsistent parameter shapes");
    }
}

// Column normalization with its norms cached for the backward pass.
void normalize_columns(const Matrix& raw, Matrix& out, Vector& norms, const char* head) {
    const Index n = raw.cols();
    out.resize(raw.rows(), n);
    norms.resize(n);
    for (Index j = 0; j < n; ++j) {
        const double nrm = raw.col(j).norm();
        if (nrm < kMinColumnNorm) {
            throw ZeroNormColumn(std::string(head) + " column " + std::to_string(j) +
                                 " has near-zero norm " + std::to_string(nrm));
        }
        norms(j) = nrm;
        out.col(j) = raw.col(j) / nrm;
    }
}

// Pulls the gradient through v~ = v / ||v||: dv = (I - v~ v~^T) dv~ / ||v||.
Matrix normalization_backward(const Matrix& tilde, const Vector& norms, const Matrix& d_tilde) {
    Matrix d_raw(tilde.rows(), tilde.cols());
    for (Index j = 0; j < tilde.cols(); ++j) {
        const double dot = tilde.col(j).dot(d_tilde.col(j));
        d_raw.col(j) = (d_tilde.col(j) - dot * tilde.col(j)) / norms(j);
    }
    return d_raw;
}

void write_matrix(std::FILE* f, const Matrix& m) {
    std::fwrite(m.data(), sizeof(double), static_cast<size_t>(m.size()), f);
}

void write_vector(std::FILE* f, const Vector& v) {
    std::fwrite(v.data(), sizeof(double), static_cast<size_t>(v.size()), f);
}

void read_block(std::FILE* f, double* dst, size_t count, const std::string& path) {
    if (std::fread(dst, sizeof(double), count, f) != count) {
        throw IoError("truncated checkpoint: " + path);
    }
}

}  // namespace

Index NetworkParams::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() +
           wg.size() + bg.size() + wh.size() + bh.size();
}

Vector NetworkParams::to_flat() const {
    Vector flat(parameter_count());
    Index at = 0;
    auto put = [&](const double* data, Index n) {
        std::memcpy(flat.data() + at, data, static_cast<size_t>(n) * sizeof(double));
        at += n;
    };
    put(w1.data(), w1.size()); put(b1.data(), b1.size());
    put(w2.data(), w2.size()); put(b2.data(), b2.size());
    put(wg.data(), wg.size()); put(bg.data(), bg.size());
    put(wh.data(), wh.size()); put(bh.data(), bh.size());
    return flat;
}

NetworkParams NetworkParams::from_flat(const NetworkDims& dims, const Vector& flat) {
    NetworkParams p = zeros(dims);
    if (flat.size() != p.parameter_count()) {
        throw DimensionMismatch("flat vector has " + std::to_string(flat.size()) +
                                " entries, parameters need " + std::to_string(p.parameter_count()));
    }
    Index at = 0;
    auto take = [&](double* data, Index n) {
        std::memcpy(data, flat.data() + at, static_cast<size_t>(n) * sizeof(double));
        at += n;
    };
    take(p.w1.data(), p.w1.size()); take(p.b1.data(), p.b1.size());
    take(p.w2.data(), p.w2.size()); take(p.b2.data(), p.b2.size());
    take(p.wg.data(), p.wg.size()); take(p.bg.data(), p.bg.size());
    take(p.wh.data(), p.wh.size()); take(p.bh.data(), p.bh.size());
    return p;
}

NetworkParams NetworkParams::zeros(const NetworkDims& dims) {
    if (dims.input_dim <= 0 || dims.hidden_dim <= 0 || dims.output_dim <= 0) {
        throw InvalidConfig("network dimensions must be positive");
    }
    NetworkParams p;
    p.w1 = Matrix::Zero(dims.hidden_dim, dims.input_dim);
    p.b1 = Vector::Zero(dims.hidden_dim);
    p.w2 = Matrix::Zero(dims.hidden_dim, dims.hidden_dim);
    p.b2 = Vector::Zero(dims.hidden_dim);
    p.wg = Matrix::Zero(dims.output_dim, dims.hidden_dim);
    p.bg = Vector::Zero(dims.output_dim);
    p.wh = Matrix::Zero(dims.output_dim, dims.hidden_dim);
    p.bh = Vector::Zero(dims.output_dim);
    return p;
}

NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed) {
    NetworkParams p = NetworkParams::zeros(dims);
    Rng rng(seed);
    auto fill = [&](Matrix& w) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        // Column-major order so layout matches to_flat round trips.
        for (Index j = 0; j < w.cols(); ++j) {
            for (Index i = 0; i < w.rows(); ++i) {
                w(i, j) = scale * rng.gaussian();
            }
        }
    };
    fill(p.w1);
    fill(p.w2);
    fill(p.wg);
    fill(p.wh);
    return p;
}

ForwardState forward(const NetworkParams& params, const Matrix& x) {
    check_dims(params);
    if (x.rows() != params.w1.cols()) {
        throw DimensionMismatch("input has " + std::to_string(x.rows()) +
                                " rows, encoder expects " + std::to_string(params.w1.cols()));
    }
    if (x.cols() == 0) {
        throw DimensionMismatch("input has no frames");
    }
    ForwardState s;
    s.input = x;
    s.pre_hidden = (params.w1 * x).colwise() + params.b1;
    s.hidden = s.pre_hidden.cwiseMax(0.0);
    s.embed = (params.w2 * s.hidden).colwise() + params.b2;
    s.z_raw = (params.wg * s.embed).colwise() + params.bg;
    s.y_raw = (params.wh * s.embed).colwise() + params.bh;
    normalize_columns(s.z_raw, s.z_tilde, s.z_norms, "feature head");
    normalize_columns(s.y_raw, s.y_tilde, s.y_norms, "cluster head");
    return s;
}

NetworkParams backward(const NetworkParams& params, const ForwardState& state,
                       const Matrix& dz_tilde, const Matrix& dy_tilde) {
    check_dims(params);
    if (dz_tilde.rows() != state.z_tilde.rows() || dz_tilde.cols() != state.z_tilde.cols() ||
        dy_tilde.rows() != state.y_tilde.rows() || dy_tilde.cols() != state.y_tilde.cols()) {
        throw DimensionMismatch("head gradient shapes do not match the forward state");
    }
    NetworkParams g = NetworkParams::zeros(params.dims());

    const Matrix dz_raw = normalization_backward(state.z_tilde, state.z_norms, dz_tilde);
    const Matrix dy_raw = normalization_backward(state.y_tilde, state.y_norms, dy_tilde);

    g.wg = dz_raw * state.embed.transpose();
    g.bg = dz_raw.rowwise().sum();
    g.wh = dy_raw * state.embed.transpose();
    g.bh = dy_raw.rowwise().sum();

    const Matrix d_embed = params.wg.transpose() * dz_raw + params.wh.transpose() * dy_raw;
    g.w2 = d_embed * state.hidden.transpose();
    g.b2 = d_embed.rowwise().sum();

    Matrix d_hidden = params.w2.transpose() * d_embed;
    // Rectifier gate: zero where the pre-activation was non-positive.
    d_hidden = (state.pre_hidden.array() > 0.0).select(d_hidden, 0.0);

    g.w1 = d_hidden * state.input.transpose();
    g.b1 = d_hidden.rowwise().sum();
    return g;
}

NetworkParams sgd_step(const NetworkParams& params, const NetworkParams& grads, double eta) {
    check_dims(params);
    check_dims(grads);
    if (params.w1.rows() != grads.w1.rows() || params.w1.cols() != grads.w1.cols() ||
        params.wg.rows() != grads.wg.rows()) {
        throw DimensionMismatch("gradient shapes do not match parameters");
    }
    NetworkParams next = params;
    next.w1 -= eta * grads.w1; next.b1 -= eta * grads.b1;
    next.w2 -= eta * grads.w2; next.b2 -= eta * grads.b2;
    next.wg -= eta * grads.wg; next.bg -= eta * grads.bg;
    next.wh -= eta * grads.wh; next.bh -= eta * grads.bh;
    return next;
}

namespace {
constexpr char kCkptMagic[8] = {'T', 'D', 'S', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const NetworkParams& params) {
    check_dims(params);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open checkpoint for writing: " + path);
    const NetworkDims dims = params.dims();
    const std::uint32_t header[4] = {kCkptVersion,
                                     static_cast<std::uint32_t>(dims.input_dim),
                                     static_cast<std::uint32_t>(dims.hidden_dim),
                                     static_cast<std::uint32_t>(dims.output_dim)};
    std::fwrite(kCkptMagic, 1, sizeof(kCkptMagic), f);
    std::fwrite(header, sizeof(std::uint32_t), 4, f);
    write_matrix(f, params.w1); write_vector(f, params.b1);
    write_matrix(f, params.w2); write_vector(f, params.b2);
    write_matrix(f, params.wg); write_vector(f, params.bg);
    write_matrix(f, params.wh); write_vector(f, params.bh);
    const bool ok = std::fflush(f) == 0;
    std::fclose(f);
    if (!ok) throw IoError("failed writing checkpoint: " + path);
}

NetworkParams load_checkpoint(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    std::uint32_t header[4];
    if (std::fread(magic, 1, sizeof(magic), f) != sizeof(magic) ||
        std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0) {
        std::fclose(f);
        throw ParseError("not a checkpoint file: " + path);
    }
    if (std::fread(header, sizeof(std::uint32_t), 4, f) != 4 || header[0] != kCkptVersion) {
        std::fclose(f);
        throw ParseError("unsupported checkpoint version in " + path);
    }
    NetworkDims dims{static_cast<Index>(header[1]), static_cast<Index>(header[2]),
                     static_cast<Index>(header[3])};
    NetworkParams p;
    try {
        p = NetworkParams::zeros(dims);
        read_block(f, p.w1.data(), static_cast<size_t>(p.w1.size()), path);
        read_block(f, p.b1.data(), static_cast<size_t>(p.b1.size()), path);
        read_block(f, p.w2.data(), static_cast<size_t>(p.w2.size()), path);
        read_block(f, p.b2.data(), static_cast<size_t>(p.b2.size()), path);
        read_block(f, p.wg.data(), static_cast<size_t>(p.wg.size()), path);
        read_block(f, p.bg.data(), static_cast<size_t>(p.bg.size()), path);
        read_block(f, p.wh.data(), static_cast<size_t>(p.wh.size()), path);
        read_block(f, p.bh.data(), static_cast<size_t>(p.bh.size()), path);
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
    return p;
}

}  // namespace tdsc
