#pragma once

#include <cstdint>
#include <string>

#include "tdsc/types.hpp"

namespace tdsc {

struct NetworkDims {
    Index input_dim = 0;    // D
    Index hidden_dim = 512; // d_pre
    Index output_dim = 64;  // d
};

// Two affine encoder layers with a rectifier between them, plus one affine
// feature head and one affine cluster head. Gradients reuse the same struct.
struct NetworkParams {
    Matrix w1; Vector b1;  // hidden x input
    Matrix w2; Vector b2;  // hidden x hidden
    Matrix wg; Vector bg;  // output x hidden, feature head
    Matrix wh; Vector bh;  // output x hidden, cluster head

    NetworkDims dims() const { return {w1.cols(), w1.rows(), wg.rows()}; }

    Index parameter_count() const;
    Vector to_flat() const;
    static NetworkParams from_flat(const NetworkDims& dims, const Vector& flat);
    static NetworkParams zeros(const NetworkDims& dims);
};

// Cached forward pass. Columns of z_tilde / y_tilde have unit norm.
struct ForwardState {
    Matrix input;        // D x N
    Matrix pre_hidden;   // before the rectifier
    Matrix hidden;       // after the rectifier
    Matrix embed;        // encoder output
    Matrix z_raw, y_raw;
    Vector z_norms, y_norms;
    Matrix z_tilde, y_tilde;

    // Smallest |pre-activation|; finite-difference harnesses reject
    // instances where this sits on a rectifier kink.
    double min_abs_pre_hidden() const { return pre_hidden.cwiseAbs().minCoeff(); }
};

// Zero-mean Gaussian weights scaled by 1/sqrt(fan_in); zero biases.
// Deterministic for a fixed seed.
NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed);

// Throws ZeroNormColumn if a raw head column has norm below 1e-12.
ForwardState forward(const NetworkParams& params, const Matrix& x);

// Exact reverse-mode gradient of a scalar loss given its gradients w.r.t.
// the normalized head outputs. Includes the normalization Jacobian
// (I - z~ z~^T) / ||z||.
NetworkParams backward(const NetworkParams& params, const ForwardState& state,
                       const Matrix& dz_tilde, const Matrix& dy_tilde);

// theta <- theta - eta * grad, no momentum or weight decay.
NetworkParams sgd_step(const NetworkParams& params, const NetworkParams& grads, double eta);

// Binary checkpoint: magic, version, dims, then parameter tensors as
// little-endian 64-bit floats in declaration order (column-major).
void save_checkpoint(const std::string& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::string& path);

}  // namespace tdsc
