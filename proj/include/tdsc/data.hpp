#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdsc/types.hpp"

namespace tdsc {

// Frames are columns of features (D x N). CSV files store frames as rows for
// readability; the loader transposes.
struct FrameSequence {
    Matrix features;
    std::optional<std::vector<int>> labels;
    std::string name;

    Index dim() const { return features.rows(); }
    Index frames() const { return features.cols(); }
};

enum class FileFormat { csv, binary };

struct SynthConfig {
    Index ambient_dim = 30;
    Index subspace_dim = 3;
    int k = 3;
    std::vector<Index> segment_lengths = {40, 40, 40};
    double noise_sigma = 0.01;
    // Within-segment coefficient autocorrelation; stationary AR(1) keeps the
    // per-frame marginal N(0, I_r) while adjacent frames stay close, the way
    // consecutive video frames do. 0 gives independent frames.
    double coeff_autocorr = 0.98;
    std::uint64_t seed = 0;
};

// csv_has_labels: trailing integer column of a CSV row is the frame label.
// The binary format carries its own optional label block.
FrameSequence load_features(const std::string& path, FileFormat format,
                            bool csv_has_labels = false);
void save_features(const std::string& path, const FrameSequence& seq, FileFormat format);

std::vector<int> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<int>& labels);

// Unit-norm frames drawn from k low-dimensional subspaces, one subspace per
// segment (segment index mod k). Bases are exactly mutually orthogonal when
// subspace_dim * k <= ambient_dim, otherwise independent with a warning on
// stderr. Deterministic per seed.
FrameSequence synth_uos_sequence(const SynthConfig& cfg);

// Isotropic corruption N(0, sigma*I): sigma is the per-entry noise variance,
// so entries gain std sqrt(sigma). Seeded; labels untouched.
FrameSequence add_noise(const FrameSequence& seq, double sigma, std::uint64_t seed);

// Concatenate along frames. offset_labels shifts each input's label ids past
// the previous input's maximum so distinct inputs keep distinct ids.
FrameSequence concat_sequences(const std::vector<FrameSequence>& seqs, bool offset_labels);

}  // namespace tdsc
