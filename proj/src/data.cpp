#include "tdsc/data.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tdsc/errors.hpp"
#include "tdsc/rng.hpp"
#include "tdsc/text.hpp"

namespace tdsc {

namespace {

constexpr char kFeatureMagic[4] = {'T', 'D', 'S', 'C'};
constexpr std::uint32_t kFeatureVersion = 1;

std::string basename_of(const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

double parse_number(const std::string& token, size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + token + "'");
    }
    return value;
}

int parse_label(const std::string& token, size_t line_no) {
    errno = 0;
    char* end = nullptr;
    const long value = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw ParseError("line " + std::to_string(line_no) + ": bad label '" + token + "'");
    }
    return static_cast<int>(value);
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> tokens;
    std::string token;
    std::stringstream ss(line);
    while (std::getline(ss, token, ',')) {
        const size_t first = token.find_first_not_of(" \t\r");
        const size_t last = token.find_last_not_of(" \t\r");
        tokens.push_back(first == std::string::npos ? std::string()
                                                    : token.substr(first, last - first + 1));
    }
    return tokens;
}

FrameSequence load_csv(const std::string& path, bool has_labels) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    size_t line_no = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> tokens = split_csv_row(line);
        if (width == 0) {
            width = tokens.size();
            if (has_labels && width < 2) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": need at least one feature column plus the label");
            }
        } else if (tokens.size() != width) {
            throw RaggedRows("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " columns, got " +
                             std::to_string(tokens.size()));
        }
        const size_t feature_width = has_labels ? width - 1 : width;
        std::vector<double> row(feature_width);
        for (size_t j = 0; j < feature_width; ++j) row[j] = parse_number(tokens[j], line_no);
        if (has_labels) labels.push_back(parse_label(tokens[width - 1], line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFile("no frames in " + path);

    FrameSequence seq;
    seq.name = basename_of(path);
    const Index n = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(rows.front().size());
    seq.features.resize(d, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) {
            seq.features(j, i) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    }
    if (has_labels) seq.labels = std::move(labels);
    if (!all_finite(seq.features)) throw ParseError("non-finite feature values in " + path);
    return seq;
}

FrameSequence load_binary(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open " + path);
    struct Closer {
        std::FILE* f;
        ~Closer() { std::fclose(f); }
    } closer{f};

    char magic[4];
    std::uint32_t header[3];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kFeatureMagic, 4) != 0) {
        throw ParseError("not a feature file: " + path);
    }
    if (std::fread(header, sizeof(std::uint32_t), 3, f) != 3 ||
        header[0] != kFeatureVersion) {
        throw ParseError("unsupported feature file version in " + path);
    }
    const Index d = static_cast<Index>(header[1]);
    const Index n = static_cast<Index>(header[2]);
    if (d < 1 || n < 1) throw EmptyFile("no frames in " + path);

    FrameSequence seq;
    seq.name = basename_of(path);
    seq.features.resize(d, n);
    const size_t count = static_cast<size_t>(d) * static_cast<size_t>(n);
    if (std::fread(seq.features.data(), sizeof(double), count, f) != count) {
        throw ParseError("truncated feature payload in " + path);
    }
    // Label block is optional; presence inferred from the remaining bytes.
    std::vector<std::int32_t> raw(static_cast<size_t>(n));
    const size_t got = std::fread(raw.data(), sizeof(std::int32_t), raw.size(), f);
    if (got == raw.size()) {
        std::vector<int> labels(raw.begin(), raw.end());
        seq.labels = std::move(labels);
    } else if (got != 0) {
        throw ParseError("truncated label block in " + path);
    }
    if (!all_finite(seq.features)) throw ParseError("non-finite feature values in " + path);
    return seq;
}

}  // namespace

FrameSequence load_features(const std::string& path, FileFormat format, bool csv_has_labels) {
    return format == FileFormat::csv ? load_csv(path, csv_has_labels) : load_binary(path);
}

void save_features(const std::string& path, const FrameSequence& seq, FileFormat format) {
    if (seq.features.size() == 0) throw EmptyFile("refusing to save an empty sequence");
    if (seq.labels && static_cast<Index>(seq.labels->size()) != seq.frames()) {
        throw LengthMismatch("label count does not match frame count");
    }
    if (format == FileFormat::csv) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path + " for writing");
        for (Index i = 0; i < seq.frames(); ++i) {
            for (Index j = 0; j < seq.dim(); ++j) {
                if (j > 0) out << ',';
                out << format_double(seq.features(j, i));
            }
            if (seq.labels) out << ',' << (*seq.labels)[static_cast<size_t>(i)];
            out << '\n';
        }
        if (!out) throw IoError("failed writing " + path);
        return;
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    const std::uint32_t header[3] = {kFeatureVersion, static_cast<std::uint32_t>(seq.dim()),
                                     static_cast<std::uint32_t>(seq.frames())};
    std::fwrite(kFeatureMagic, 1, 4, f);
    std::fwrite(header, sizeof(std::uint32_t), 3, f);
    std::fwrite(seq.features.data(), sizeof(double),
                static_cast<size_t>(seq.features.size()), f);
    if (seq.labels) {
        std::vector<std::int32_t> raw(seq.labels->begin(), seq.labels->end());
        std::fwrite(raw.data(), sizeof(std::int32_t), raw.size(), f);
    }
    const bool ok = std::fflush(f) == 0;
    std::fclose(f);
    if (!ok) throw IoError("failed writing " + path);
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<int> labels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        labels.push_back(parse_label(line, line_no));
    }
    if (labels.empty()) throw EmptyFile("no labels in " + path);
    return labels;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (int label : labels) out << label << '\n';
    if (!out) throw IoError("failed writing " + path);
}

FrameSequence synth_uos_sequence(const SynthConfig& cfg) {
    if (cfg.ambient_dim < 1 || cfg.subspace_dim < 1 || cfg.k < 1) {
        throw InvalidConfig("dimensions and cluster count must be positive");
    }
    if (cfg.segment_lengths.empty()) throw InvalidConfig("need at least one segment");
    for (Index len : cfg.segment_lengths) {
        if (len < 2) throw InvalidConfig("every segment needs at least 2 frames");
    }
    if (cfg.noise_sigma < 0.0) throw InvalidConfig("noise sigma must be nonnegative");
    if (cfg.coeff_autocorr < 0.0 || cfg.coeff_autocorr >= 1.0) {
        throw InvalidConfig("coefficient autocorrelation must lie in [0, 1)");
    }

    const Index d = cfg.ambient_dim;
    const Index r = cfg.subspace_dim;
    const Index stacked = r * static_cast<Index>(cfg.k);
    Rng rng(cfg.seed);

    std::vector<Matrix> bases(static_cast<size_t>(cfg.k));
    if (stacked <= d) {
        // One joint orthogonalization makes the k bases mutually orthogonal.
        Matrix g(d, stacked);
        for (Index j = 0; j < stacked; ++j) {
            for (Index i = 0; i < d; ++i) g(i, j) = rng.gaussian();
        }
        const Matrix q =
            Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(d, stacked);
        for (int j = 0; j < cfg.k; ++j) {
            bases[static_cast<size_t>(j)] = q.middleCols(static_cast<Index>(j) * r, r);
        }
    } else {
        std::fprintf(stderr,
                     "warning: subspace_dim * k = %lld exceeds ambient_dim = %lld; "
                     "bases are independent, not mutually orthogonal\n",
                     static_cast<long long>(stacked), static_cast<long long>(d));
        for (int j = 0; j < cfg.k; ++j) {
            Matrix g(d, r);
            for (Index col = 0; col < r; ++col) {
                for (Index row = 0; row < d; ++row) g(row, col) = rng.gaussian();
            }
            bases[static_cast<size_t>(j)] =
                Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(d, r);
        }
    }

    Index total = 0;
    for (Index len : cfg.segment_lengths) total += len;

    FrameSequence seq;
    seq.name = "synth_uos";
    seq.features.resize(d, total);
    std::vector<int> labels(static_cast<size_t>(total), 0);

    const double rho = cfg.coeff_autocorr;
    const double innovation = std::sqrt(1.0 - rho * rho);
    Index at = 0;
    for (size_t s = 0; s < cfg.segment_lengths.size(); ++s) {
        const int label = static_cast<int>(s) % cfg.k;
        const Matrix& basis = bases[static_cast<size_t>(label)];
        Vector coeff(r);
        for (Index f = 0; f < cfg.segment_lengths[s]; ++f, ++at) {
            Vector x;
            double nrm = 0.0;
            do {
                if (f == 0) {
                    for (Index i = 0; i < r; ++i) coeff(i) = rng.gaussian();
                } else {
                    for (Index i = 0; i < r; ++i) {
                        coeff(i) = rho * coeff(i) + innovation * rng.gaussian();
                    }
                }
                x = basis * coeff;
                if (cfg.noise_sigma > 0.0) {
                    for (Index i = 0; i < d; ++i) x(i) += cfg.noise_sigma * rng.gaussian();
                }
                nrm = x.norm();
            } while (nrm < 1e-12);
            seq.features.col(at) = x / nrm;
            labels[static_cast<size_t>(at)] = label;
        }
    }
    seq.labels = std::move(labels);
    return seq;
}

FrameSequence add_noise(const FrameSequence& seq, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw InvalidConfig("noise sigma must be nonnegative");
    FrameSequence out = seq;
    if (sigma == 0.0) return out;
    const double stddev = std::sqrt(sigma);
    Rng rng(seed);
    for (Index j = 0; j < out.features.cols(); ++j) {
        for (Index i = 0; i < out.features.rows(); ++i) {
            out.features(i, j) += stddev * rng.gaussian();
        }
    }
    return out;
}

FrameSequence concat_sequences(const std::vector<FrameSequence>& seqs, bool offset_labels) {
    if (seqs.empty()) throw InvalidConfig("nothing to concatenate");
    const Index d = seqs.front().dim();
    Index total = 0;
    bool all_labeled = true;
    for (const FrameSequence& s : seqs) {
        if (s.dim() != d) {
            throw DimensionMismatch("feature dims differ: " + std::to_string(d) + " vs " +
                                    std::to_string(s.dim()));
        }
        total += s.frames();
        all_labeled = all_labeled && s.labels.has_value();
    }

    FrameSequence out;
    out.name = seqs.front().name + (seqs.size() > 1 ? "+concat" : "");
    out.features.resize(d, total);
    std::vector<int> labels;
    Index at = 0;
    int offset = 0;
    for (const FrameSequence& s : seqs) {
        out.features.middleCols(at, s.frames()) = s.features;
        at += s.frames();
        if (all_labeled) {
            int max_label = 0;
            for (int label : *s.labels) {
                labels.push_back(offset_labels ? label + offset : label);
                max_label = std::max(max_label, label);
            }
            if (offset_labels) offset += max_label + 1;
        }
    }
    if (all_labeled) out.labels = std::move(labels);
    return out;
}

}  // namespace tdsc
