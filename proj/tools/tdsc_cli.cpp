// Command-line front end for the temporal segmentation pipeline:
// synth, train, segment, eval, gradcheck, ablate, robustness, report.
#include <CLI11.hpp>

#include <Eigen/SVD>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tdsc/baselines.hpp"
#include "tdsc/clustering.hpp"
#include "tdsc/config.hpp"
#include "tdsc/data.hpp"
#include "tdsc/errors.hpp"
#include "tdsc/metrics.hpp"
#include "tdsc/text.hpp"
#include "tdsc/trainer.hpp"

namespace fs = std::filesystem;
using namespace tdsc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Maps library exceptions onto the documented exit codes.
int exit_code_for(const Error& e) {
    if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const KTooLarge*>(&e)) {
        return kExitConfig;
    }
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const LengthMismatch*>(&e) ||
        dynamic_cast<const DimensionMismatch*>(&e)) {
        return kExitData;
    }
    return kExitNumeric;
}

FileFormat parse_format(const std::string& name) {
    if (name == "csv") return FileFormat::csv;
    if (name == "binary") return FileFormat::binary;
    throw InvalidConfig("format must be csv or binary, got '" + name + "'");
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        out.push_back(std::stod(token));
    }
    if (out.empty()) throw InvalidConfig("empty number list: '" + text + "'");
    return out;
}

std::vector<Index> parse_index_list(const std::string& text) {
    std::vector<Index> out;
    for (double v : parse_double_list(text)) out.push_back(static_cast<Index>(v));
    return out;
}

void refuse_existing(const fs::path& p, bool force) {
    if (fs::exists(p) && !force) {
        throw InvalidConfig(p.string() + " already exists; pass --force to overwrite");
    }
}

struct TrainIo {
    std::string input;
    std::string format = "csv";
    bool csv_labels = false;
    std::string labels_path;
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_train_io(CLI::App* cmd, TrainIo& io) {
    cmd->add_option("--input", io.input, "feature file (frames as CSV rows or binary)")
        ->required();
    cmd->add_option("--format", io.format, "input format: csv or binary")
        ->default_val("csv");
    cmd->add_flag("--csv-labels", io.csv_labels,
                  "treat the trailing CSV column as integer labels");
    cmd->add_option("--labels", io.labels_path, "separate label file, one integer per line");
    cmd->add_option("--config", io.config_path, "key=value config file");
    cmd->add_option("--set", io.overrides, "config override key=value (repeatable)");
}

FrameSequence load_sequence(const TrainIo& io) {
    FrameSequence seq = load_features(io.input, parse_format(io.format), io.csv_labels);
    if (!io.labels_path.empty()) {
        std::vector<int> labels = load_labels(io.labels_path);
        if (static_cast<Index>(labels.size()) != seq.frames()) {
            throw LengthMismatch("label file has " + std::to_string(labels.size()) +
                                 " entries for " + std::to_string(seq.frames()) + " frames");
        }
        seq.labels = std::move(labels);
    }
    return seq;
}

TrainConfig build_config(const TrainIo& io) {
    ConfigMap map;
    if (!io.config_path.empty()) map = parse_config_file(io.config_path);
    for (const std::string& fragment : io.overrides) apply_override(map, fragment);
    return train_config_from(map);
}

std::string config_help_epilog() {
    std::ostringstream out;
    out << "Config keys (for --config files and --set overrides):\n";
    for (const ConfigKeyDoc& doc : config_key_docs()) {
        out << "  " << doc.key << " = " << doc.default_value << "\n      " << doc.help << "\n";
    }
    return out.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + p.string());
}

std::string log_line(const LogRecord& r) {
    std::ostringstream out;
    out << "t=" << r.step << " rho=" << format_double(r.rho)
        << " se=" << format_double(r.se_residual)
        << " temporal=" << format_double(r.temporal) << " total=" << format_double(r.total)
        << " commutator=" << format_double(r.commutator);
    if (r.acc) out << " acc=" << format_double(*r.acc);
    if (r.nmi) out << " nmi=" << format_double(*r.nmi);
    out << '\n';
    return out.str();
}

void write_affinity_csv(const fs::path& p, const Matrix& a) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(a(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + p.string());
}

Matrix load_square_csv(const std::string& path) {
    const FrameSequence seq = load_features(path, FileFormat::csv, false);
    // The loader transposes frames-as-rows; transpose back to the literal grid.
    const Matrix m = seq.features.transpose();
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("expected a square matrix in " + path + ", got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    return m;
}

// ---------------------------------------------------------------- synth ----

int cmd_synth(const SynthConfig& cfg, const std::string& out_path,
              const std::string& format, bool force) {
    refuse_existing(out_path, force);
    const FrameSequence seq = synth_uos_sequence(cfg);
    save_features(out_path, seq, parse_format(format));
    std::printf("wrote %s: D=%lld N=%lld k=%d sigma=%s segments=%zu\n", out_path.c_str(),
                static_cast<long long>(seq.dim()), static_cast<long long>(seq.frames()),
                cfg.k, format_double(cfg.noise_sigma).c_str(), cfg.segment_lengths.size());
    if (cfg.noise_sigma == 0.0) {
        // Self-check: every frame lies in its own segment's span.
        double worst = 0.0;
        Index at = 0;
        for (size_t s = 0; s < cfg.segment_lengths.size(); ++s) {
            const Index len = cfg.segment_lengths[s];
            const Matrix block = seq.features.middleCols(at, len);
            Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
            const Matrix u = svd.matrixU().leftCols(
                std::min<Index>(cfg.subspace_dim, svd.matrixU().cols()));
            const Matrix residual = block - u * (u.transpose() * block);
            worst = std::max(worst, residual.cwiseAbs().maxCoeff());
            at += len;
        }
        std::printf("projection self-check: max residual %s (< 1e-10 expected)\n",
                    format_double(worst).c_str());
        if (worst >= 1e-10) return kExitCheckFailed;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- train ----

int cmd_train(const TrainIo& io, const std::string& out_dir, bool force,
              const std::string& affinity_format) {
    const fs::path run_dir(out_dir);
    if (fs::exists(run_dir / "config.txt") && !force) {
        throw InvalidConfig(out_dir + " already holds a run; pass --force to overwrite");
    }
    TrainConfig cfg = build_config(io);
    const FrameSequence seq = load_sequence(io);
    fs::create_directories(run_dir);

    write_text(run_dir / "config.txt", config_snapshot(cfg));

    std::ofstream log(run_dir / "log.txt");
    if (!log) throw IoError("cannot open " + (run_dir / "log.txt").string());
    TrainHooks hooks;
    hooks.on_log = [&log](const LogRecord& r) { log << log_line(r); };
    hooks.on_checkpoint = [&run_dir](int step, const NetworkParams& p) {
        save_checkpoint((run_dir / ("checkpoint_" + std::to_string(step) + ".bin")).string(), p);
    };

    const TrainedState state = train(cfg, seq, hooks);
    log.flush();
    const SegmentationResult result = segment(state, cfg.k);

    save_labels((run_dir / "labels.txt").string(), result.labels);
    save_checkpoint((run_dir / "checkpoint.bin").string(), state.params);
    if (affinity_format == "binary") {
        FrameSequence aff;
        aff.features = result.affinity;
        aff.name = "affinity";
        save_features((run_dir / "affinity.bin").string(), aff, FileFormat::binary);
    } else {
        write_affinity_csv(run_dir / "affinity.csv", result.affinity);
    }

    std::ostringstream summary;
    summary << "frames=" << seq.frames() << "\nclusters=" << cfg.k
            << "\nsteps=" << cfg.total_iters << "\nfinal_total="
            << format_double(state.history.back().total) << "\n";
    if (result.acc) {
        summary << "acc=" << format_double(*result.acc) << "\nnmi="
                << format_double(*result.nmi) << "\n";
    }
    write_text(run_dir / "summary.txt", summary.str());

    std::printf("run complete: %s\n", out_dir.c_str());
    std::printf("final objective %s\n", format_double(state.history.back().total).c_str());
    if (result.acc) {
        std::printf("acc=%s nmi=%s\n", format_double(*result.acc).c_str(),
                    format_double(*result.nmi).c_str());
    }
    return kExitOk;
}

// -------------------------------------------------------------- segment ----

int cmd_segment(const std::string& affinity_path, const std::string& format, int k,
                std::uint64_t seed, const std::string& out_path, const std::string& gt_path,
                bool force) {
    refuse_existing(out_path, force);
    Matrix a;
    if (parse_format(format) == FileFormat::csv) {
        a = load_square_csv(affinity_path);
    } else {
        a = load_features(affinity_path, FileFormat::binary).features;
        if (a.rows() != a.cols()) {
            throw DimensionMismatch("affinity in " + affinity_path + " is not square");
        }
    }
    SpectralConfig cfg{k, 10, 300, seed};
    const std::vector<int> labels = spectral_clustering(a, cfg);
    save_labels(out_path, labels);
    std::printf("wrote %zu labels to %s\n", labels.size(), out_path.c_str());
    if (!gt_path.empty()) {
        const std::vector<int> gt = load_labels(gt_path);
        if (gt.size() != labels.size()) {
            throw LengthMismatch("ground truth has " + std::to_string(gt.size()) +
                                 " labels for " + std::to_string(labels.size()) + " frames");
        }
        const LabelVector p = make_label_vector(labels), g = make_label_vector(gt);
        std::printf("acc=%s nmi=%s\n", format_double(accuracy(p, g)).c_str(),
                    format_double(nmi(p, g)).c_str());
    }
    return kExitOk;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& nmi_norm) {
    const std::vector<int> pred = load_labels(pred_path);
    const std::vector<int> gt = load_labels(gt_path);
    if (pred.size() != gt.size()) {
        throw LengthMismatch("prediction has " + std::to_string(pred.size()) +
                             " labels, ground truth has " + std::to_string(gt.size()));
    }
    const LabelVector p = make_label_vector(pred), g = make_label_vector(gt);
    NmiNorm norm;
    if (nmi_norm == "arithmetic") norm = NmiNorm::arithmetic;
    else if (nmi_norm == "geometric") norm = NmiNorm::geometric;
    else throw InvalidConfig("nmi norm must be arithmetic or geometric");
    std::printf("acc=%s\nnmi=%s\n", format_double(accuracy(p, g)).c_str(),
                format_double(nmi(p, g, norm)).c_str());
    return kExitOk;
}

// ------------------------------------------------------------ gradcheck ----

int cmd_gradcheck(int seeds, std::uint64_t seed0, double h, double tol,
                  bool inject_sign_flip) {
    GradCheckConfig cfg;
    cfg.seeds = seeds;
    cfg.seed0 = seed0;
    cfg.h = h;
    cfg.tol = tol;
    cfg.inject_sign_flip = inject_sign_flip;
    const GradCheckResult result = run_gradcheck(cfg);
    for (size_t i = 0; i < result.per_seed_dev.size(); ++i) {
        std::printf("seed %zu: max |analytic - central_fd| = %s\n", i,
                    format_double(result.per_seed_dev[i]).c_str());
    }
    std::printf("%s: %d seeds, worst deviation %s (tolerance %s)\n",
                result.pass ? "PASS" : "FAIL", result.seeds_tested,
                format_double(result.max_abs_dev).c_str(), format_double(tol).c_str());
    return result.pass ? kExitOk : kExitCheckFailed;
}

// --------------------------------------------------------------- ablate ----

int cmd_ablate(const TrainIo& io, int seeds, int jobs, const std::string& out_path,
               bool force) {
    refuse_existing(out_path, force);
    TrainConfig cfg = build_config(io);
    const FrameSequence seq = load_sequence(io);
    const std::vector<AblationRow> table = run_ablation(cfg, seq, seeds, jobs);

    std::ostringstream csv;
    csv << "drop_rho,drop_se,drop_temporal,acc_mean,acc_std,nmi_mean,nmi_std\n";
    for (const AblationRow& row : table) {
        csv << (row.drop_rho ? 1 : 0) << ',' << (row.drop_se ? 1 : 0) << ','
            << (row.drop_temporal ? 1 : 0) << ',' << format_double(row.acc_mean) << ','
            << format_double(row.acc_std) << ',' << format_double(row.nmi_mean) << ','
            << format_double(row.nmi_std) << '\n';
    }
    write_text(out_path, csv.str());
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), table.size());
    std::printf("full-loss acc %s\n", format_double(table.front().acc_mean).c_str());
    return kExitOk;
}

// ----------------------------------------------------------- robustness ----

int cmd_robustness(const TrainIo& io, const std::string& sigmas_text, int seeds, int jobs,
                   const std::string& out_path, bool force) {
    refuse_existing(out_path, force);
    TrainConfig cfg = build_config(io);
    const FrameSequence seq = load_sequence(io);
    const std::vector<double> sigmas = parse_double_list(sigmas_text);
    const std::vector<RobustnessRow> table = run_robustness(cfg, seq, sigmas, seeds, jobs);

    std::ostringstream csv;
    csv << "sigma,raw_lsr_acc_mean,raw_lsr_acc_std,learned_lsr_acc_mean,"
           "learned_lsr_acc_std,tdsc_acc_mean,tdsc_acc_std\n";
    for (const RobustnessRow& row : table) {
        csv << format_double(row.sigma) << ',' << format_double(row.raw_lsr_acc_mean) << ','
            << format_double(row.raw_lsr_acc_std) << ','
            << format_double(row.learned_lsr_acc_mean) << ','
            << format_double(row.learned_lsr_acc_std) << ','
            << format_double(row.tdsc_acc_mean) << ',' << format_double(row.tdsc_acc_std)
            << '\n';
    }
    write_text(out_path, csv.str());
    std::printf("wrote %s (%zu sigma rows x 3 methods)\n", out_path.c_str(), table.size());
    return kExitOk;
}

// --------------------------------------------------------------- report ----

struct ParsedLog {
    std::vector<LogRecord> records;
};

ParsedLog parse_run_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ParsedLog parsed;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        LogRecord rec;
        std::stringstream ss(line);
        std::string token;
        while (ss >> token) {
            const size_t eq = token.find('=');
            if (eq == std::string::npos) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": bad token '" + token + "'");
            }
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            if (key == "t") rec.step = std::stoi(value);
            else if (key == "rho") rec.rho = std::stod(value);
            else if (key == "se") rec.se_residual = std::stod(value);
            else if (key == "temporal") rec.temporal = std::stod(value);
            else if (key == "total") rec.total = std::stod(value);
            else if (key == "commutator") rec.commutator = std::stod(value);
            else if (key == "acc") rec.acc = std::stod(value);
            else if (key == "nmi") rec.nmi = std::stod(value);
            else {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": unknown field '" + key + "'");
            }
        }
        parsed.records.push_back(rec);
    }
    if (parsed.records.empty()) throw EmptyFile("no records in " + path.string());
    return parsed;
}

// Minimal static line plot, one polyline per named series.
std::string render_svg(const std::vector<LogRecord>& records,
                       const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    const int width = 720, height = 400, margin = 50;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& [name, values] : series) {
        for (double v : values) {
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double t_lo = records.front().step, t_hi = records.back().step;
    const double t_span = std::max(1.0, t_hi - t_lo);

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "' viewBox='0 0 " << width << ' ' << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<line x1='" << margin << "' y1='" << height - margin << "' x2='" << width - margin
        << "' y2='" << height - margin << "' stroke='black'/>\n"
        << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << height - margin << "' stroke='black'/>\n";
    size_t color_at = 0;
    int legend_y = margin;
    for (const auto& [name, values] : series) {
        const char* color = colors[color_at++ % 5];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (size_t i = 0; i < values.size(); ++i) {
            const double x =
                margin + (records[i].step - t_lo) / t_span * (width - 2 * margin);
            const double y = height - margin -
                             (values[i] - lo) / (hi - lo) * (height - 2 * margin);
            svg << x << ',' << y << ' ';
        }
        svg << "'/>\n<text x='" << width - margin + 5 << "' y='" << legend_y
            << "' font-size='12' fill='" << color << "'>" << name << "</text>\n";
        legend_y += 16;
    }
    svg << "<text x='" << width / 2 << "' y='" << height - 12
        << "' font-size='12' text-anchor='middle'>step</text>\n</svg>\n";
    return svg.str();
}

int cmd_report(const std::string& run_dir, const std::string& out_dir, bool force) {
    const fs::path run(run_dir);
    const ParsedLog parsed = parse_run_log(run / "log.txt");
    const fs::path out = out_dir.empty() ? run / "report" : fs::path(out_dir);
    if (fs::exists(out / "loss_curves.svg")) refuse_existing(out / "loss_curves.svg", force);
    fs::create_directories(out);

    std::vector<double> totals, rhos, ses, temporals, commutators, accs;
    for (const LogRecord& r : parsed.records) {
        totals.push_back(r.total);
        rhos.push_back(r.rho);
        ses.push_back(r.se_residual);
        temporals.push_back(r.temporal);
        commutators.push_back(r.commutator);
        if (r.acc) accs.push_back(*r.acc);
    }
    write_text(out / "loss_curves.svg",
               render_svg(parsed.records, {{"total", totals},
                                           {"rate", rhos},
                                           {"self-expressive", ses},
                                           {"temporal", temporals}}));
    write_text(out / "commutator.svg", render_svg(parsed.records, {{"commutator", commutators}}));
    if (accs.size() == parsed.records.size()) {
        write_text(out / "accuracy.svg", render_svg(parsed.records, {{"acc", accs}}));
    }

    std::ostringstream summary;
    const LogRecord& first = parsed.records.front();
    const LogRecord& last = parsed.records.back();
    summary << "logged steps: " << parsed.records.size() << "\nfirst total: "
            << format_double(first.total) << "\nlast total: " << format_double(last.total)
            << "\nloss decreased: " << (last.total < first.total ? "yes" : "no")
            << "\nfirst commutator: " << format_double(first.commutator)
            << "\nlast commutator: " << format_double(last.commutator) << '\n';
    if (last.acc) summary << "last acc: " << format_double(*last.acc) << '\n';
    if (last.nmi) summary << "last nmi: " << format_double(*last.nmi) << '\n';
    write_text(out / "summary.txt", summary.str());
    std::printf("report written to %s\n", out.string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal segmentation by structured representation learning"};
    app.require_subcommand(1);
    app.footer(config_help_epilog());

    // synth
    SynthConfig synth_cfg;
    std::string synth_out, synth_format = "csv", synth_segments = "40,40,40";
    long long synth_dim = 30, synth_r = 3;
    bool synth_force = false;
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled sequence");
    synth->add_option("--out", synth_out, "output feature file")->required();
    synth->add_option("--format", synth_format, "csv or binary")->default_val("csv");
    synth->add_option("--dim", synth_dim, "ambient feature dimension")->default_val(30);
    synth->add_option("--subspace-dim", synth_r, "per-segment subspace dimension")
        ->default_val(3);
    synth->add_option("--k", synth_cfg.k, "number of distinct segments/motions")
        ->default_val(3);
    synth->add_option("--segments", synth_segments, "comma-separated segment lengths")
        ->default_val("40,40,40");
    synth->add_option("--sigma", synth_cfg.noise_sigma, "generation noise level")
        ->default_val(0.01);
    synth->add_option("--autocorr", synth_cfg.coeff_autocorr,
                      "within-segment coefficient autocorrelation in [0,1)")
        ->default_val(0.98);
    synth->add_option("--seed", synth_cfg.seed, "generator seed")->default_val(0);
    synth->add_flag("--force", synth_force, "overwrite existing output");

    // train
    TrainIo train_io;
    std::string train_out, train_affinity_format = "csv";
    bool train_force = false;
    auto* train_cmd = app.add_subcommand("train", "train and segment one sequence");
    add_train_io(train_cmd, train_io);
    train_cmd->add_option("--out", train_out, "run directory")->required();
    train_cmd->add_option("--affinity-format", train_affinity_format,
                          "affinity export format: csv or binary")
        ->default_val("csv");
    train_cmd->add_flag("--force", train_force, "overwrite an existing run directory");

    // segment
    std::string seg_affinity, seg_format = "csv", seg_out, seg_gt;
    int seg_k = 3;
    std::uint64_t seg_seed = 0;
    bool seg_force = false;
    auto* seg = app.add_subcommand("segment", "spectral-cluster an exported affinity");
    seg->add_option("--affinity", seg_affinity, "affinity matrix file")->required();
    seg->add_option("--format", seg_format, "csv or binary")->default_val("csv");
    seg->add_option("--k", seg_k, "number of clusters")->required();
    seg->add_option("--seed", seg_seed, "clustering seed")->default_val(0);
    seg->add_option("--out", seg_out, "output label file")->required();
    seg->add_option("--gt", seg_gt, "optional ground-truth labels for metrics");
    seg->add_flag("--force", seg_force, "overwrite existing output");

    // eval
    std::string eval_pred, eval_gt, eval_norm = "arithmetic";
    auto* eval_cmd = app.add_subcommand("eval", "score predicted labels against ground truth");
    eval_cmd->add_option("--pred", eval_pred, "predicted label file")->required();
    eval_cmd->add_option("--gt", eval_gt, "ground-truth label file")->required();
    eval_cmd->add_option("--nmi-norm", eval_norm, "arithmetic or geometric")
        ->default_val("arithmetic");

    // gradcheck
    int gc_seeds = 20;
    std::uint64_t gc_seed0 = 0;
    double gc_h = 1e-5, gc_tol = 1e-5;
    bool gc_flip = false;
    auto* gc = app.add_subcommand("gradcheck",
                                  "certify analytic gradients against finite differences");
    gc->set_help_flag("--help", "print help");  // frees -h for the step size below
    gc->add_option("--seeds", gc_seeds, "number of random instances")->default_val(20);
    gc->add_option("--seed0", gc_seed0, "first seed")->default_val(0);
    gc->add_option("--h", gc_h, "central-difference step")->default_val(1e-5);
    gc->add_option("--tol", gc_tol, "max-abs tolerance")->default_val(1e-5);
    gc->add_flag("--inject-sign-flip", gc_flip,
                 "negative control: corrupt one analytic gradient entry");

    // ablate
    TrainIo ablate_io;
    std::string ablate_out;
    int ablate_seeds = 5, ablate_jobs = 1;
    bool ablate_force = false;
    auto* ablate = app.add_subcommand("ablate", "loss-term ablation grid (7 rows)");
    add_train_io(ablate, ablate_io);
    ablate->add_option("--seeds", ablate_seeds, "seeds per row")->default_val(5);
    ablate->add_option("--jobs", ablate_jobs, "parallel training jobs")->default_val(1);
    ablate->add_option("--out", ablate_out, "output CSV")->required();
    ablate->add_flag("--force", ablate_force, "overwrite existing output");

    // robustness
    TrainIo robust_io;
    std::string robust_out, robust_sigmas = "0,0.05,0.1";
    int robust_seeds = 5, robust_jobs = 1;
    bool robust_force = false;
    auto* robust = app.add_subcommand("robustness", "noise-corruption sweep");
    add_train_io(robust, robust_io);
    robust->add_option("--sigmas", robust_sigmas, "comma-separated noise levels")
        ->default_val("0,0.05,0.1");
    robust->add_option("--seeds", robust_seeds, "seeds per sigma")->default_val(5);
    robust->add_option("--jobs", robust_jobs, "parallel training jobs")->default_val(1);
    robust->add_option("--out", robust_out, "output CSV")->required();
    robust->add_flag("--force", robust_force, "overwrite existing output");

    // report
    std::string report_run, report_out;
    bool report_force = false;
    auto* report = app.add_subcommand("report", "render plots and a summary from a run");
    report->add_option("--run", report_run, "run directory with log.txt")->required();
    report->add_option("--out", report_out, "output directory (default RUN/report)");
    report->add_flag("--force", report_force, "overwrite existing report files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (synth->parsed()) {
            synth_cfg.ambient_dim = static_cast<Index>(synth_dim);
            synth_cfg.subspace_dim = static_cast<Index>(synth_r);
            synth_cfg.segment_lengths = parse_index_list(synth_segments);
            return cmd_synth(synth_cfg, synth_out, synth_format, synth_force);
        }
        if (train_cmd->parsed()) {
            return cmd_train(train_io, train_out, train_force, train_affinity_format);
        }
        if (seg->parsed()) {
            return cmd_segment(seg_affinity, seg_format, seg_k, seg_seed, seg_out, seg_gt,
                               seg_force);
        }
        if (eval_cmd->parsed()) return cmd_eval(eval_pred, eval_gt, eval_norm);
        if (gc->parsed()) return cmd_gradcheck(gc_seeds, gc_seed0, gc_h, gc_tol, gc_flip);
        if (ablate->parsed()) {
            return cmd_ablate(ablate_io, ablate_seeds, ablate_jobs, ablate_out, ablate_force);
        }
        if (robust->parsed()) {
            return cmd_robustness(robust_io, robust_sigmas, robust_seeds, robust_jobs,
                                  robust_out, robust_force);
        }
        if (report->parsed()) return cmd_report(report_run, report_out, report_force);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitOk;
}
