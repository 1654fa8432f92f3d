#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdsc/affinity.hpp"
#include "tdsc/data.hpp"
#include "tdsc/losses.hpp"
#include "tdsc/model.hpp"

namespace tdsc {

enum class Optimizer { gd, adam };
enum class TmaGrad { current_only };

struct TrainConfig {
    NetworkDims dims{0, 512, 64};  // input_dim filled from the data
    int total_iters = 500;         // T
    double eta = 0.001;
    LossWeights weights{};         // lambda1 = 0.2, lambda2 = 20, eps = 0.01
    int s = 2;                     // temporal window width
    Index tau = 50;                // mask band radius
    double alpha0 = 0.9;
    // Lift temperature. Sharp enough that same-subspace similarities dominate
    // the doubly stochastic projection; nothing downstream constrains the
    // value, it is a free implementation constant.
    double kappa = 0.1;
    int sinkhorn_iters = 10;
    double sinkhorn_tol = 1e-6;
    int k = 3;                     // clusters for evaluation / final test
    std::uint64_t seed = 0;
    int log_every = 25;
    bool tma_enabled = true;
    TmaGrad tma_grad = TmaGrad::current_only;
    bool masking_enabled = true;   // false widens the band to the whole sequence
    bool eval_during_training = true;
    Optimizer optimizer = Optimizer::gd;
    int checkpoint_every = 0;      // 0 keeps only the final state
    // Loss-term ablation switches. Dropping all three is rejected.
    bool drop_rho = false;
    bool drop_se = false;
    bool drop_temporal = false;

    Index effective_tau(Index n) const { return masking_enabled ? tau : n; }
};

struct LogRecord {
    int step = 0;  // 1-based
    double rho = 0.0;
    double se_residual = 0.0;
    double temporal = 0.0;
    double total = 0.0;  // the objective actually descended (term toggles applied)
    double commutator = 0.0;
    std::optional<double> acc;
    std::optional<double> nmi;
};

struct TrainedState {
    NetworkParams params;
    AffinityState affinity;
    std::vector<LogRecord> history;
    TrainConfig config;
    Matrix z_tilde;  // final normalized feature-head output
    std::optional<std::vector<int>> labels;  // ground truth carried from the sequence
};

struct TrainHooks {
    std::function<void(const LogRecord&)> on_log;
    std::function<void(int step, const NetworkParams&)> on_checkpoint;
};

void validate_train_config(const TrainConfig& cfg, Index n_frames);

// The full training loop: forward, similarity, mask + lift, Sinkhorn
// projection, momentum averaging, loss, reverse sweep, parameter update.
// Steps 1 and T are always logged, plus every log_every-th step.
// Throws NonFiniteLoss with the step index if the objective leaves R.
TrainedState train(const TrainConfig& cfg, const FrameSequence& seq,
                   const TrainHooks& hooks = {});

struct SegmentationResult {
    std::vector<int> labels;
    Matrix affinity;  // symmetrized coefficient average
    std::optional<double> acc;
    std::optional<double> nmi;
};

// Spectral clustering on the symmetrized running-mean coefficients. Pure
// function of the trained state; metrics filled when ground truth is known.
SegmentationResult segment(const TrainedState& state, int k);

struct AblationRow {
    bool drop_rho = false;
    bool drop_se = false;
    bool drop_temporal = false;
    double acc_mean = 0.0, acc_std = 0.0;
    double nmi_mean = 0.0, nmi_std = 0.0;
};

// Trains every loss-term toggle combination except all-dropped (7 rows,
// full loss first), num_seeds seeds each (cfg.seed, cfg.seed+1, ...).
// The sequence must carry ground-truth labels. jobs > 1 spreads the
// independent trainings over that many threads; results are identical
// to the serial order.
std::vector<AblationRow> run_ablation(const TrainConfig& cfg, const FrameSequence& seq,
                                      int num_seeds, int jobs = 1);

struct RobustnessRow {
    double sigma = 0.0;
    double raw_lsr_acc_mean = 0.0, raw_lsr_acc_std = 0.0;
    double learned_lsr_acc_mean = 0.0, learned_lsr_acc_std = 0.0;
    double tdsc_acc_mean = 0.0, tdsc_acc_std = 0.0;
};

// Noise-corruption sweep: per sigma and seed, corrupt the features, cluster
// the raw corrupted features with the ridge baseline, train on the corrupted
// features, cluster the learned representation with the same baseline, and
// spectral-cluster the learned affinity.
std::vector<RobustnessRow> run_robustness(const TrainConfig& cfg, const FrameSequence& seq,
                                          const std::vector<double>& sigmas, int num_seeds,
                                          int jobs = 1);

// One differentiable training step on fixed inputs, exposed for gradient
// certification: the history term of the running mean is a constant, the
// current coefficient path is differentiated.
struct StepSetting {
    Matrix x;
    TemporalMask mask;
    Matrix laplacian;
    LossWeights weights;
    double kappa = 1.0;
    int sinkhorn_iters = 10;
    double sinkhorn_tol = 0.0;  // 0: fixed sweep count, keeps both FD sides on one path
    double alpha_t = 0.9;
    Matrix c_bar_prev;
    bool tma_enabled = true;
    bool rho_enabled = true;
};

double step_objective(const StepSetting& setting, const NetworkParams& params);
NetworkParams step_param_grads(const StepSetting& setting, const NetworkParams& params);

struct GradCheckConfig {
    int seeds = 20;
    std::uint64_t seed0 = 0;
    double h = 1e-5;
    double tol = 1e-5;
    // Instances whose smallest |pre-activation| falls below this are redrawn;
    // central differences straddle the rectifier kink otherwise.
    double kink_guard = 1e-4;
    bool inject_sign_flip = false;  // negative control: corrupt one analytic entry
};

struct GradCheckResult {
    int seeds_tested = 0;
    double max_abs_dev = 0.0;
    bool pass = false;
    std::vector<double> per_seed_dev;
};

// Certifies step_param_grads against central finite differences on seeded
// small instances (5 input dims, 10 frames, 8 hidden, 4 output, band 4).
GradCheckResult run_gradcheck(const GradCheckConfig& cfg);

}  // namespace tdsc
