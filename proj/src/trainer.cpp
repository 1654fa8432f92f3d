#include "tdsc/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "tdsc/baselines.hpp"
#include "tdsc/clustering.hpp"
#include "tdsc/errors.hpp"
#include "tdsc/metrics.hpp"
#include "tdsc/numerics.hpp"
#include "tdsc/rng.hpp"

namespace tdsc {

namespace {

// Everything one step produces that the backward pass or the logger needs.
struct StepEval {
    ForwardState fstate;
    Matrix kernel;       // masked, lifted similarities
    SinkhornTrace trace;
    Matrix c;            // projected coefficients
    Matrix c_bar;        // after blending with the history term
    LossBreakdown breakdown;
    double objective = 0.0;
};

StepEval eval_step(const StepSetting& s, const NetworkParams& params) {
    StepEval out;
    out.fstate = forward(params, s.x);
    const Matrix sim = similarity(out.fstate.y_tilde);
    out.kernel = mask_and_lift(sim, s.mask, s.kappa);
    out.trace = sinkhorn_forward(out.kernel, s.sinkhorn_iters, s.sinkhorn_tol);
    out.c = out.trace.output;
    if (s.tma_enabled) {
        out.c_bar = (1.0 - s.alpha_t) * s.c_bar_prev + s.alpha_t * out.c;
        out.c_bar.diagonal().setZero();
    } else {
        out.c_bar = out.c;
    }
    out.breakdown = total_loss(out.fstate.z_tilde, out.c_bar, s.laplacian, s.weights);
    double objective = s.weights.lambda1 * out.breakdown.se_residual +
                       s.weights.lambda2 * out.breakdown.temporal;
    if (s.rho_enabled) objective -= out.breakdown.rho;
    out.objective = objective;
    return out;
}

NetworkParams grads_from_eval(const StepSetting& s, const NetworkParams& params,
                              const StepEval& eval) {
    const Matrix& z = eval.fstate.z_tilde;
    const Index n = z.cols();
    const Matrix residual = z - z * eval.c_bar;
    const Matrix i_minus_c = Matrix::Identity(n, n) - eval.c_bar;

    Matrix dz = 2.0 * s.weights.lambda1 * residual * i_minus_c.transpose() +
                2.0 * s.weights.lambda2 * z * s.laplacian;
    if (s.rho_enabled) {
        dz -= coding_rate_grad(z, CodingRateParams{s.weights.eps, z.rows(), n});
    }

    Matrix dy = Matrix::Zero(eval.fstate.y_tilde.rows(), n);
    if (s.weights.lambda1 > 0.0) {
        Matrix dc_bar = -2.0 * s.weights.lambda1 * z.transpose() * residual;
        // History is a constant; only the current projection carries gradient.
        const Matrix dc = s.tma_enabled ? Matrix(s.alpha_t * dc_bar) : std::move(dc_bar);
        const Matrix dkernel = sinkhorn_backward(eval.trace, dc);
        // exp lift: dS = dK .* K / kappa; off-band entries stay zero via K.
        const Matrix dsim = dkernel.cwiseProduct(eval.kernel) / s.kappa;
        dy = eval.fstate.y_tilde * (dsim + dsim.transpose());
    }
    return backward(params, eval.fstate, dz, dy);
}

double sample_mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = sample_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Runs body(0..count-1) on up to `jobs` threads. Tasks must be independent;
// the caller writes results into preallocated slots so ordering never matters.
void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> workers;
    const int n_workers = std::min(jobs, count);
    workers.reserve(static_cast<size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct AdamState {
    Vector m, v;
    int t = 0;
};

NetworkParams adam_step(const NetworkParams& params, const NetworkParams& grads, double eta,
                        AdamState& state) {
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    const Vector g = grads.to_flat();
    Vector theta = params.to_flat();
    if (state.t == 0) {
        state.m = Vector::Zero(g.size());
        state.v = Vector::Zero(g.size());
    }
    ++state.t;
    state.m = beta1 * state.m + (1.0 - beta1) * g;
    state.v = beta2 * state.v + (1.0 - beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(beta1, state.t);
    const double bc2 = 1.0 - std::pow(beta2, state.t);
    for (Index i = 0; i < theta.size(); ++i) {
        theta(i) -= eta * (state.m(i) / bc1) / (std::sqrt(state.v(i) / bc2) + adam_eps);
    }
    return NetworkParams::from_flat(params.dims(), theta);
}

}  // namespace

void validate_train_config(const TrainConfig& cfg, Index n_frames) {
    if (cfg.dims.input_dim < 1 || cfg.dims.hidden_dim < 1 || cfg.dims.output_dim < 1) {
        throw InvalidConfig("network dimensions must be positive");
    }
    if (cfg.total_iters < 1) throw InvalidConfig("T must be at least 1");
    if (cfg.eta <= 0.0) throw InvalidConfig("eta must be positive");
    if (cfg.weights.lambda1 < 0.0 || cfg.weights.lambda2 < 0.0 || cfg.weights.eps <= 0.0) {
        throw InvalidConfig("loss weights need lambda1, lambda2 >= 0 and eps > 0");
    }
    if (cfg.s < 1) throw InvalidConfig("temporal window s must be at least 1");
    if (cfg.tau < 1) throw InvalidConfig("mask radius tau must be at least 1");
    if (cfg.alpha0 <= 0.0 || cfg.alpha0 > 1.0) throw InvalidConfig("alpha0 must be in (0, 1]");
    if (cfg.kappa <= 0.0) throw InvalidConfig("kappa must be positive");
    if (cfg.sinkhorn_iters < 1) throw InvalidConfig("sinkhorn_iters must be at least 1");
    if (cfg.k < 1) throw InvalidConfig("k must be at least 1");
    if (cfg.log_every < 1) throw InvalidConfig("log_every must be at least 1");
    if (cfg.checkpoint_every < 0) throw InvalidConfig("checkpoint_every must be nonnegative");
    if (cfg.drop_rho && cfg.drop_se && cfg.drop_temporal) {
        throw InvalidConfig("dropping every loss term leaves nothing to optimize");
    }
    const Index min_frames = std::max<Index>(3, static_cast<Index>(cfg.s) + 1);
    if (n_frames < min_frames) {
        throw InvalidConfig("need at least " + std::to_string(min_frames) + " frames, got " +
                            std::to_string(n_frames));
    }
}

TrainedState train(const TrainConfig& cfg, const FrameSequence& seq, const TrainHooks& hooks) {
    TrainConfig run_cfg = cfg;
    if (run_cfg.dims.input_dim == 0) run_cfg.dims.input_dim = seq.dim();
    validate_train_config(run_cfg, seq.frames());
    if (run_cfg.dims.input_dim != seq.dim()) {
        throw DimensionMismatch("configured input_dim " +
                                std::to_string(run_cfg.dims.input_dim) +
                                " does not match data dim " + std::to_string(seq.dim()));
    }
    if (!all_finite(seq.features)) throw InvalidConfig("sequence has non-finite features");

    const Index n = seq.frames();
    LossWeights weights = run_cfg.weights;
    if (run_cfg.drop_se) weights.lambda1 = 0.0;
    if (run_cfg.drop_temporal) weights.lambda2 = 0.0;

    StepSetting setting;
    setting.x = seq.features;
    setting.mask = TemporalMask{n, std::min(run_cfg.effective_tau(n), n)};
    setting.laplacian = graph_laplacian(temporal_weights(n, run_cfg.s));
    setting.weights = weights;
    setting.kappa = run_cfg.kappa;
    setting.sinkhorn_iters = run_cfg.sinkhorn_iters;
    setting.sinkhorn_tol = run_cfg.sinkhorn_tol;
    setting.tma_enabled = run_cfg.tma_enabled;
    setting.rho_enabled = !run_cfg.drop_rho;

    TrainedState state;
    state.config = run_cfg;
    state.labels = seq.labels;
    state.params = init_params(run_cfg.dims, run_cfg.seed);
    state.affinity = make_affinity_state(n, run_cfg.s, run_cfg.alpha0, run_cfg.total_iters);

    std::optional<LabelVector> gt;
    if (seq.labels) gt = make_label_vector(*seq.labels);

    AdamState adam;
    StepEval eval;
    for (int t = 1; t <= run_cfg.total_iters; ++t) {
        setting.alpha_t = momentum_schedule(run_cfg.alpha0, t, run_cfg.total_iters);
        setting.c_bar_prev = state.affinity.c_bar;
        eval = eval_step(setting, state.params);
        if (!std::isfinite(eval.objective)) {
            throw NonFiniteLoss("objective became non-finite at step " + std::to_string(t));
        }
        const NetworkParams grads = grads_from_eval(setting, state.params, eval);

        // Commit the affinity state the same way the gradients assumed.
        if (run_cfg.tma_enabled) {
            state.affinity = tma_update(std::move(state.affinity), eval.c);
        } else {
            state.affinity.c = eval.c;
            state.affinity.c_bar = eval.c;
            state.affinity.t += 1;
        }

        const bool log_now =
            t == 1 || t == run_cfg.total_iters || t % run_cfg.log_every == 0;
        if (log_now) {
            LogRecord rec;
            rec.step = t;
            rec.rho = eval.breakdown.rho;
            rec.se_residual = eval.breakdown.se_residual;
            rec.temporal = eval.breakdown.temporal;
            rec.total = eval.objective;
            rec.commutator = weights.lambda1 > 0.0
                                 ? commutator_diagnostic(eval.fstate.z_tilde, eval.c_bar,
                                                         setting.laplacian, weights)
                                 : 0.0;
            if (run_cfg.eval_during_training && gt) {
                SpectralConfig sc{run_cfg.k, 10, 300, run_cfg.seed};
                const std::vector<int> labels =
                    spectral_clustering(symmetrize(state.affinity.c_bar), sc);
                const LabelVector pred = make_label_vector(labels);
                rec.acc = accuracy(pred, *gt);
                rec.nmi = nmi(pred, *gt);
            }
            state.history.push_back(rec);
            if (hooks.on_log) hooks.on_log(rec);
        }

        if (run_cfg.optimizer == Optimizer::gd) {
            state.params = sgd_step(state.params, grads, run_cfg.eta);
        } else {
            state.params = adam_step(state.params, grads, run_cfg.eta, adam);
        }

        if (hooks.on_checkpoint && run_cfg.checkpoint_every > 0 &&
            t % run_cfg.checkpoint_every == 0) {
            hooks.on_checkpoint(t, state.params);
        }
    }

    state.z_tilde = forward(state.params, seq.features).z_tilde;
    return state;
}

SegmentationResult segment(const TrainedState& state, int k) {
    SegmentationResult out;
    out.affinity = symmetrize(state.affinity.c_bar);
    SpectralConfig sc{k, 10, 300, state.config.seed};
    out.labels = spectral_clustering(out.affinity, sc);
    if (state.labels) {
        const LabelVector pred = make_label_vector(out.labels);
        const LabelVector gt = make_label_vector(*state.labels);
        out.acc = accuracy(pred, gt);
        out.nmi = nmi(pred, gt);
    }
    return out;
}

std::vector<AblationRow> run_ablation(const TrainConfig& cfg, const FrameSequence& seq,
                                      int num_seeds, int jobs) {
    if (num_seeds < 1) throw InvalidConfig("need at least one seed");
    if (!seq.labels) throw InvalidConfig("ablation needs ground-truth labels");
    // Full loss first, then single drops, then pairs; all-dropped is invalid.
    const bool grid[7][3] = {{false, false, false}, {true, false, false},
                             {false, true, false},  {false, false, true},
                             {true, true, false},   {true, false, true},
                             {false, true, true}};

    std::vector<double> accs(static_cast<size_t>(7 * num_seeds));
    std::vector<double> nmis(static_cast<size_t>(7 * num_seeds));
    parallel_for(7 * num_seeds, jobs, [&](int task) {
        const int variant_at = task / num_seeds;
        const int seed_at = task % num_seeds;
        TrainConfig variant = cfg;
        variant.drop_rho = grid[variant_at][0];
        variant.drop_se = grid[variant_at][1];
        variant.drop_temporal = grid[variant_at][2];
        variant.seed = cfg.seed + static_cast<std::uint64_t>(seed_at);
        const TrainedState state = train(variant, seq);
        const SegmentationResult res = segment(state, variant.k);
        accs[static_cast<size_t>(task)] = *res.acc;
        nmis[static_cast<size_t>(task)] = *res.nmi;
    });

    std::vector<AblationRow> table;
    for (int v = 0; v < 7; ++v) {
        AblationRow entry;
        entry.drop_rho = grid[v][0];
        entry.drop_se = grid[v][1];
        entry.drop_temporal = grid[v][2];
        const std::vector<double> row_accs(accs.begin() + v * num_seeds,
                                           accs.begin() + (v + 1) * num_seeds);
        const std::vector<double> row_nmis(nmis.begin() + v * num_seeds,
                                           nmis.begin() + (v + 1) * num_seeds);
        entry.acc_mean = sample_mean(row_accs);
        entry.acc_std = sample_std(row_accs);
        entry.nmi_mean = sample_mean(row_nmis);
        entry.nmi_std = sample_std(row_nmis);
        table.push_back(entry);
    }
    return table;
}

std::vector<RobustnessRow> run_robustness(const TrainConfig& cfg, const FrameSequence& seq,
                                          const std::vector<double>& sigmas, int num_seeds,
                                          int jobs) {
    if (num_seeds < 1) throw InvalidConfig("need at least one seed");
    if (sigmas.empty()) throw InvalidConfig("need at least one sigma");
    if (!seq.labels) throw InvalidConfig("robustness sweep needs ground-truth labels");
    for (double sigma : sigmas) {
        if (sigma < 0.0) throw InvalidConfig("sigma must be nonnegative");
    }

    const int n_sigmas = static_cast<int>(sigmas.size());
    std::vector<double> raw_accs(static_cast<size_t>(n_sigmas * num_seeds));
    std::vector<double> learned_accs(raw_accs.size());
    std::vector<double> tdsc_accs(raw_accs.size());
    parallel_for(n_sigmas * num_seeds, jobs, [&](int task) {
        const int sigma_at = task / num_seeds;
        const int seed_at = task % num_seeds;
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(seed_at);
        const FrameSequence noisy = add_noise(seq, sigmas[static_cast<size_t>(sigma_at)],
                                              seed ^ 0xC0FFEEULL);

        LsrConfig lsr;
        SpectralConfig sc{cfg.k, 10, 300, seed};
        const LsrResult raw = lsr_cluster(noisy.features, lsr, sc, seq.labels);
        raw_accs[static_cast<size_t>(task)] = raw.score;

        TrainConfig variant = cfg;
        variant.seed = seed;
        const TrainedState state = train(variant, noisy);
        const LsrResult learned = lsr_cluster(state.z_tilde, lsr, sc, seq.labels);
        learned_accs[static_cast<size_t>(task)] = learned.score;

        const SegmentationResult res = segment(state, variant.k);
        tdsc_accs[static_cast<size_t>(task)] = *res.acc;
    });

    std::vector<RobustnessRow> table;
    for (int s = 0; s < n_sigmas; ++s) {
        RobustnessRow row;
        row.sigma = sigmas[static_cast<size_t>(s)];
        const auto slice = [&](const std::vector<double>& v) {
            return std::vector<double>(v.begin() + s * num_seeds,
                                       v.begin() + (s + 1) * num_seeds);
        };
        const std::vector<double> raw = slice(raw_accs);
        const std::vector<double> learned = slice(learned_accs);
        const std::vector<double> tdsc = slice(tdsc_accs);
        row.raw_lsr_acc_mean = sample_mean(raw);
        row.raw_lsr_acc_std = sample_std(raw);
        row.learned_lsr_acc_mean = sample_mean(learned);
        row.learned_lsr_acc_std = sample_std(learned);
        row.tdsc_acc_mean = sample_mean(tdsc);
        row.tdsc_acc_std = sample_std(tdsc);
        table.push_back(row);
    }
    return table;
}

double step_objective(const StepSetting& setting, const NetworkParams& params) {
    return eval_step(setting, params).objective;
}

NetworkParams step_param_grads(const StepSetting& setting, const NetworkParams& params) {
    const StepEval eval = eval_step(setting, params);
    return grads_from_eval(setting, params, eval);
}

GradCheckResult run_gradcheck(const GradCheckConfig& cfg) {
    const Index input_dim = 5, n = 10, hidden = 8, output = 4;
    const NetworkDims dims{input_dim, hidden, output};

    StepSetting setting;
    setting.mask = TemporalMask{n, 4};
    setting.laplacian = graph_laplacian(temporal_weights(n, 2));
    setting.weights = LossWeights{0.2, 20.0, 0.01};
    setting.kappa = 1.0;
    setting.sinkhorn_iters = 10;
    setting.sinkhorn_tol = 0.0;  // fixed sweep count on every stencil point
    setting.tma_enabled = true;
    setting.rho_enabled = true;
    setting.alpha_t = momentum_schedule(0.9, 1, 500);
    setting.c_bar_prev = make_affinity_state(n, 2, 0.9, 500).c_bar;

    GradCheckResult result;
    result.pass = true;
    std::uint64_t draw = cfg.seed0;
    for (int s = 0; s < cfg.seeds; ++s) {
        // Redraw instances that sit on a rectifier kink or have a column
        // too close to zero norm for stable normalization under the stencil.
        NetworkParams params;
        for (;;) {
            Rng rng(draw++);
            Matrix x(input_dim, n);
            for (Index j = 0; j < n; ++j) {
                for (Index i = 0; i < input_dim; ++i) x(i, j) = rng.gaussian();
                x.col(j).normalize();
            }
            setting.x = x;
            params = init_params(dims, draw++);
            try {
                const ForwardState probe = forward(params, x);
                // Norm floor 0.1: the normalization's higher derivatives grow
                // like 1/norm^3, which a 1e-5 stencil only tolerates well above this floor.
                if (probe.min_abs_pre_hidden() > cfg.kink_guard &&
                    probe.z_norms.minCoeff() > 0.1 && probe.y_norms.minCoeff() > 0.1) {
                    break;
                }
            } catch (const ZeroNormColumn&) {
                // A dead rectifier column zeroes a head column outright; redraw.
            }
        }

        NetworkParams analytic = step_param_grads(setting, params);
        if (cfg.inject_sign_flip) analytic.w1(0, 0) = -analytic.w1(0, 0);
        const Vector analytic_flat = analytic.to_flat();

        Vector theta = params.to_flat();
        double dev = 0.0;
        for (Index i = 0; i < theta.size(); ++i) {
            const double saved = theta(i);
            theta(i) = saved + cfg.h;
            const double up = step_objective(setting, NetworkParams::from_flat(dims, theta));
            theta(i) = saved - cfg.h;
            const double down = step_objective(setting, NetworkParams::from_flat(dims, theta));
            theta(i) = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw NonFiniteEvaluation("objective non-finite on the stencil");
            }
            const double fd = (up - down) / (2.0 * cfg.h);
            dev = std::max(dev, std::abs(fd - analytic_flat(i)));
        }
        result.per_seed_dev.push_back(dev);
        result.max_abs_dev = std::max(result.max_abs_dev, dev);
        ++result.seeds_tested;
        if (dev > cfg.tol) result.pass = false;
    }
    return result;
}

}  // namespace tdsc
