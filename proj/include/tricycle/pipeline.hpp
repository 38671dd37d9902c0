#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>

#include "tricycle/augment.hpp"
#include "tricycle/edge_ops.hpp"
#include "tricycle/losses.hpp"
#include "tricycle/model_bundle.hpp"
#include "tricycle/metrics.hpp"
#include "tricycle/preprocess.hpp"
#include "tricycle/shape_prior.hpp"
#include "tricycle/torch_interop.hpp"

namespace tricycle {

struct TrainingConfig {
    double learning_rate = 2e-4;
    int batch_size = 32;
    int ramp_start_epoch = 250;
    int ramp_end_epoch = 500;
    int synthetic_cadence = 20;
    int early_stop_patience = 20;
    uint64_t seed = 0;
    int image_size = 256;
    int domain_channels = 1;
    int base_width = 64;
    int depth = 6;
    int max_epochs = 1000;
    int pretrain_epochs = 20;
    int finetune_epochs = 30;
    int baseline_epochs = 30;
    bool use_cone = true;
    bool occlude_in_chain = true;
    bool disc_on_synthetic = true;   // d_e2m also trains on synthetic steps
    bool finetune_full_chain = false;
    bool deterministic = false;      // single worker, one compute thread
    double improvement_delta = 1e-5;
    std::string edge_backend = "sobel";
    LossWeights weights;
    AugmentSpec augment = AugmentSpec::ultrasound();

    void validate() const {
        if (ramp_start_epoch >= ramp_end_epoch)
            throw ConfigError("config: ramp_start_epoch must be < ramp_end_epoch");
        if (synthetic_cadence < 1 || early_stop_patience < 1)
            throw ConfigError("config: cadence and patience must be >= 1");
        if (batch_size < 1 || max_epochs < 0)
            throw ConfigError("config: bad batch_size/max_epochs");
    }
};

// Desk-scale profile: small images and networks, short ramp, quick stop.
inline TrainingConfig toy_config(uint64_t seed = 0) {
    TrainingConfig c;
    c.image_size = 64;
    c.batch_size = 8;
    c.base_width = 32;
    c.depth = 4;
    c.ramp_start_epoch = 25;
    c.ramp_end_epoch = 50;
    c.early_stop_patience = 5;
    c.max_epochs = 60;
    c.pretrain_epochs = 6;
    c.finetune_epochs = 20;
    c.baseline_epochs = 25;
    c.seed = seed;
    c.augment.max_translate_px = 7;
    return c;
}

inline TrainingConfig paper_config(uint64_t seed = 0) {
    TrainingConfig c;
    c.seed = seed;
    return c;
}

struct ScheduleState {
    int epoch = 0;
    double best_m2s_loss = std::numeric_limits<double>::infinity();
    int epochs_since_improvement = 0;
    double p_sobel = 1.0;
};

// Probability of converting masks to edges with Sobel instead of the learned
// generator: 1 until the ramp starts, 0 from the ramp end, linear between.
inline double sobel_probability(int epoch, const TrainingConfig& cfg) {
    if (epoch < 0) throw std::invalid_argument("sobel_probability: epoch < 0");
    if (epoch <= cfg.ramp_start_epoch) return 1.0;
    if (epoch >= cfg.ramp_end_epoch) return 0.0;
    return static_cast<double>(cfg.ramp_end_epoch - epoch) /
           static_cast<double>(cfg.ramp_end_epoch - cfg.ramp_start_epoch);
}

// Strict-improvement early stopping; this is the logic fit() runs each epoch.
struct EarlyStopTracker {
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int since_improvement = 0;
    int patience = 20;
    double delta = 1e-5;

    explicit EarlyStopTracker(int patience_ = 20, double delta_ = 1e-5)
        : patience(patience_), delta(delta_) {}

    struct Update {
        bool improved = false;
        bool should_stop = false;
    };

    Update update(int epoch, double loss) {
        Update u;
        if (best - loss > delta) {
            best = loss;
            best_epoch = epoch;
            since_improvement = 0;
            u.improved = true;
        } else {
            ++since_improvement;
            u.should_stop = since_improvement >= patience;
        }
        return u;
    }
};

struct StepTrace {
    bool used_sobel = false;
    torch::Tensor enhanced_first_pass;  // G^pf output of pass one
    torch::Tensor predicted_mask;       // soft m2s output of pass one
};

namespace detail {

struct PendingUpdate {
    torch::optim::Adam* opt = nullptr;
    std::vector<torch::Tensor> params;
    std::vector<torch::Tensor> grads;
};

inline PendingUpdate compute_update(torch::optim::Adam* opt,
                                    std::vector<torch::Tensor> params,
                                    const torch::Tensor& loss, bool retain) {
    PendingUpdate u;
    u.opt = opt;
    u.params = std::move(params);
    if (u.params.empty()) return u;
    u.grads = torch::autograd::grad({loss}, u.params, /*grad_outputs=*/{},
                                    /*retain_graph=*/retain, /*create_graph=*/false,
                                    /*allow_unused=*/true);
    return u;
}

inline void apply_update(PendingUpdate& u) {
    if (u.params.empty() || !u.opt) return;
    for (size_t i = 0; i < u.params.size(); ++i)
        if (u.grads[i].defined()) u.params[i].mutable_grad() = u.grads[i];
    u.opt->step();
    u.opt->zero_grad(/*set_to_none=*/true);
}

inline void step_now(torch::optim::Adam* opt, std::vector<torch::Tensor> params,
                     const torch::Tensor& loss, bool retain) {
    auto u = compute_update(opt, std::move(params), loss, retain);
    apply_update(u);
}

inline std::vector<std::array<int, 3>> occlusion_squares(Rng& rng, int size) {
    auto occ = sample_occlusions(rng, size);
    std::vector<std::array<int, 3>> out;
    out.reserve(occ.squares.size());
    for (const auto& s : occ.squares) out.push_back({s.x, s.y, s.side});
    return out;
}

inline torch::Tensor occlude(const torch::Tensor& edges, Rng& rng,
                             const TrainingConfig& cfg) {
    if (!cfg.occlude_in_chain) return edges;
    return edges * keep_mask_for(edges, occlusion_squares(rng, cfg.image_size));
}

inline void require_pf_frozen(const ModelBundle& b) {
    if (!b.g_pf.frozen)
        throw std::logic_error("training step: g_pf must be frozen");
}

}  // namespace detail

// Real-image path. Edge->image pairs supervise g_e2m; g_s2e is driven by its
// adversarial loss plus the L1 regularizer through the frozen g_pf against
// the extracted edge map, with the predicted mask of the reconstructed image
// as its input. g_m2s and g_pf receive no update here.
inline LossBreakdown train_step_real(ModelBundle& b, OptimizerSet& opts,
                                     const torch::Tensor& images,
                                     const torch::Tensor& edges,
                                     const TrainingConfig& cfg, Rng& rng) {
    detail::require_pf_frozen(b);
    const auto& w = cfg.weights;

    auto fake_img = b.g_e2m.forward_train(edges);
    auto mask_src = b.g_m2s.forward_train(fake_img).detach();
    auto edges_pred = b.g_s2e.forward_train(mask_src);
    auto enhanced = b.g_pf.forward_train(detail::occlude(edges_pred, rng, cfg));

    auto l1_s2e = tricycle::l1_loss(enhanced, edges);
    auto adv_s2e = adversarial_loss_g(b.d_s2e.score(mask_src, enhanced));
    auto loss_s2e = adv_s2e + w.lambda1 * l1_s2e;

    auto l1_e2m = tricycle::l1_loss(fake_img, images);
    auto adv_e2m = adversarial_loss_g(b.d_e2m.score(edges, fake_img));
    auto loss_e2m = adv_e2m + w.lambda1 * l1_e2m;

    auto u_s2e = detail::compute_update(opts.g_s2e.get(), b.g_s2e.parameters(),
                                        loss_s2e, true);
    auto u_e2m = detail::compute_update(opts.g_e2m.get(), b.g_e2m.parameters(),
                                        loss_e2m, true);
    detail::apply_update(u_s2e);
    detail::apply_update(u_e2m);

    auto d_s2e_loss = adversarial_loss(b.d_s2e.score(mask_src, edges),
                                       b.d_s2e.score(mask_src, enhanced.detach()),
                                       AdversarialSide::Discriminator);
    detail::step_now(opts.d_s2e.get(), b.d_s2e.parameters(), d_s2e_loss, false);
    auto d_e2m_loss = adversarial_loss(b.d_e2m.score(edges, images),
                                       b.d_e2m.score(edges, fake_img.detach()),
                                       AdversarialSide::Discriminator);
    detail::step_now(opts.d_e2m.get(), b.d_e2m.parameters(), d_e2m_loss, false);

    LossBreakdown out;
    out.adversarial = adv_s2e.item<double>() + adv_e2m.item<double>();
    out.l1 = l1_s2e.item<double>() + l1_e2m.item<double>();
    out.total = loss_s2e.item<double>() + loss_e2m.item<double>();
    return out;
}

// Synthetic path: template mask -> edges (Sobel with probability p_sobel,
// otherwise g_s2e) -> occlusion + g_pf -> image -> predicted mask, then the
// prediction re-enters the chain for a second pass. Cycle terms compare the
// second pass against the (detached) first-pass anchors; g_m2s additionally
// trains with BCE + Tversky against the ground-truth template.
inline std::optional<LossBreakdown> train_step_synthetic(
    ModelBundle& b, OptimizerSet& opts, const torch::Tensor& mask,
    const torch::Tensor* real_edge_for_d, const torch::Tensor* real_img_for_d,
    const ScheduleState& schedule, const TrainingConfig& cfg, Rng& rng,
    StepTrace* trace = nullptr) {
    detail::require_pf_frozen(b);
    const auto& w = cfg.weights;
    if (mask.sum().item<double>() <= 0.0) return std::nullopt;  // resample signal

    const bool used_sobel = uniform(rng, 0.0, 1.0) < schedule.p_sobel;

    auto edges1 = used_sobel ? sobel_edges_tensor(mask) : b.g_s2e.forward_train(mask);
    auto enh1 = b.g_pf.forward_train(detail::occlude(edges1, rng, cfg));
    auto img1 = b.g_e2m.forward_train(enh1);
    auto pred1 = b.g_m2s.forward_train(img1);

    auto edges2 = used_sobel ? sobel_edges_tensor(pred1) : b.g_s2e.forward_train(pred1);
    auto enh2 = b.g_pf.forward_train(detail::occlude(edges2, rng, cfg));
    auto img2 = b.g_e2m.forward_train(enh2);

    auto cyc_s2e = cycle_loss_s2e(enh1.detach(), enh2);
    auto cyc_e2m = cycle_loss_e2m(img1.detach(), img2);
    auto cyc_m2s = cycle_loss_m2s(mask, pred1);
    auto bce = bce_loss(mask, pred1, w);
    auto tv = tversky_loss(pred1, mask, w);

    auto zero = torch::zeros({}, mask.options());
    auto adv_s2e = used_sobel ? zero : adversarial_loss_g(b.d_s2e.score(mask, enh1));
    auto adv_e2m = adversarial_loss_g(b.d_e2m.score(enh1.detach(), img1));

    auto loss_s2e = total_loss_s2e(adv_s2e, zero, cyc_s2e, cyc_e2m, w);
    auto loss_e2m = total_loss_e2m(adv_e2m, zero, cyc_s2e, cyc_e2m, w);
    auto loss_m2s = total_loss_m2s(cyc_s2e, cyc_e2m, cyc_m2s, bce, tv, w);

    std::vector<detail::PendingUpdate> updates;
    if (!used_sobel)
        updates.push_back(detail::compute_update(opts.g_s2e.get(),
                                                 b.g_s2e.parameters(), loss_s2e, true));
    updates.push_back(detail::compute_update(opts.g_e2m.get(),
                                             b.g_e2m.parameters(), loss_e2m, true));
    updates.push_back(detail::compute_update(opts.g_m2s.get(),
                                             b.g_m2s.parameters(), loss_m2s, true));
    for (auto& u : updates) detail::apply_update(u);

    if (cfg.disc_on_synthetic && real_edge_for_d && real_img_for_d) {
        auto d_loss = adversarial_loss(
            b.d_e2m.score(*real_edge_for_d, *real_img_for_d),
            b.d_e2m.score(enh1.detach(), img1.detach()),
            AdversarialSide::Discriminator);
        detail::step_now(opts.d_e2m.get(), b.d_e2m.parameters(), d_loss, false);
    }

    if (trace) {
        trace->used_sobel = used_sobel;
        trace->enhanced_first_pass = enh1.detach();
        trace->predicted_mask = pred1.detach();
    }

    LossBreakdown out;
    out.adversarial = adv_s2e.item<double>() + adv_e2m.item<double>();
    out.cycle_s2e = cyc_s2e.item<double>();
    out.cycle_e2m = cyc_e2m.item<double>();
    out.cycle_m2s = cyc_m2s.item<double>();
    out.bce = bce.item<double>();
    out.tversky = tv.item<double>();
    out.total = loss_s2e.item<double>() + loss_e2m.item<double>() +
                loss_m2s.item<double>();
    return out;
}

// The m2s objective value for one step, reassembled from logged components.
inline double m2s_total(const LossBreakdown& lb, const LossWeights& w) {
    const double cycles = w.m2s_cycle_literal
                              ? lb.cycle_e2m + lb.cycle_e2m + lb.cycle_m2s
                              : lb.cycle_s2e + lb.cycle_e2m + lb.cycle_m2s;
    return w.lambda2 * cycles + lb.bce + lb.tversky;
}

namespace detail {

inline std::string csv_row(int epoch, int step, const char* path,
                           const LossBreakdown& lb, double p_sobel) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g",
                  epoch, step, path, lb.adversarial, lb.l1, lb.cycle_s2e,
                  lb.cycle_e2m, lb.cycle_m2s, lb.bce, lb.tversky, lb.total, p_sobel);
    return buf;
}

constexpr const char* kCsvHeader =
    "epoch,step,path,adversarial,l1,cycle_s2e,cycle_e2m,cycle_m2s,bce,tversky,"
    "total,p_sobel";

// Training-split normalization remap: z-score squashed back into [0,1] so the
// [0,1] image contract survives (z in [-3, 3] spans the range).
inline Image apply_norm(const Image& img, double mean, double sd) {
    Image out = img;
    for (float& v : out.data) {
        const double z = (v - mean) / sd;
        v = static_cast<float>(std::clamp((z + 3.0) / 6.0, 0.0, 1.0));
    }
    return out;
}

}  // namespace detail

struct FitResult {
    int best_epoch = -1;
    double best_m2s_loss = std::numeric_limits<double>::infinity();
    int epochs_run = 0;
    std::vector<std::string> log_lines;  // CSV, header included
};

// Unsupervised training loop. Every `synthetic_cadence`-th sample (counted
// across epochs) is a synthetic template passed through the whole chain; the
// rest are real images batched through the real path. Stops when the
// epoch-mean m2s loss fails to improve for `early_stop_patience` epochs and
// restores the best-epoch weights.
inline FitResult fit(ModelBundle& b, const std::vector<DomainImage>& reals,
                     const TrainingConfig& cfg,
                     const std::filesystem::path& out_dir = {}) {
    cfg.validate();
    if (reals.empty()) throw ConfigError("fit: dataset is empty");
    if (cfg.deterministic) torch::set_num_threads(1);
    torch::manual_seed(cfg.seed);
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    if (!b.g_pf.frozen) b.g_pf.set_frozen(true);
    OptimizerSet opts = make_optimizers(b, cfg.learning_rate);

    FitResult result;
    result.log_lines.push_back(detail::kCsvHeader);
    EarlyStopTracker stopper(cfg.early_stop_patience, cfg.improvement_delta);
    std::string best_bytes;
    long long sample_counter = 0;
    int step_counter = 0;

    std::vector<size_t> order(reals.size());
    std::iota(order.begin(), order.end(), size_t{0});

    auto sample_tensors = [&](size_t idx) {
        auto aug = augment(reals[idx], std::nullopt, cfg.augment, rng);
        auto img = to_tensor(aug.image);
        auto edge = to_tensor(extract_edges(aug.image, cfg.edge_backend));
        return std::make_pair(img, edge);
    };

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        ScheduleState schedule;
        schedule.epoch = epoch;
        schedule.p_sobel = sobel_probability(epoch, cfg);
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<torch::Tensor> batch_imgs, batch_edges;
        auto flush_real = [&]() {
            if (batch_imgs.empty()) return;
            auto lb = train_step_real(b, opts, torch::cat(batch_imgs, 0),
                                      torch::cat(batch_edges, 0), cfg, rng);
            result.log_lines.push_back(
                detail::csv_row(epoch, step_counter++, "real", lb, schedule.p_sobel));
            batch_imgs.clear();
            batch_edges.clear();
        };

        double m2s_sum = 0.0;
        int m2s_steps = 0;
        for (size_t i = 0; i < order.size(); ++i) {
            ++sample_counter;
            if (sample_counter % cfg.synthetic_cadence == 0) {
                flush_real();
                auto [img, edge] = sample_tensors(order[i]);
                for (int attempt = 0; attempt < kTemplateResampleCap; ++attempt) {
                    auto tmpl = sample_template(rng, cfg.image_size, cfg.use_cone);
                    auto lb = train_step_synthetic(b, opts, to_tensor(tmpl.mask),
                                                   &edge, &img, schedule, cfg, rng);
                    if (!lb) continue;
                    m2s_sum += m2s_total(*lb, cfg.weights);
                    ++m2s_steps;
                    result.log_lines.push_back(detail::csv_row(
                        epoch, step_counter++, "synthetic", *lb, schedule.p_sobel));
                    break;
                }
            } else {
                auto [img, edge] = sample_tensors(order[i]);
                batch_imgs.push_back(img);
                batch_edges.push_back(edge);
                if (static_cast<int>(batch_imgs.size()) >= cfg.batch_size) flush_real();
            }
        }
        flush_real();
        ++result.epochs_run;
        b.epoch = epoch;

        if (m2s_steps == 0) continue;  // no m2s signal this epoch
        const double epoch_m2s = m2s_sum / m2s_steps;
        auto u = stopper.update(epoch, epoch_m2s);
        if (u.improved) {
            result.best_epoch = epoch;
            result.best_m2s_loss = epoch_m2s;
            best_bytes = bundle_to_bytes(b);
            if (!out_dir.empty())
                save_checkpoint(out_dir / "checkpoint_best.pt", b, &opts);
        }
        if (u.should_stop) break;
    }

    if (!best_bytes.empty()) {
        bundle_from_bytes(b, best_bytes);
        b.epoch = result.best_epoch;
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        save_checkpoint(out_dir / "checkpoint_final.pt", b, &opts);
        std::ofstream log(out_dir / "training_log.csv");
        for (const auto& line : result.log_lines) log << line << '\n';
    }
    return result;
}

// G^pf pretraining: reconstruct full edge maps from occluded ones with an
// adversarial + lambda1*L1 objective against a transient discriminator, then
// freeze. Zero epochs still freezes, leaving parameters untouched.
inline void pretrain_patch_filler(ModelBundle& b, const std::vector<EdgeImage>& real_edges,
                                  const TrainingConfig& cfg) {
    cfg.validate();
    if (real_edges.empty()) throw ConfigError("pretrain_patch_filler: no edge maps");
    torch::manual_seed(cfg.seed + 1);
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 1);

    b.g_pf.set_frozen(false);
    NetworkSpec dspec;
    dspec.image_size = cfg.image_size;
    dspec.base_width = cfg.base_width;
    dspec.depth = kDiscriminatorDepth;
    dspec.in_channels = 2;  // occluded source + candidate
    auto disc = build_discriminator(dspec, DiscriminatorRole::DS2E);

    torch::optim::Adam opt_g(b.g_pf.parameters(), cfg.learning_rate);
    torch::optim::Adam opt_d(disc.parameters(), cfg.learning_rate);

    std::vector<size_t> order(real_edges.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            std::vector<torch::Tensor> ins, tgts;
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            for (size_t i = start; i < end; ++i) {
                auto full = to_tensor(real_edges[order[i]]);
                auto occluded =
                    full * keep_mask_for(full, detail::occlusion_squares(
                                                   rng, cfg.image_size));
                ins.push_back(occluded);
                tgts.push_back(full);
            }
            auto input = torch::cat(ins, 0), target = torch::cat(tgts, 0);
            auto fake = b.g_pf.forward_train(input);
            auto loss_g = adversarial_loss_g(disc.score(input, fake)) +
                          cfg.weights.lambda1 * tricycle::l1_loss(fake, target);
            detail::step_now(&opt_g, b.g_pf.parameters(), loss_g, true);
            auto loss_d = adversarial_loss(disc.score(input, target),
                                           disc.score(input, fake.detach()),
                                           AdversarialSide::Discriminator);
            detail::step_now(&opt_d, disc.parameters(), loss_d, false);
        }
    }
    b.g_pf.set_frozen(true);
}

// Soft m2s output binarized (strictly greater than the threshold).
inline MaskImage predict_mask(ModelBundle& b, const DomainImage& image,
                              double threshold = 0.5) {
    const DomainImage* src = &image;
    Image normed;
    if (b.norm_sd != 1.0 || b.norm_mean != 0.0) {
        normed = detail::apply_norm(image, b.norm_mean, b.norm_sd);
        src = &normed;
    }
    auto soft = b.g_m2s.translate(to_tensor(*src));
    return binarize(to_image(soft), static_cast<float>(threshold));
}

// Continue training on a labelled fraction: BCE + Tversky on g_m2s (and,
// optionally, real-path updates for the rest of the chain).
inline void fine_tune(ModelBundle& b,
                      const std::vector<std::pair<DomainImage, MaskImage>>& labelled,
                      double fraction, const TrainingConfig& cfg) {
    cfg.validate();
    if (labelled.empty()) throw ConfigError("fine_tune: no labelled pairs");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("fine_tune: fraction must be in (0, 1]");
    torch::manual_seed(cfg.seed + 2);
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 2);

    // Nearest-integer rounding, at least one image.
    const auto n_used = std::max<size_t>(
        1, static_cast<size_t>(std::lround(fraction * static_cast<double>(labelled.size()))));
    std::vector<size_t> order(labelled.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(order.size(), n_used));

    if (!b.g_pf.frozen) b.g_pf.set_frozen(true);
    OptimizerSet opts = make_optimizers(b, cfg.learning_rate);

    for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<torch::Tensor> imgs, masks, edges;
            for (size_t i = start; i < end; ++i) {
                auto aug = augment(labelled[order[i]].first, labelled[order[i]].second,
                                   cfg.augment, rng);
                imgs.push_back(to_tensor(aug.image));
                masks.push_back(to_tensor(*aug.mask));
                if (cfg.finetune_full_chain)
                    edges.push_back(to_tensor(extract_edges(aug.image, cfg.edge_backend)));
            }
            auto img = torch::cat(imgs, 0), gt = torch::cat(masks, 0);
            auto pred = b.g_m2s.forward_train(img);
            auto loss = bce_loss(gt, pred, cfg.weights) +
                        tversky_loss(pred, gt, cfg.weights);
            detail::step_now(opts.g_m2s.get(), b.g_m2s.parameters(), loss, false);
            if (cfg.finetune_full_chain)
                train_step_real(b, opts, img, torch::cat(edges, 0), cfg, rng);
        }
    }
}

// Standalone supervised segmentation baseline: a fresh g_m2s trained with
// BCE + Dice (Tversky at alpha = beta = 0.5).
inline ModelBundle train_supervised_baseline(
    const std::vector<std::pair<DomainImage, MaskImage>>& labelled,
    const TrainingConfig& cfg) {
    cfg.validate();
    if (labelled.empty()) throw ConfigError("train_supervised_baseline: no labelled pairs");
    torch::manual_seed(cfg.seed + 3);
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 3);

    ModelBundle b = build_model_bundle(cfg.image_size, cfg.domain_channels,
                                       cfg.base_width, cfg.depth);
    b.g_pf.set_frozen(true);
    torch::optim::Adam opt(b.g_m2s.parameters(), cfg.learning_rate);
    LossWeights dice_w = cfg.weights;
    dice_w.alpha = 0.5;
    dice_w.beta = 0.5;

    std::vector<size_t> order(labelled.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (int epoch = 0; epoch < cfg.baseline_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<torch::Tensor> imgs, masks;
            for (size_t i = start; i < end; ++i) {
                auto aug = augment(labelled[order[i]].first, labelled[order[i]].second,
                                   cfg.augment, rng);
                imgs.push_back(to_tensor(aug.image));
                masks.push_back(to_tensor(*aug.mask));
            }
            auto img = torch::cat(imgs, 0), gt = torch::cat(masks, 0);
            auto pred = b.g_m2s.forward_train(img);
            auto loss = bce_loss(gt, pred, dice_w) + tversky_loss(pred, gt, dice_w);
            detail::step_now(&opt, b.g_m2s.parameters(), loss, false);
        }
    }
    return b;
}

// Table-style evaluation of a trained bundle on labelled pairs.
inline MetricsReport evaluate(ModelBundle& b,
                              const std::vector<std::pair<DomainImage, MaskImage>>& labelled,
                              double threshold = 0.5, double th_iou_threshold = 0.65) {
    return evaluate_predictor(
        [&](const DomainImage& img) { return predict_mask(b, img, threshold); },
        labelled, th_iou_threshold);
}

}  // namespace tricycle
