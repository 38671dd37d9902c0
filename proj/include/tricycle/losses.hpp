#pragma once

#include <torch/torch.h>

#include <stdexcept>

namespace tricycle {

enum class BceReduction { Mean, Sum };

struct LossWeights {
    double lambda1 = 100.0;  // L1 weight
    double lambda2 = 10.0;   // weight on every cycle-consistency term
    double alpha = 0.5;      // Tversky false-positive weight
    double beta = 0.5;       // Tversky false-negative weight
    double epsilon = 1e-6;   // Tversky smoothing
    double prob_clamp = 1e-7;
    BceReduction bce_reduction = BceReduction::Mean;
    // Keep the published m2s combination literally (the e2m cycle term twice,
    // no s2e term) instead of the corrected one-of-each form.
    bool m2s_cycle_literal = false;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AdversarialSide { Generator, Discriminator };

namespace detail {
inline void require_finite(const torch::Tensor& t, const char* what) {
    if (!torch::isfinite(t).all().item<bool>())
        throw NumericError(std::string(what) + ": non-finite input");
}
}  // namespace detail

// Score-space binary adversarial loss. Discriminators emit unbounded patch
// scores s; probabilities are sigmoid(s), and both sides are evaluated with
// softplus so nothing ever reaches log(0):
//   discriminator: E[softplus(-s_real)] + E[softplus(s_fake)]
//                  = -E[log D(x)] - E[log(1 - D(G(z)))]
//   generator:     E[softplus(-s_fake)]   (non-saturating form)
inline torch::Tensor adversarial_loss(const torch::Tensor& d_real_scores,
                                      const torch::Tensor& d_fake_scores,
                                      AdversarialSide side) {
    if (side == AdversarialSide::Discriminator) {
        detail::require_finite(d_real_scores, "adversarial_loss(real)");
        detail::require_finite(d_fake_scores, "adversarial_loss(fake)");
        return torch::softplus(-d_real_scores).mean() +
               torch::softplus(d_fake_scores).mean();
    }
    detail::require_finite(d_fake_scores, "adversarial_loss(fake)");
    return torch::softplus(-d_fake_scores).mean();
}

inline torch::Tensor adversarial_loss_g(const torch::Tensor& d_fake_scores) {
    return adversarial_loss(d_fake_scores, d_fake_scores, AdversarialSide::Generator);
}

// Mean absolute difference over all pixels and channels.
inline torch::Tensor l1_loss(const torch::Tensor& generated,
                             const torch::Tensor& target) {
    TORCH_CHECK(generated.sizes() == target.sizes(), "l1_loss: shape mismatch");
    return (generated - target).abs().mean();
}

// The three cycle-consistency terms are L1 distances between an anchor from
// the first pass through the chain and its reconstruction on the second pass.
inline torch::Tensor cycle_loss_s2e(const torch::Tensor& original_edge,
                                    const torch::Tensor& reconstructed_edge) {
    return tricycle::l1_loss(reconstructed_edge, original_edge);
}

inline torch::Tensor cycle_loss_e2m(const torch::Tensor& original_image,
                                    const torch::Tensor& reconstructed_image) {
    return tricycle::l1_loss(reconstructed_image, original_image);
}

inline torch::Tensor cycle_loss_m2s(const torch::Tensor& original_mask,
                                    const torch::Tensor& reconstructed_mask) {
    return tricycle::l1_loss(reconstructed_mask, original_mask);
}

// Pixelwise binary cross-entropy; predictions are clamped away from {0,1}
// before the logs. Mean reduction by default so the magnitude is comparable
// across image sizes (sum is available as a switch).
inline torch::Tensor bce_loss(const torch::Tensor& y, const torch::Tensor& y_hat,
                              const LossWeights& w = {}) {
    TORCH_CHECK(y.sizes() == y_hat.sizes(), "bce_loss: shape mismatch");
    detail::require_finite(y_hat, "bce_loss");
    auto p = y_hat.clamp(w.prob_clamp, 1.0 - w.prob_clamp);
    auto ce = -(y * torch::log(p) + (1.0 - y) * torch::log(1.0 - p));
    return w.bce_reduction == BceReduction::Mean ? ce.mean() : ce.sum();
}

// Tversky loss 1 - TI over a soft prediction P_y and binary ground truth P_g:
//   TI = (sum P_g P_y + eps) / (sum P_g P_y + alpha sum Q_g + beta sum Q_y + eps)
//   Q_g = (1 - P_g) P_y   (false positives)
//   Q_y = P_g (1 - P_y)   (false negatives)
// alpha = beta = 0.5 makes this the Dice loss.
inline torch::Tensor tversky_loss(const torch::Tensor& pred, const torch::Tensor& gt,
                                  const LossWeights& w = {}) {
    TORCH_CHECK(pred.sizes() == gt.sizes(), "tversky_loss: shape mismatch");
    auto inter = (pred * gt).sum();
    auto q_g = ((1.0 - gt) * pred).sum();
    auto q_y = (gt * (1.0 - pred)).sum();
    auto ti = (inter + w.epsilon) / (inter + w.alpha * q_g + w.beta * q_y + w.epsilon);
    return 1.0 - ti;
}

// Smoothed Dice loss; with smoothing 2*eps it coincides with the Tversky loss
// at alpha = beta = 0.5.
inline torch::Tensor dice_loss(const torch::Tensor& pred, const torch::Tensor& gt,
                               double smoothing = 2e-6) {
    auto inter = (pred * gt).sum();
    return 1.0 - (2.0 * inter + smoothing) / (pred.sum() + gt.sum() + smoothing);
}

// Combined per-generator objectives. The cycle terms carry lambda2; the
// published equations define lambda2 but leave it implicit.
inline torch::Tensor total_loss_s2e(const torch::Tensor& adversarial,
                                    const torch::Tensor& l1,
                                    const torch::Tensor& cyc_s2e,
                                    const torch::Tensor& cyc_e2m,
                                    const LossWeights& w) {
    return adversarial + w.lambda1 * l1 + w.lambda2 * (cyc_s2e + cyc_e2m);
}

inline torch::Tensor total_loss_e2m(const torch::Tensor& adversarial,
                                    const torch::Tensor& l1,
                                    const torch::Tensor& cyc_s2e,
                                    const torch::Tensor& cyc_e2m,
                                    const LossWeights& w) {
    return adversarial + w.lambda1 * l1 + w.lambda2 * (cyc_s2e + cyc_e2m);
}

inline torch::Tensor total_loss_m2s(const torch::Tensor& cyc_s2e,
                                    const torch::Tensor& cyc_e2m,
                                    const torch::Tensor& cyc_m2s,
                                    const torch::Tensor& bce,
                                    const torch::Tensor& tversky,
                                    const LossWeights& w) {
    auto cycles = w.m2s_cycle_literal ? cyc_e2m + cyc_e2m + cyc_m2s
                                      : cyc_s2e + cyc_e2m + cyc_m2s;
    return w.lambda2 * cycles + bce + tversky;
}

// Per-step component log, in unweighted form; `total` is the weighted sum of
// the objectives that were optimized on the step.
struct LossBreakdown {
    double adversarial = 0.0;
    double l1 = 0.0;
    double cycle_s2e = 0.0;
    double cycle_e2m = 0.0;
    double cycle_m2s = 0.0;
    double bce = 0.0;
    double tversky = 0.0;
    double total = 0.0;
};

}  // namespace tricycle
