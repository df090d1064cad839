#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "radapt/model.hpp"
#include "radapt/pseudo_data.hpp"

namespace radapt {

struct AdaptConfig {
  int iterations = 1000;
  int batch_size = 4;
  AdamHyper adam{1e-4, 0.9, 0.999, 1e-8};
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  /// Frames per independently adapted group; 0 adapts one model on all frames.
  int frames_per_adapt = 0;

  void validate() const;
};

struct AdaptReport {
  std::vector<double> loss_curve;
  double wall_seconds = 0.0;
  int iterations = 0;
  std::uint64_t params_checksum = 0;
  std::uint64_t pool_checksum_before = 0;
  std::uint64_t pool_checksum_after = 0;

  /// Mean loss over the first / last `fraction` of iterations.
  double head_mean(double fraction = 0.1) const;
  double tail_mean(double fraction = 0.1) const;
};

/// Thrown when the adaptation loss runs away; carries the partial report.
class AdaptationDiverged : public TrainingDiverged {
 public:
  AdaptationDiverged(const std::string& what, AdaptReport report)
      : TrainingDiverged(what), report_(std::move(report)) {}
  const AdaptReport& report() const { return report_; }

 private:
  AdaptReport report_;
};

struct AdaptResult {
  VsrModel model;       // adapted network (the last group's in grouped mode)
  VideoClip initial;    // {Y_t}, restoration before adaptation
  VideoClip restored;   // restoration with the adapted parameters
  AdaptReport report;
};

/// Restore every frame from its replicate-padded T-window.
VideoClip restore_clip(const VsrModel& model, const VideoClip& lr_clip);

/// Adapt `model` on pseudo pairs drawn from the fixed pool `pool`, in place.
AdaptReport adapt_on_pool(VsrModel& model, const VideoClip& pool, const AdaptConfig& cfg);

/// Self-supervised adaptation: restore once, adapt on that restoration,
/// restore again. With frames_per_adapt = k > 0 the clip is split into
/// groups of k frames, each adapted from the pre-trained weights with an
/// equal share of the iteration budget, and each group restored by its own
/// parameters.
AdaptResult self_adapt(const VsrModel& model, const VideoClip& lr_clip, const AdaptConfig& cfg);

/// Test-time distillation: the frozen teacher restores once, the student is
/// adapted on pseudo pairs from the teacher's restoration.
AdaptResult distill_adapt(const VsrModel& teacher, const VsrModel& student, const VideoClip& lr_clip,
                          const AdaptConfig& cfg);

struct Theorem1Result {
  Image output;                    // f_theta(y_LR) after training
  std::vector<double> cycle_loss;  // mean loss per full target cycle
  bool converged = false;          // last-100-step cycle-loss variation < 1e-6
};

/// Trains `model` (in place) on one LR input whose targets cycle through
/// `targets`; the MSE minimizer is the pixel-wise target mean. The learning
/// rate is halved after half of `steps`.
Theorem1Result theorem1_oracle(VsrModel& model, const Image& input_lr, std::span<const Image> targets, int steps,
                               const AdamHyper& hyper);

}  // namespace radapt
