#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "radapt/autodiff.hpp"
#include "radapt/image.hpp"
#include "radapt/random.hpp"

namespace radapt {

enum class SizeClass { teacher, student };

/// Multi-frame SR network hyperparameters.
struct ModelConfig {
  int frames = 3;          // odd window length T
  int channels = 64;       // feature width
  int blocks = 16;         // residual blocks
  int scale = 4;           // upscaling factor s
  int color_channels = 3;  // per-frame channels
  SizeClass size_class = SizeClass::teacher;

  static ModelConfig teacher() { return {}; }
  static ModelConfig student() { return {3, 32, 4, 4, 3, SizeClass::student}; }

  void validate() const;

  /// Receptive-field radius in input pixels.
  int receptive_radius() const { return 2 + 2 * blocks; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// f_theta: frames stacked on channels -> conv+relu -> residual blocks ->
/// conv -> pixel_shuffle(s) -> + bicubic(center frame).
struct VsrModel {
  ModelConfig config;
  ParamStore<float> params;

  /// Fresh model with seeded initialization.
  static VsrModel create(const ModelConfig& config, std::uint64_t seed);

  Index parameter_count() const { return params.parameter_count(); }
};

/// Names of the upsampling head parameters (zeroing them makes the network
/// a pure bicubic upscaler).
inline constexpr const char* kHeadWeight = "upsample.weight";
inline constexpr const char* kHeadBias = "upsample.bias";

/// Graph-building forward. `window` is (B, T*C, h, w); `base` is the
/// bicubic upscale of the center frames, (B, C, s*h, s*w).
Var forward(Graph<float>& graph, const VsrModel& model, Var window, const Tensorf& base);

/// Inference on one T-frame window; returns the restored center frame.
Image forward(const VsrModel& model, std::span<const Image> window);

/// T-frame window centred on frame t with replicate padding at clip ends.
std::vector<Image> window_at(const VideoClip& clip, std::size_t t, int frames);

/// Bicubic upscale of the centre of every window in the batch.
Tensorf bicubic_base(std::span<const Image> centers, int scale);

struct PretrainConfig {
  int steps = 2000;
  int batch_size = 8;
  int patch_lr = 16;  // LR crop side; HR crop is scale * patch_lr
  AdamHyper adam{2e-4, 0.9, 0.999, 1e-8};
  int validation_crops = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PretrainReport {
  std::vector<double> loss_curve;
  double validation_loss_before = 0.0;
  double validation_loss_after = 0.0;
  double validation_psnr_before = 0.0;
  double validation_psnr_after = 0.0;
  double bicubic_validation_psnr = 0.0;
};

/// Supervised training on HR clips; LR inputs are resize(hr, 1/s).
PretrainReport pretrain(VsrModel& model, std::span<const VideoClip> corpus_hr, const PretrainConfig& cfg);

/// Checkpoint persistence. Format: "RADPT1", then per entry
/// {u32 name_len, name, u32 rank, u32 dims[rank], f32 payload}, then a u64
/// FNV-1a checksum of all payload bytes; integers little-endian.
void save_params(const ParamStore<float>& store, const std::filesystem::path& path);
ParamStore<float> load_params(const std::filesystem::path& path);

/// Copy values from `store` into `model`; names and shapes must match.
void assign_params(VsrModel& model, const ParamStore<float>& store);

/// Architecture implied by a parameter set.
ModelConfig infer_config(const ParamStore<float>& store);

/// Load a checkpoint into a freshly built model of the implied architecture.
VsrModel load_model(const std::filesystem::path& path);

}  // namespace radapt
