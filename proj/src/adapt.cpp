#include "radapt/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace radapt {

void AdaptConfig::validate() const {
  detail::require(iterations >= 1, "iterations must be at least 1");
  detail::require(batch_size >= 1, "batch_size must be at least 1");
  detail::require(frames_per_adapt >= 0, "frames_per_adapt must be non-negative");
  // lr = 0 is allowed here: it turns adaptation into a no-op run.
  AdamHyper check = adam;
  if (check.lr == 0.0) check.lr = 1.0;
  check.validate();
  sampler.validate();
}

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t fraction_count(std::size_t n, double fraction) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * fraction)));
}

}  // namespace

double AdaptReport::head_mean(double fraction) const {
  const std::size_t k = std::min(loss_curve.size(), fraction_count(loss_curve.size(), fraction));
  return mean_of(std::span(loss_curve).first(k));
}

double AdaptReport::tail_mean(double fraction) const {
  const std::size_t k = std::min(loss_curve.size(), fraction_count(loss_curve.size(), fraction));
  return mean_of(std::span(loss_curve).last(k));
}

VideoClip restore_clip(const VsrModel& model, const VideoClip& lr_clip) {
  detail::require(!lr_clip.empty(), "cannot restore an empty clip");
  VideoClip out{{}, lr_clip.color};
  out.frames.reserve(lr_clip.size());
  for (std::size_t t = 0; t < lr_clip.size(); ++t)
    out.frames.push_back(forward(model, window_at(lr_clip, t, model.config.frames)));
  return out;
}

namespace {

constexpr std::size_t kGuardWindow = 10;
constexpr double kGuardFactor = 10.0;

/// Window of identical frames for a single pseudo input.
Tensorf replicated_windows(std::span<const PseudoPair> batch, int frames) {
  std::vector<Image> windows;
  windows.reserve(batch.size());
  for (const auto& p : batch) {
    std::vector<Image> w(static_cast<std::size_t>(frames), p.input);
    windows.push_back(from_tensor(stack_channels(w)));
  }
  return to_batch(windows);
}

}  // namespace

AdaptReport adapt_on_pool(VsrModel& model, const VideoClip& pool, const AdaptConfig& cfg) {
  cfg.validate();
  detail::require(!pool.empty(), "adaptation pool is empty");
  detail::require(cfg.sampler.sr_scale == model.config.scale, "sampler scale differs from model scale");
  const auto start = std::chrono::steady_clock::now();
  AdaptReport report;
  report.pool_checksum_before = checksum(pool);
  Rng rng(mix_seed(cfg.seed, 0x5a17));
  double reference = 0.0;
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto batch = sample_batch(pool, cfg.sampler, rng, cfg.batch_size);
    std::vector<Image> inputs, targets;
    for (const auto& p : batch) {
      inputs.push_back(p.input);
      targets.push_back(p.target);
    }
    Graph<float> g;
    Var out = forward(g, model, g.input(replicated_windows(batch, model.config.frames)),
                      bicubic_base(inputs, model.config.scale));
    Var loss = mse_loss(g, out, g.input(to_batch(targets)));
    const double lv = g.value(loss).array()(0);
    report.loss_curve.push_back(lv);
    report.iterations = it + 1;
    const auto n = report.loss_curve.size();
    if (n == kGuardWindow) reference = mean_of(report.loss_curve);
    const bool runaway = n > kGuardWindow && reference > 0.0 &&
                         mean_of(std::span(report.loss_curve).last(kGuardWindow)) > kGuardFactor * reference;
    if (!std::isfinite(lv) || runaway) {
      report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.params_checksum = model.params.checksum();
      report.pool_checksum_after = checksum(pool);
      throw AdaptationDiverged("adaptation diverged at iteration " + std::to_string(it), std::move(report));
    }
    g.backward(loss, model.params);
    adam_step(model.params, cfg.adam, cfg.adam.lr);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.params_checksum = model.params.checksum();
  report.pool_checksum_after = checksum(pool);
  return report;
}

namespace {

AdaptResult adapt_from_pool(const VsrModel& initial_model, VideoClip pool, const VideoClip& lr_clip,
                            const AdaptConfig& cfg) {
  AdaptResult result{initial_model, std::move(pool), {}, {}};
  result.report = adapt_on_pool(result.model, result.initial, cfg);
  result.restored = restore_clip(result.model, lr_clip);
  return result;
}

}  // namespace

AdaptResult self_adapt(const VsrModel& model, const VideoClip& lr_clip, const AdaptConfig& cfg) {
  cfg.validate();
  detail::require(!lr_clip.empty(), "cannot adapt on an empty clip");
  const auto start = std::chrono::steady_clock::now();
  VideoClip initial = restore_clip(model, lr_clip);
  const auto group = static_cast<std::size_t>(cfg.frames_per_adapt);
  if (group == 0 || group >= lr_clip.size()) {
    AdaptResult r = adapt_from_pool(model, std::move(initial), lr_clip, cfg);
    r.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }

  // Independent adaptation per group of frames; restoration of a frame uses
  // the parameters adapted on its own group only.
  const std::size_t groups = (lr_clip.size() + group - 1) / group;
  AdaptConfig per_group = cfg;
  per_group.iterations = std::max(1, cfg.iterations / static_cast<int>(groups));
  AdaptResult result{model, initial, {{}, lr_clip.color}, {}};
  result.report.pool_checksum_before = checksum(initial);
  std::uint64_t params_hash = 0xcbf29ce484222325ULL;
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const std::size_t first = gi * group;
    const std::size_t last = std::min(lr_clip.size(), first + group);
    VideoClip pool{{initial.frames.begin() + static_cast<std::ptrdiff_t>(first),
                    initial.frames.begin() + static_cast<std::ptrdiff_t>(last)},
                   initial.color};
    per_group.seed = mix_seed(cfg.seed, gi);
    VsrModel local = model;
    const AdaptReport rep = adapt_on_pool(local, pool, per_group);
    result.report.loss_curve.insert(result.report.loss_curve.end(), rep.loss_curve.begin(), rep.loss_curve.end());
    result.report.iterations += rep.iterations;
    params_hash = fnv1a64(&rep.params_checksum, sizeof(rep.params_checksum), params_hash);
    // Frames of this group still see their true temporal neighbours.
    for (std::size_t t = first; t < last; ++t)
      result.restored.frames.push_back(forward(local, window_at(lr_clip, t, model.config.frames)));
    if (gi + 1 == groups) result.model = std::move(local);
  }
  result.report.params_checksum = params_hash;
  result.report.pool_checksum_after = checksum(initial);
  result.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

AdaptResult distill_adapt(const VsrModel& teacher, const VsrModel& student, const VideoClip& lr_clip,
                          const AdaptConfig& cfg) {
  cfg.validate();
  detail::require(!lr_clip.empty(), "cannot adapt on an empty clip");
  detail::require(teacher.config.scale == student.config.scale, "teacher and student scales differ");
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t teacher_hash = teacher.params.checksum();
  AdaptResult r = adapt_from_pool(student, restore_clip(teacher, lr_clip), lr_clip, cfg);
  if (teacher.params.checksum() != teacher_hash) throw Error("teacher parameters changed during distillation");
  r.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Theorem1Result theorem1_oracle(VsrModel& model, const Image& input_lr, std::span<const Image> targets, int steps,
                               const AdamHyper& hyper) {
  hyper.validate();
  detail::require(targets.size() >= 2, "theorem1_oracle needs at least two targets");
  detail::require(steps >= 1, "theorem1_oracle needs at least one step");
  const int s = model.config.scale;
  for (const auto& t : targets)
    detail::require(t.height == input_lr.height * s && t.width == input_lr.width * s &&
                        t.channels == input_lr.channels,
                    "every target must be scale x the input");
  const std::vector<Image> window(static_cast<std::size_t>(model.config.frames), input_lr);
  const Tensorf window_tensor = stack_channels(window);
  const Tensorf base = bicubic_base(std::span(&input_lr, 1), s);

  Theorem1Result result;
  const std::size_t n = targets.size();
  double cycle_sum = 0.0;
  std::vector<double> step_loss;
  for (int step = 0; step < steps; ++step) {
    const Image& target = targets[static_cast<std::size_t>(step) % n];
    Graph<float> g;
    Var out = forward(g, model, g.input(window_tensor), base);
    Var loss = mse_loss(g, out, g.input(to_tensor(target)));
    const double lv = g.value(loss).array()(0);
    if (!std::isfinite(lv))
      throw AdaptationDiverged("theorem1 oracle diverged at step " + std::to_string(step), {});
    cycle_sum += lv;
    if ((static_cast<std::size_t>(step) + 1) % n == 0) {
      result.cycle_loss.push_back(cycle_sum / static_cast<double>(n));
      cycle_sum = 0.0;
    }
    g.backward(loss, model.params);
    const double lr = step < steps / 2 ? hyper.lr : 0.5 * hyper.lr;
    adam_step(model.params, hyper, lr);
  }
  result.output = forward(model, window);
  // Convergence: spread of the cycle-averaged loss over the last 100 steps.
  const std::size_t tail = std::min(result.cycle_loss.size(), std::max<std::size_t>(1, 100 / n));
  if (tail >= 2) {
    const auto last = std::span(result.cycle_loss).last(tail);
    const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
    result.converged = (*hi - *lo) < 1e-6;
  }
  return result;
}

}  // namespace radapt
