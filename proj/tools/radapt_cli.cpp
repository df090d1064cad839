#include <sys/resource.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "radapt/adapt.hpp"
#include "radapt/io.hpp"
#include "radapt/metrics.hpp"
#include "radapt/model.hpp"
#include "radapt/synthvideo.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace radapt;

namespace {

constexpr int kSchemaVersion = 1;

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kCorrupt = 4,
  kDiverged = 5,
};

constexpr const char* kExitHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  unexpected failure\n"
    "  2  invalid arguments or configuration (including unknown config keys)\n"
    "  3  missing or unreadable file, malformed PNG or JSON\n"
    "  4  corrupt or mismatched checkpoint\n"
    "  5  training or adaptation diverged\n";

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t file_checksum(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes.data(), bytes.size());
}

long peak_rss_kib() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string report;
  int border_crop = 4;
  bool quantize_first = false;
};

struct AdaptArgs {
  int iterations = 1000;
  int scale = 4;
  std::string scale_mode = "random:0.8:0.95";
  int patch_size = 64;
  int batch_size = 4;
  double lr = 1e-4;
  std::string frames_per_adapt = "all";
};

struct Args {
  Common common;
  AdaptArgs adapt;
  // gen
  int frames = 64;
  int hr_size = 256;
  double zoom_start = 1.0;
  double zoom_end = 1.6;
  double drift = 0.0;
  std::string recurrence = "high";
  bool still = false;
  std::string spec;
  // pretrain
  std::vector<std::string> corpus;
  std::string model = "teacher";
  int steps = 2000;
  int pretrain_patch = 16;
  int pretrain_batch = 8;
  double pretrain_lr = 2e-4;
  // model / clip paths
  std::string checkpoint, teacher, student, clip, out, save_checkpoint;
  // eval / profile
  std::string ref, test, which = "hr";
  int row = 0;
};

void add_common(CLI::App* sub, Common& c, bool eval_flags) {
  sub->add_option("--seed", c.seed, "Seed for all randomness")->capture_default_str();
  sub->add_option("--config", c.config, "Flat JSON file with the same keys as the flags; flags override it");
  sub->add_option("--report", c.report, "Write the JSON report here");
  if (eval_flags) {
    sub->add_option("--border-crop", c.border_crop, "Pixels ignored at each frame edge by PSNR/SSIM")
        ->capture_default_str();
    sub->add_flag("--quantize-first", c.quantize_first, "Quantize restorations to 8 bit before measuring");
  }
}

void add_adapt(CLI::App* sub, AdaptArgs& a) {
  sub->add_option("--iterations", a.iterations, "Adaptation iterations")->capture_default_str();
  sub->add_option("--scale", a.scale, "Super-resolution factor (must match the checkpoint)")->capture_default_str();
  sub->add_option("--scale-mode", a.scale_mode, "none | fixed:F | random:LO:HI | upscale:LO:HI")
      ->capture_default_str();
  sub->add_option("--patch-size", a.patch_size, "HR patch side of pseudo pairs")->capture_default_str();
  sub->add_option("--batch-size", a.batch_size, "Pseudo pairs per iteration")->capture_default_str();
  sub->add_option("--lr", a.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--frames-per-adapt", a.frames_per_adapt, "'all' adapts one model on the whole clip; N adapts per group of N frames")
      ->capture_default_str();
}

/// Fills options not given on the command line from a flat JSON object.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw IoError("malformed config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw InvalidInput("config must be a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    for (char& ch : name)
      if (ch == '_') ch = '-';
    CLI::Option* opt = name == "config" ? nullptr : sub->get_option_no_throw("--" + name);
    if (opt == nullptr) throw InvalidInput("unknown config key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;  // the flag wins
    std::vector<std::string> items;
    auto scalar = [&](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      if (v.is_number()) return v.dump();
      throw InvalidInput("config key '" + key + "' must be a scalar or a list of scalars");
    };
    if (value.is_array())
      for (const auto& v : value) items.push_back(scalar(v));
    else
      items.push_back(scalar(value));
    if (opt->get_type_size() == 0) {
      // Flag: only a true value sets it.
      if (items.size() == 1 && items[0] == "true") opt->add_result("true");
      else if (items.size() != 1 || items[0] != "false") throw InvalidInput("config key '" + key + "' must be boolean");
    } else {
      for (const auto& item : items) opt->add_result(item);
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw InvalidInput("config key '" + key + "': " + e.what());
    }
  }
}

AdaptConfig make_adapt_config(const Args& a) {
  AdaptConfig cfg;
  cfg.iterations = a.adapt.iterations;
  cfg.batch_size = a.adapt.batch_size;
  cfg.adam.lr = a.adapt.lr;
  cfg.seed = a.common.seed;
  SamplerConfig base;
  base.patch_size_hr = a.adapt.patch_size;
  base.sr_scale = a.adapt.scale;
  base.seed = a.common.seed;
  cfg.sampler = make_scale_mode(ScaleMode::parse(a.adapt.scale_mode), base);
  if (a.adapt.frames_per_adapt == "all") {
    cfg.frames_per_adapt = 0;
  } else {
    try {
      std::size_t used = 0;
      cfg.frames_per_adapt = std::stoi(a.adapt.frames_per_adapt, &used);
      if (used != a.adapt.frames_per_adapt.size() || cfg.frames_per_adapt < 1) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw InvalidInput("--frames-per-adapt must be 'all' or a positive integer");
    }
  }
  cfg.validate();
  return cfg;
}

json adapt_config_json(const Args& a) {
  return {{"iterations", a.adapt.iterations},         {"scale", a.adapt.scale},
          {"scale_mode", a.adapt.scale_mode},         {"patch_size", a.adapt.patch_size},
          {"batch_size", a.adapt.batch_size},         {"lr", a.adapt.lr},
          {"frames_per_adapt", a.adapt.frames_per_adapt}};
}

json common_json(const Common& c) {
  return {{"seed", c.seed}, {"border_crop", c.border_crop}, {"quantize_first", c.quantize_first}};
}

VideoClip measured(const VideoClip& clip, bool quantize_first) {
  if (!quantize_first) return clip;
  VideoClip out{{}, clip.color};
  for (const auto& f : clip.frames) out.frames.push_back(quantize8(f));
  return out;
}

json eval_json(const EvalResult& e) {
  json frames = json::array();
  for (const auto& f : e.per_frame) frames.push_back({{"psnr_y", f.psnr_y}, {"ssim", f.ssim}});
  return {{"psnr_y", e.psnr_y}, {"ssim", e.ssim}, {"tof", e.tof}, {"per_frame", frames}};
}

json adapt_report_json(const AdaptReport& r) {
  return {{"iterations", r.iterations},
          {"loss_head", r.head_mean()},
          {"loss_tail", r.tail_mean()},
          {"loss_curve", r.loss_curve},
          {"adapt_wall_seconds", r.wall_seconds},
          {"params_checksum", hex(r.params_checksum)},
          {"pool_checksum_before", hex(r.pool_checksum_before)},
          {"pool_checksum_after", hex(r.pool_checksum_after)}};
}

void print_eval(const std::string& label, const EvalResult& e) {
  std::printf("%-10s psnr_y %.4f dB  ssim %.5f  tof %.4f\n", label.c_str(), e.psnr_y, e.ssim, e.tof);
}

struct Session {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  json report;

  Session(const std::string& command, json config) {
    report["schema_version"] = kSchemaVersion;
    report["command"] = command;
    report["config"] = std::move(config);
    report["checksums"] = json::object();
  }

  void finish(const Common& c) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const long rss = peak_rss_kib();
    report["wall_seconds"] = wall;
    report["peak_rss_kib"] = rss;
    std::printf("wall %.3f s  peak rss %ld KiB\n", wall, rss);
    if (c.report.empty()) return;
    std::ofstream f(c.report);
    if (!f) throw IoError("cannot write report " + c.report);
    f << report.dump(2) << "\n";
  }
};

/// HR reference of a clip directory, when it has one.
std::optional<VideoClip> reference_of(const fs::path& clip_dir) {
  if (!fs::is_directory(clip_dir / "hr")) return std::nullopt;
  return read_frames(clip_dir / "hr");
}

void require_path(const std::string& p, const char* what) {
  if (p.empty()) throw InvalidInput(std::string(what) + " is required");
  if (!fs::exists(p)) throw IoError(std::string(what) + " does not exist: " + p);
}

void require_scale(const VsrModel& m, int scale) {
  if (m.config.scale != scale)
    throw InvalidInput("--scale " + std::to_string(scale) + " differs from checkpoint scale " +
                       std::to_string(m.config.scale));
}

int cmd_gen(const Args& a) {
  if (a.out.empty()) throw InvalidInput("--out is required");
  SceneSpec spec;
  if (!a.spec.empty()) {
    require_path(a.spec, "--spec");
    std::ifstream f(a.spec);
    spec = parse_scene_spec(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
  } else {
    if (a.recurrence != "high" && a.recurrence != "low") throw InvalidInput("--recurrence must be high or low");
    const Recurrence rec = a.recurrence == "high" ? Recurrence::high : Recurrence::low;
    spec = a.still ? SceneSpec::static_scene(a.common.seed, a.frames, a.hr_size)
                   : SceneSpec::zoom_sweep(a.common.seed, a.frames, a.hr_size, a.zoom_start, a.zoom_end, rec, a.drift);
    spec.recurrence = rec;
  }
  spec.validate();
  Session s("gen", {{"seed", spec.seed}, {"spec", json::parse(scene_spec_json(spec))}});
  const ClipPair clip = generate_clip(spec);
  write_clip_dir(clip, a.out);
  s.report["checksums"]["hr"] = hex(checksum(clip.hr));
  s.report["checksums"]["lr"] = hex(checksum(clip.lr));
  std::printf("wrote %d frames to %s\n", spec.num_frames(), a.out.c_str());
  s.report["frames"] = spec.num_frames();
  s.finish(a.common);
  return kOk;
}

int cmd_pretrain(const Args& a) {
  if (a.out.empty()) throw InvalidInput("--out is required");
  if (a.corpus.empty()) throw InvalidInput("--corpus needs at least one clip directory");
  if (a.model != "teacher" && a.model != "student") throw InvalidInput("--model must be teacher or student");
  ModelConfig mc = a.model == "teacher" ? ModelConfig::teacher() : ModelConfig::student();
  mc.scale = a.adapt.scale;
  mc.validate();
  PretrainConfig pc;
  pc.steps = a.steps;
  pc.batch_size = a.pretrain_batch;
  pc.patch_lr = a.pretrain_patch;
  pc.adam.lr = a.pretrain_lr;
  pc.seed = a.common.seed;
  pc.validate();
  for (const auto& c : a.corpus) require_path(c, "--corpus");

  Session s("pretrain", {{"seed", a.common.seed},
                         {"model", a.model},
                         {"scale", mc.scale},
                         {"steps", pc.steps},
                         {"batch_size", pc.batch_size},
                         {"patch_size", pc.patch_lr},
                         {"lr", pc.adam.lr},
                         {"corpus", a.corpus}});
  std::vector<VideoClip> corpus;
  json sums = json::array();
  for (const auto& c : a.corpus) {
    corpus.push_back(read_clip_frames(c, "hr"));
    sums.push_back(hex(checksum(corpus.back())));
  }
  s.report["checksums"]["corpus"] = sums;
  VsrModel model = VsrModel::create(mc, a.common.seed);
  const PretrainReport r = pretrain(model, corpus, pc);
  save_params(model.params, a.out);
  s.report["checksums"]["checkpoint"] = hex(file_checksum(a.out));
  s.report["pretrain"] = {{"validation_psnr_before", r.validation_psnr_before},
                          {"validation_psnr_after", r.validation_psnr_after},
                          {"bicubic_validation_psnr", r.bicubic_validation_psnr},
                          {"validation_loss_before", r.validation_loss_before},
                          {"validation_loss_after", r.validation_loss_after},
                          {"loss_curve", r.loss_curve}};
  std::printf("validation psnr %.4f -> %.4f dB (bicubic %.4f dB)\n", r.validation_psnr_before,
              r.validation_psnr_after, r.bicubic_validation_psnr);
  s.finish(a.common);
  return kOk;
}

int cmd_restore(const Args& a) {
  require_path(a.checkpoint, "--checkpoint");
  require_path(a.clip, "--clip");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const VsrModel model = load_model(a.checkpoint);
  require_scale(model, a.adapt.scale);
  Session s("restore", {{"common", common_json(a.common)},
                        {"scale", a.adapt.scale},
                        {"checkpoint", a.checkpoint},
                        {"clip", a.clip}});
  const VideoClip lr = read_clip_frames(a.clip, "lr");
  s.report["checksums"]["checkpoint"] = hex(file_checksum(a.checkpoint));
  s.report["checksums"]["lr"] = hex(checksum(lr));
  const VideoClip out = restore_clip(model, lr);
  write_frames(out, a.out);
  s.report["checksums"]["output"] = hex(checksum(out));
  if (const auto hr = reference_of(a.clip)) {
    const EvalResult e = evaluate_clip(*hr, measured(out, a.common.quantize_first), a.common.border_crop);
    s.report["eval"] = eval_json(e);
    print_eval("restored", e);
  }
  s.finish(a.common);
  return kOk;
}

int cmd_adapt(const Args& a) {
  require_path(a.checkpoint, "--checkpoint");
  require_path(a.clip, "--clip");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const AdaptConfig cfg = make_adapt_config(a);
  const VsrModel model = load_model(a.checkpoint);
  require_scale(model, a.adapt.scale);
  Session s("adapt", {{"common", common_json(a.common)},
                      {"adapt", adapt_config_json(a)},
                      {"checkpoint", a.checkpoint},
                      {"clip", a.clip}});
  const VideoClip lr = read_clip_frames(a.clip, "lr");
  s.report["checksums"]["checkpoint"] = hex(file_checksum(a.checkpoint));
  s.report["checksums"]["lr"] = hex(checksum(lr));
  const AdaptResult r = self_adapt(model, lr, cfg);
  write_frames(r.restored, a.out);
  if (!a.save_checkpoint.empty()) save_params(r.model.params, a.save_checkpoint);
  s.report["checksums"]["initial"] = hex(checksum(r.initial));
  s.report["checksums"]["output"] = hex(checksum(r.restored));
  s.report["adapt_report"] = adapt_report_json(r.report);
  std::printf("loss %.6g -> %.6g over %d iterations\n", r.report.head_mean(), r.report.tail_mean(),
              r.report.iterations);
  if (const auto hr = reference_of(a.clip)) {
    const EvalResult before = evaluate_clip(*hr, measured(r.initial, a.common.quantize_first), a.common.border_crop);
    const EvalResult after = evaluate_clip(*hr, measured(r.restored, a.common.quantize_first), a.common.border_crop);
    s.report["eval_before"] = eval_json(before);
    s.report["eval_after"] = eval_json(after);
    print_eval("before", before);
    print_eval("after", after);
  }
  s.finish(a.common);
  return kOk;
}

int cmd_distill(const Args& a) {
  require_path(a.teacher, "--teacher");
  require_path(a.student, "--student");
  require_path(a.clip, "--clip");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const AdaptConfig cfg = make_adapt_config(a);
  const VsrModel teacher = load_model(a.teacher);
  const VsrModel student = load_model(a.student);
  require_scale(teacher, a.adapt.scale);
  require_scale(student, a.adapt.scale);
  Session s("distill", {{"common", common_json(a.common)},
                        {"adapt", adapt_config_json(a)},
                        {"teacher", a.teacher},
                        {"student", a.student},
                        {"clip", a.clip}});
  const VideoClip lr = read_clip_frames(a.clip, "lr");
  s.report["checksums"]["teacher"] = hex(file_checksum(a.teacher));
  s.report["checksums"]["student"] = hex(file_checksum(a.student));
  s.report["checksums"]["lr"] = hex(checksum(lr));
  const AdaptResult r = distill_adapt(teacher, student, lr, cfg);
  write_frames(r.restored, a.out);
  if (!a.save_checkpoint.empty()) save_params(r.model.params, a.save_checkpoint);
  s.report["checksums"]["teacher_restoration"] = hex(checksum(r.initial));
  s.report["checksums"]["output"] = hex(checksum(r.restored));
  s.report["adapt_report"] = adapt_report_json(r.report);
  std::printf("loss %.6g -> %.6g over %d iterations\n", r.report.head_mean(), r.report.tail_mean(),
              r.report.iterations);
  if (const auto hr = reference_of(a.clip)) {
    const VideoClip student_before = restore_clip(student, lr);
    const EvalResult before = evaluate_clip(*hr, measured(student_before, a.common.quantize_first), a.common.border_crop);
    const EvalResult teacher_eval = evaluate_clip(*hr, measured(r.initial, a.common.quantize_first), a.common.border_crop);
    const EvalResult after = evaluate_clip(*hr, measured(r.restored, a.common.quantize_first), a.common.border_crop);
    s.report["eval_before"] = eval_json(before);
    s.report["eval_teacher"] = eval_json(teacher_eval);
    s.report["eval_after"] = eval_json(after);
    print_eval("before", before);
    print_eval("teacher", teacher_eval);
    print_eval("after", after);
  }
  s.finish(a.common);
  return kOk;
}

int cmd_eval(const Args& a) {
  require_path(a.ref, "--ref");
  require_path(a.test, "--test");
  Session s("eval", {{"common", common_json(a.common)}, {"ref", a.ref}, {"test", a.test}});
  const VideoClip ref = read_clip_frames(a.ref, "hr");
  const VideoClip test = read_clip_frames(a.test, "hr");
  if (ref.size() != test.size())
    throw InvalidInput("frame counts differ: " + std::to_string(ref.size()) + " vs " + std::to_string(test.size()));
  s.report["checksums"]["ref"] = hex(checksum(ref));
  s.report["checksums"]["test"] = hex(checksum(test));
  // PNG frames are already 8-bit, so --quantize-first changes nothing here.
  const EvalResult e = evaluate_clip(ref, measured(test, a.common.quantize_first), a.common.border_crop);
  s.report["eval"] = eval_json(e);
  print_eval("eval", e);
  s.finish(a.common);
  return kOk;
}

int cmd_profile(const Args& a) {
  require_path(a.clip, "--clip");
  if (a.out.empty()) throw InvalidInput("--out is required");
  const VideoClip clip = read_clip_frames(a.clip, a.which);
  const Image& first = clip[0];
  if (a.row < 0 || a.row >= first.height)
    throw InvalidInput("--row must lie in [0, " + std::to_string(first.height) + ")");
  Session s("profile", {{"seed", a.common.seed}, {"clip", a.clip}, {"which", a.which}, {"row", a.row}});
  // Time runs down the strip: row t is row `a.row` of frame t.
  Image strip(first.channels, static_cast<Index>(clip.size()), first.width);
  for (std::size_t t = 0; t < clip.size(); ++t)
    for (Index c = 0; c < first.channels; ++c)
      for (Index x = 0; x < first.width; ++x) strip.at(c, static_cast<Index>(t), x) = clip[t].at(c, a.row, x);
  write_png(strip, a.out);
  s.report["checksums"]["clip"] = hex(checksum(clip));
  s.report["checksums"]["strip"] = hex(checksum(strip));
  s.report["strip"] = {{"height", strip.height}, {"width", strip.width}};
  std::printf("profile %lld x %lld written to %s\n", static_cast<long long>(strip.height),
              static_cast<long long>(strip.width), a.out.c_str());
  s.finish(a.common);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radapt: self-supervised test-time adaptation for video super-resolution"};
  app.footer(kExitHelp);
  app.require_subcommand(1, 1);
  Args a;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic clip directory (hr/, lr/, spec.json)");
  add_common(gen, a.common, false);
  gen->add_option("--out", a.out, "Output clip directory");
  gen->add_option("--frames", a.frames, "Frame count")->capture_default_str();
  gen->add_option("--hr-size", a.hr_size, "HR frame side")->capture_default_str();
  gen->add_option("--zoom-start", a.zoom_start, "Zoom of the first frame")->capture_default_str();
  gen->add_option("--zoom-end", a.zoom_end, "Zoom of the last frame")->capture_default_str();
  gen->add_option("--drift", a.drift, "Diagonal drift in pixels over the clip")->capture_default_str();
  gen->add_option("--recurrence", a.recurrence, "high | low")->capture_default_str();
  gen->add_flag("--static", a.still, "Fixed camera");
  gen->add_option("--spec", a.spec, "Regenerate from a spec.json");

  auto* pre = app.add_subcommand("pretrain", "Pre-train a model on the HR frames of clip directories");
  add_common(pre, a.common, false);
  pre->add_option("--corpus", a.corpus, "Clip directories")->expected(1, -1);
  pre->add_option("--out", a.out, "Checkpoint to write");
  pre->add_option("--model", a.model, "teacher | student")->capture_default_str();
  pre->add_option("--scale", a.adapt.scale, "Super-resolution factor")->capture_default_str();
  pre->add_option("--steps", a.steps, "Training steps")->capture_default_str();
  pre->add_option("--batch-size", a.pretrain_batch, "Crops per step")->capture_default_str();
  pre->add_option("--patch-size", a.pretrain_patch, "LR crop side")->capture_default_str();
  pre->add_option("--lr", a.pretrain_lr, "Adam learning rate")->capture_default_str();

  auto* res = app.add_subcommand("restore", "Restore a clip with a checkpoint");
  add_common(res, a.common, true);
  res->add_option("--checkpoint", a.checkpoint, "Model checkpoint");
  res->add_option("--clip", a.clip, "Clip directory (lr/ is read; hr/ if present is the reference)");
  res->add_option("--out", a.out, "Directory for restored frames");
  res->add_option("--scale", a.adapt.scale, "Super-resolution factor (must match the checkpoint)")
      ->capture_default_str();

  auto* ad = app.add_subcommand("adapt", "Self-adapt a checkpoint on a clip and restore it");
  add_common(ad, a.common, true);
  add_adapt(ad, a.adapt);
  ad->add_option("--checkpoint", a.checkpoint, "Pre-trained checkpoint");
  ad->add_option("--clip", a.clip, "Clip directory");
  ad->add_option("--out", a.out, "Directory for restored frames");
  ad->add_option("--save-checkpoint", a.save_checkpoint, "Write the adapted parameters here");

  auto* di = app.add_subcommand("distill", "Adapt a student on a frozen teacher's restoration");
  add_common(di, a.common, true);
  add_adapt(di, a.adapt);
  di->add_option("--teacher", a.teacher, "Teacher checkpoint");
  di->add_option("--student", a.student, "Student checkpoint");
  di->add_option("--clip", a.clip, "Clip directory");
  di->add_option("--out", a.out, "Directory for restored frames");
  di->add_option("--save-checkpoint", a.save_checkpoint, "Write the adapted student here");

  auto* ev = app.add_subcommand("eval", "Compare two frame directories (PSNR-Y, SSIM, tOF)");
  add_common(ev, a.common, true);
  ev->add_option("--ref", a.ref, "Reference frames (or clip directory; hr/ is used)");
  ev->add_option("--test", a.test, "Frames to score");

  auto* pr = app.add_subcommand("profile", "Stack one row of every frame into a temporal profile");
  add_common(pr, a.common, false);
  pr->add_option("--clip", a.clip, "Clip or frame directory");
  pr->add_option("--which", a.which, "hr | lr when --clip is a clip directory")->capture_default_str();
  pr->add_option("--row", a.row, "Row index y")->capture_default_str();
  pr->add_option("--out", a.out, "PNG to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!a.common.config.empty()) apply_config(sub, a.common.config);
    const std::string name = sub->get_name();
    if (name == "gen") return cmd_gen(a);
    if (name == "pretrain") return cmd_pretrain(a);
    if (name == "restore") return cmd_restore(a);
    if (name == "adapt") return cmd_adapt(a);
    if (name == "distill") return cmd_distill(a);
    if (name == "eval") return cmd_eval(a);
    return cmd_profile(a);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CorruptCheckpoint& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCorrupt;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
