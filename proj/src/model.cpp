#include "radapt/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "radapt/resample.hpp"

namespace radapt {

namespace {

std::string block_name(int i, int conv, const char* what) {
  return "blocks." + std::to_string(i) + ".conv" + std::to_string(conv) + "." + what;
}

void add_conv(ParamStore<float>& store, Rng& rng, const std::string& prefix, Index out_c, Index in_c,
              double gain) {
  const double fan_in = static_cast<double>(in_c * 9);
  const double stddev = gain * std::sqrt(2.0 / fan_in);
  Tensorf w(Shape{out_c, in_c, 3, 3});
  for (float& v : w.values()) v = static_cast<float>(stddev * rng.normal());
  store.add(prefix + ".weight", std::move(w));
  store.add(prefix + ".bias", Tensorf(Shape{1, out_c, 1, 1}));
}

Var conv_layer(Graph<float>& g, const ParamStore<float>& p, Var x, const std::string& prefix) {
  return conv2d(g, x, g.parameter(p, prefix + ".weight"), g.parameter(p, prefix + ".bias"), 1, 1);
}

}  // namespace

void ModelConfig::validate() const {
  detail::require(frames > 0 && frames % 2 == 1, "model window length must be odd and positive");
  detail::require(channels > 0, "model channels must be positive");
  detail::require(blocks > 0, "model blocks must be positive");
  detail::require(scale >= 1, "model scale must be at least 1");
  detail::require(color_channels > 0, "model color channels must be positive");
}

VsrModel VsrModel::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  VsrModel model{config, {}};
  Rng rng(seed);
  const Index c = config.channels;
  add_conv(model.params, rng, "input", c, config.frames * config.color_channels, 1.0);
  for (int i = 0; i < config.blocks; ++i) {
    add_conv(model.params, rng, "blocks." + std::to_string(i) + ".conv1", c, c, 1.0);
    add_conv(model.params, rng, "blocks." + std::to_string(i) + ".conv2", c, c, 0.1);
  }
  add_conv(model.params, rng, "upsample", config.color_channels * config.scale * config.scale, c, 0.1);
  return model;
}

Var forward(Graph<float>& g, const VsrModel& model, Var window, const Tensorf& base) {
  const ModelConfig& cfg = model.config;
  const Shape& in = g.value(window).shape();
  detail::require(in.channels == cfg.frames * cfg.color_channels,
                  "window has " + std::to_string(in.channels) + " channels, model expects " +
                      std::to_string(cfg.frames * cfg.color_channels));
  detail::require(base.shape() == Shape{in.batch, cfg.color_channels, in.height * cfg.scale, in.width * cfg.scale},
                  "bicubic base has shape " + to_string(base.shape()));
  const auto& p = model.params;
  Var x = relu(g, conv_layer(g, p, window, "input"));
  for (int i = 0; i < cfg.blocks; ++i) {
    Var h = relu(g, conv_layer(g, p, x, "blocks." + std::to_string(i) + ".conv1"));
    h = conv_layer(g, p, h, "blocks." + std::to_string(i) + ".conv2");
    x = add(g, x, h);
  }
  Var up = pixel_shuffle(g, conv_layer(g, p, x, "upsample"), cfg.scale);
  return add(g, up, g.input(base));
}

std::vector<Image> window_at(const VideoClip& clip, std::size_t t, int frames) {
  detail::require(!clip.empty(), "window of empty clip");
  detail::require(t < clip.size(), "window centre out of range");
  const auto half = static_cast<std::int64_t>(frames / 2);
  const auto last = static_cast<std::int64_t>(clip.size()) - 1;
  std::vector<Image> window;
  window.reserve(static_cast<std::size_t>(frames));
  for (std::int64_t k = -half; k <= half; ++k) {
    const auto idx = std::clamp<std::int64_t>(static_cast<std::int64_t>(t) + k, 0, last);
    window.push_back(clip[static_cast<std::size_t>(idx)]);
  }
  return window;
}

Tensorf bicubic_base(std::span<const Image> centers, int scale) {
  std::vector<Image> up;
  up.reserve(centers.size());
  for (const auto& c : centers) up.push_back(resize(c, static_cast<double>(scale)));
  return to_batch(up);
}

Image forward(const VsrModel& model, std::span<const Image> window) {
  const ModelConfig& cfg = model.config;
  detail::require(static_cast<int>(window.size()) == cfg.frames,
                  "window holds " + std::to_string(window.size()) + " frames, model expects " +
                      std::to_string(cfg.frames));
  for (const auto& f : window) {
    detail::require(f.same_dims(window.front()), "window frames differ in size");
    detail::require(f.channels == cfg.color_channels, "window frame channel count mismatch");
  }
  Graph<float> g(false);
  const Image& center = window[window.size() / 2];
  Var out = forward(g, model, g.input(stack_channels(window)), bicubic_base(std::span(&center, 1), cfg.scale));
  return from_tensor(g.value(out));
}

void PretrainConfig::validate() const {
  detail::require(steps >= 0, "pretrain steps must be non-negative");
  detail::require(batch_size >= 1, "pretrain batch size must be positive");
  detail::require(patch_lr >= 1, "pretrain patch size must be positive");
  detail::require(validation_crops >= 1, "pretrain needs at least one validation crop");
  adam.validate();
}

namespace {

struct TrainingCrop {
  Tensorf window;  // (1, T*C, p, p)
  Image center;    // LR centre crop
  Image target;    // HR crop
};

struct CropSource {
  std::span<const VideoClip> hr;
  std::vector<VideoClip> lr;
  int scale;
  int frames;
  int patch;
};

TrainingCrop draw_crop(const CropSource& src, Rng& rng) {
  const auto ci = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(src.hr.size()) - 1));
  const VideoClip& lr = src.lr[ci];
  const auto t = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(lr.size()) - 1));
  const Image& f = lr[t];
  const Index y = rng.uniform_int(0, f.height - src.patch);
  const Index x = rng.uniform_int(0, f.width - src.patch);
  std::vector<Image> window;
  for (const auto& w : window_at(lr, t, src.frames)) window.push_back(crop(w, y, x, src.patch, src.patch));
  TrainingCrop out;
  out.window = stack_channels(window);
  out.center = window[window.size() / 2];
  out.target = crop(src.hr[ci][t], y * src.scale, x * src.scale, src.patch * src.scale, src.patch * src.scale);
  return out;
}

struct Batch {
  Tensorf window;
  Tensorf base;
  Tensorf target;
};

Batch make_batch(std::span<const TrainingCrop> crops, int scale) {
  std::vector<Image> windows, centers, targets;
  for (const auto& c : crops) {
    windows.push_back(from_tensor(c.window));
    centers.push_back(c.center);
    targets.push_back(c.target);
  }
  return {to_batch(windows), bicubic_base(centers, scale), to_batch(targets)};
}

double batch_loss(const VsrModel& model, const Batch& b) {
  Graph<float> g(false);
  Var out = forward(g, model, g.input(b.window), b.base);
  return mse(g.value(out), b.target);
}

double psnr_from_mse(double m) { return m <= 0.0 ? 100.0 : std::min(100.0, 10.0 * std::log10(1.0 / m)); }

}  // namespace

PretrainReport pretrain(VsrModel& model, std::span<const VideoClip> corpus_hr, const PretrainConfig& cfg) {
  cfg.validate();
  detail::require(!corpus_hr.empty(), "pretraining corpus is empty");
  const int s = model.config.scale;
  CropSource src{corpus_hr, {}, s, model.config.frames, cfg.patch_lr};
  for (const auto& clip : corpus_hr) {
    detail::require(!clip.empty(), "pretraining clip without frames");
    VideoClip lr{{}, clip.color};
    for (const auto& f : clip.frames) {
      detail::require(f.height % s == 0 && f.width % s == 0, "corpus HR dims must be divisible by scale");
      lr.frames.push_back(resize(f, 1.0 / s));
      detail::require(lr.frames.back().height >= cfg.patch_lr && lr.frames.back().width >= cfg.patch_lr,
                      "corpus frames smaller than the training patch");
    }
    src.lr.push_back(std::move(lr));
  }

  Rng val_rng(mix_seed(cfg.seed, 1));
  std::vector<TrainingCrop> val_crops;
  for (int i = 0; i < cfg.validation_crops; ++i) val_crops.push_back(draw_crop(src, val_rng));
  const Batch validation = make_batch(val_crops, s);

  PretrainReport report;
  report.validation_loss_before = batch_loss(model, validation);
  report.bicubic_validation_psnr = psnr_from_mse(mse(validation.base, validation.target));

  Rng rng(mix_seed(cfg.seed, 0));
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<TrainingCrop> crops;
    for (int i = 0; i < cfg.batch_size; ++i) crops.push_back(draw_crop(src, rng));
    const Batch b = make_batch(crops, s);
    Graph<float> g;
    Var out = forward(g, model, g.input(b.window), b.base);
    Var loss = mse_loss(g, out, g.input(b.target));
    const double lv = g.value(loss).array()(0);
    if (!std::isfinite(lv)) throw TrainingDiverged("pretraining loss became non-finite at step " + std::to_string(step));
    report.loss_curve.push_back(lv);
    g.backward(loss, model.params);
    adam_step(model.params, cfg.adam);
  }
  report.validation_loss_after = batch_loss(model, validation);
  report.validation_psnr_before = psnr_from_mse(report.validation_loss_before);
  report.validation_psnr_after = psnr_from_mse(report.validation_loss_after);
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[] = "RADPT1";
constexpr std::size_t kMagicLen = 6;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void take(void* dst, std::size_t n) {
    if (n > remaining()) throw CorruptCheckpoint("checkpoint truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_params(const ParamStore<float>& store, const std::filesystem::path& path) {
  std::string out(kMagic, kMagicLen);
  std::uint64_t payload_hash = 0xcbf29ce484222325ULL;
  for (const auto& e : store) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    const Shape& s = e.value.shape();
    put_u32(out, 4);
    for (Index d : {s.batch, s.channels, s.height, s.width}) put_u32(out, static_cast<std::uint32_t>(d));
    const std::size_t n = static_cast<std::size_t>(e.value.size()) * sizeof(float);
    out.append(reinterpret_cast<const char*>(e.value.data()), n);
    payload_hash = fnv1a64(e.value.data(), n, payload_hash);
  }
  out.append(reinterpret_cast<const char*>(&payload_hash), 8);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing checkpoint: " + path.string());
}

ParamStore<float> load_params(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < kMagicLen + 8 || bytes.compare(0, kMagicLen, kMagic) != 0)
    throw CorruptCheckpoint("not a checkpoint (bad magic or too short): " + path.string());
  Reader r(bytes);
  char magic[kMagicLen];
  r.take(magic, kMagicLen);
  ParamStore<float> store;
  std::uint64_t payload_hash = 0xcbf29ce484222325ULL;
  while (r.remaining() > 8) {
    const std::uint32_t name_len = r.u32();
    if (name_len == 0 || name_len > 4096) throw CorruptCheckpoint("implausible parameter name length");
    std::string name(name_len, '\0');
    r.take(name.data(), name_len);
    const std::uint32_t rank = r.u32();
    if (rank != 4) throw CorruptCheckpoint("unsupported tensor rank " + std::to_string(rank));
    Index dims[4];
    for (Index& d : dims) d = r.u32();
    const Shape shape{dims[0], dims[1], dims[2], dims[3]};
    const auto n = static_cast<std::size_t>(shape.size()) * sizeof(float);
    if (n + 8 > r.remaining()) throw CorruptCheckpoint("checkpoint truncated in " + name);
    Tensorf value(shape);
    r.take(value.data(), n);
    payload_hash = fnv1a64(value.data(), n, payload_hash);
    if (store.contains(name)) throw CorruptCheckpoint("duplicate parameter " + name);
    store.add(std::move(name), std::move(value));
  }
  if (r.remaining() != 8) throw CorruptCheckpoint("checkpoint truncated");
  std::uint64_t stored;
  r.take(&stored, 8);
  if (stored != payload_hash) throw CorruptCheckpoint("checkpoint checksum mismatch: " + path.string());
  return store;
}

void assign_params(VsrModel& model, const ParamStore<float>& store) {
  if (store.size() != model.params.size())
    throw CorruptCheckpoint("checkpoint holds " + std::to_string(store.size()) + " tensors, model expects " +
                            std::to_string(model.params.size()));
  for (auto& e : model.params) {
    if (!store.contains(e.name)) throw CorruptCheckpoint("checkpoint lacks parameter " + e.name);
    const auto& src = store[e.name];
    if (src.value.shape() != e.value.shape())
      throw CorruptCheckpoint("shape mismatch for " + e.name + ": " + to_string(src.value.shape()) + " vs " +
                              to_string(e.value.shape()));
    e.value = src.value;
  }
}

ModelConfig infer_config(const ParamStore<float>& store) {
  if (!store.contains("input.weight") || !store.contains(kHeadWeight))
    throw CorruptCheckpoint("checkpoint lacks input or upsample layers");
  const Shape in = store["input.weight"].value.shape();
  const Shape head = store[kHeadWeight].value.shape();
  ModelConfig cfg;
  cfg.channels = static_cast<int>(in.batch);
  cfg.blocks = 0;
  while (store.contains(block_name(cfg.blocks, 1, "weight"))) ++cfg.blocks;
  cfg.color_channels = 3;
  if (in.channels % cfg.color_channels != 0) cfg.color_channels = 1;
  cfg.frames = static_cast<int>(in.channels / cfg.color_channels);
  const Index sq = head.batch / cfg.color_channels;
  cfg.scale = static_cast<int>(std::lround(std::sqrt(static_cast<double>(sq))));
  if (cfg.scale * cfg.scale * cfg.color_channels != head.batch || cfg.blocks == 0 || cfg.frames % 2 == 0)
    throw CorruptCheckpoint("checkpoint does not describe a valid model");
  const ModelConfig student = ModelConfig::student();
  cfg.size_class = (cfg.channels <= student.channels && cfg.blocks <= student.blocks) ? SizeClass::student
                                                                                       : SizeClass::teacher;
  return cfg;
}

VsrModel load_model(const std::filesystem::path& path) {
  const ParamStore<float> store = load_params(path);
  VsrModel model = VsrModel::create(infer_config(store), 0);
  assign_params(model, store);
  return model;
}

}  // namespace radapt
