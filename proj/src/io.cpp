#include "radapt/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace radapt {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open image: " + path.string());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_stdio(&image, file.get()))
    throw IoError("not a readable PNG: " + path.string() + " (" + image.message + ")");
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const Index channels = gray ? 1 : 3;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("failed decoding PNG: " + path.string());
  }
  Image out(channels, image.height, image.width);
  for (Index y = 0; y < out.height; ++y)
    for (Index x = 0; x < out.width; ++x)
      for (Index c = 0; c < channels; ++c)
        out.at(c, y, x) = static_cast<float>(buffer[static_cast<std::size_t>((y * out.width + x) * channels + c)]) / 255.0f;
  return out;
}

void write_png(const Image& img, const fs::path& path) {
  detail::require(img.channels == 1 || img.channels == 3, "PNG output needs 1 or 3 channels");
  std::vector<png_byte> buffer(static_cast<std::size_t>(img.size()));
  for (Index y = 0; y < img.height; ++y)
    for (Index x = 0; x < img.width; ++x)
      for (Index c = 0; c < img.channels; ++c) {
        const float v = std::clamp(img.at(c, y, x), 0.0f, 1.0f);
        buffer[static_cast<std::size_t>((y * img.width + x) * img.channels + c)] =
            static_cast<png_byte>(std::lround(v * 255.0f));
      }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr))
    throw IoError("failed writing PNG: " + path.string() + " (" + image.message + ")");
}

VideoClip read_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a frame directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no PNG frames in " + dir.string());
  VideoClip clip;
  for (const auto& f : files) {
    clip.frames.push_back(read_png(f));
    if (!clip.frames.back().same_dims(clip.frames.front()))
      throw IoError("frame " + f.string() + " differs in size from the first frame");
  }
  clip.color = clip.frames.front().channels == 1 ? ColorSpace::luma : ColorSpace::rgb;
  return clip;
}

void write_frames(const VideoClip& clip, const fs::path& dir) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t t = 0; t < clip.size(); ++t) {
    std::snprintf(name, sizeof(name), "%05zu.png", t);
    write_png(clip[t], dir / name);
  }
}

std::string scene_spec_json(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["hr_size"] = spec.hr_size;
  j["scale"] = spec.scale;
  j["recurrence"] = spec.recurrence == Recurrence::high ? "high" : "low";
  j["num_frames"] = spec.num_frames();
  auto& path = j["camera_path"] = nlohmann::ordered_json::array();
  for (const auto& p : spec.camera_path) path.push_back({{"zoom", p.zoom}, {"tx", p.tx}, {"ty", p.ty}});
  return j.dump(2);
}

SceneSpec parse_scene_spec(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SceneSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.hr_size = j.at("hr_size").get<int>();
    spec.scale = j.value("scale", 4);
    const auto rec = j.at("recurrence").get<std::string>();
    if (rec != "high" && rec != "low") throw InvalidInput("unknown recurrence level " + rec);
    spec.recurrence = rec == "high" ? Recurrence::high : Recurrence::low;
    for (const auto& p : j.at("camera_path"))
      spec.camera_path.push_back({p.at("zoom").get<double>(), p.at("tx").get<double>(), p.at("ty").get<double>()});
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed scene spec: ") + e.what());
  }
}

void write_clip_dir(const ClipPair& clip, const fs::path& dir) {
  fs::create_directories(dir);
  write_frames(clip.hr, dir / "hr");
  write_frames(clip.lr, dir / "lr");
  std::ofstream f(dir / "spec.json");
  if (!f) throw IoError("cannot write " + (dir / "spec.json").string());
  f << scene_spec_json(clip.spec) << "\n";
}

VideoClip read_clip_frames(const fs::path& dir, const std::string& which) {
  if (fs::is_directory(dir / which)) return read_frames(dir / which);
  return read_frames(dir);
}

}  // namespace radapt
