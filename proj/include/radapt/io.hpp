#pragma once

#include <filesystem>

#include "radapt/image.hpp"
#include "radapt/synthvideo.hpp"

namespace radapt {

/// 8-bit PNG (gray or RGB; alpha dropped) -> image in [0, 1].
Image read_png(const std::filesystem::path& path);

/// Writes 8-bit gray or RGB; samples are clamped and rounded.
void write_png(const Image& img, const std::filesystem::path& path);

/// All `%05d.png` frames of a directory, in name order.
VideoClip read_frames(const std::filesystem::path& dir);
void write_frames(const VideoClip& clip, const std::filesystem::path& dir);

/// Clip directory: hr/%05d.png, lr/%05d.png, spec.json.
void write_clip_dir(const ClipPair& clip, const std::filesystem::path& dir);

/// Frames of `dir/<which>` where which is "hr" or "lr"; falls back to the
/// directory itself when it holds frames directly.
VideoClip read_clip_frames(const std::filesystem::path& dir, const std::string& which);

std::string scene_spec_json(const SceneSpec& spec);
SceneSpec parse_scene_spec(const std::string& json_text);

}  // namespace radapt
