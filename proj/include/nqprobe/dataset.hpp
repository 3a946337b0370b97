#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nqprobe/image.hpp"

namespace nqprobe {

enum class Label : int { kReal = 0, kFake = 1 };

const char* label_name(Label label) noexcept;
Label parse_label(const std::string& name);

struct LabeledItem {
  ImageBuffer image;
  Label label = Label::kReal;
  std::string tag;
};

struct LabeledDataset {
  std::vector<LabeledItem> items;

  std::size_t size() const noexcept { return items.size(); }
  std::size_t count(Label label) const noexcept;
  bool has_both_classes() const noexcept {
    return count(Label::kReal) > 0 && count(Label::kFake) > 0;
  }
  std::vector<int> labels() const;
};

struct ManifestEntry {
  std::string path;
  Label label = Label::kReal;
  std::string tag;
};

// JSON lines of {"path", "label", "tag"}; relative paths resolve against the
// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest,
                    const std::vector<ManifestEntry>& entries);
LabeledDataset load_dataset(const std::filesystem::path& manifest);

// Writes item_00000.png ... plus manifest.jsonl into `dir` and returns the
// manifest path. Images are stored as 8-bit PNG (fractional values floored).
std::filesystem::path save_dataset(const LabeledDataset& dataset,
                                   const std::filesystem::path& dir);

}  // namespace nqprobe
