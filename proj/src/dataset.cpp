#include "nqprobe/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nqprobe/error.hpp"

namespace nqprobe {

const char* label_name(Label label) noexcept {
  return label == Label::kFake ? "fake" : "real";
}

Label parse_label(const std::string& name) {
  if (name == "real" || name == "0") return Label::kReal;
  if (name == "fake" || name == "1") return Label::kFake;
  throw InvalidInput("unknown label '" + name + "'");
}

std::size_t LabeledDataset::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [label](const auto& it) { return it.label == label; }));
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(static_cast<int>(it.label));
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw InvalidInput("cannot open manifest " + manifest.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.path = j.at("path").get<std::string>();
      const auto& label = j.at("label");
      e.label = label.is_number() ? parse_label(std::to_string(label.get<int>()))
                                  : parse_label(label.get<std::string>());
      e.tag = j.value("tag", "");
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& err) {
      throw InvalidInput(manifest.string() + ":" + std::to_string(line_no) + ": " +
                         err.what());
    }
  }
  return entries;
}

void write_manifest(const std::filesystem::path& manifest,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest);
  if (!out) throw InvalidInput("cannot write manifest " + manifest.string());
  for (const auto& e : entries) {
    out << nlohmann::json{{"path", e.path}, {"label", label_name(e.label)}, {"tag", e.tag}}
               .dump()
        << '\n';
  }
}

LabeledDataset load_dataset(const std::filesystem::path& manifest) {
  const auto base = manifest.parent_path();
  LabeledDataset ds;
  for (auto& e : read_manifest(manifest)) {
    std::filesystem::path p(e.path);
    if (p.is_relative()) p = base / p;
    ds.items.push_back({read_image(p), e.label, std::move(e.tag)});
  }
  return ds;
}

std::filesystem::path save_dataset(const LabeledDataset& dataset,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  entries.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "item_%05zu.png", i);
    write_png(dir / name, dataset.items[i].image);
    entries.push_back({name, dataset.items[i].label, dataset.items[i].tag});
  }
  const auto manifest = dir / "manifest.jsonl";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace nqprobe
