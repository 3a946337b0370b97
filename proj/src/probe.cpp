#include "nqprobe/probe.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nqprobe/error.hpp"
#include "nqprobe/parallel.hpp"
#include "nqprobe/rng.hpp"

namespace nqprobe {

double sigma_to_levels(double sigma, SigmaUnits units) {
  return units == SigmaUnits::kNormalized ? sigma * kLevelCount : sigma;
}

SigmaUnits parse_sigma_units(const std::string& name) {
  if (name == "levels") return SigmaUnits::kLevels;
  if (name == "normalized") return SigmaUnits::kNormalized;
  throw InvalidInput("sigma units must be 'levels' or 'normalized', got '" +
                     name + "'");
}

void ProbeConfig::validate() const {
  if (!(sigma_levels > 0.0) || !std::isfinite(sigma_levels)) {
    throw InvalidConfig("sigma_levels must be a positive finite number");
  }
  if (replicas < 1) throw InvalidConfig("replicas must be at least 1");
}

std::uint64_t replica_seed(std::uint64_t master_seed, int replica) noexcept {
  return derive_seed(master_seed, static_cast<std::uint64_t>(replica));
}

namespace {

struct RowScratch {
  std::vector<double> base;
  explicit RowScratch(std::size_t n) : base(n) {}
};

// Adds one replica's quantized row into `acc`. Every (replica, row) pair owns
// its noise stream, so rows can be processed in any order; integer sums make
// the result independent of accumulation order.
//
// Clipped mode evaluates clamp(floor(x + 1/2), 0, 255) as
// int(clamp(x + 3/2, 1, 256)) - 1, which equals round-half-away on every
// value that survives the clamp (negative ties all land on 0).
void accumulate_row(const double* base, std::size_t n, double sigma, std::uint64_t seed,
                    std::size_t row, bool clip, std::int64_t* acc) {
  Xoshiro256pp rng(derive_seed(seed, row));
  const ZigguratNormal normal;
  if (clip) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::clamp(base[i] + sigma * normal(rng), 1.0, 256.0);
      acc[i] += static_cast<std::int32_t>(v) - 1;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += static_cast<std::int64_t>(round_half_away(base[i] + sigma * normal(rng)));
    }
  }
}

// Loads a row of I (plus 3/2 when clipping) into the scratch buffer.
void load_row(const ImageBuffer& image, std::size_t row, bool clip, RowScratch& scratch) {
  const std::size_t n = image.width() * ImageBuffer::kChannels;
  const std::size_t offset = row * n;
  const double shift = clip ? 1.5 : 0.0;
  for (std::size_t i = 0; i < n; ++i) scratch.base[i] = image.value(offset + i) + shift;
}

void require_nonempty(const ImageBuffer& image) {
  if (image.empty()) throw InvalidInput("image has zero pixels");
}

}  // namespace

QuantizedImage add_noise_quantize(const ImageBuffer& image, double sigma_levels,
                                  std::uint64_t replica_seed, bool clip) {
  require_nonempty(image);
  if (!(sigma_levels > 0.0)) throw InvalidConfig("sigma_levels must be positive");
  QuantizedImage out{image.height(), image.width(),
                     std::vector<std::int32_t>(image.size())};
  const std::size_t n = image.width() * ImageBuffer::kChannels;
  std::vector<std::int64_t> acc(n);
  RowScratch scratch(n);
  for (std::size_t row = 0; row < image.height(); ++row) {
    std::fill(acc.begin(), acc.end(), 0);
    load_row(image, row, clip, scratch);
    accumulate_row(scratch.base.data(), n, sigma_levels, replica_seed, row, clip, acc.data());
    for (std::size_t i = 0; i < n; ++i) {
      out.data[row * n + i] = static_cast<std::int32_t>(acc[i]);
    }
  }
  return out;
}

ProbeResult run_probe(const ImageBuffer& image, const ProbeConfig& config,
                      unsigned threads) {
  config.validate();
  require_nonempty(image);

  const std::size_t n = image.width() * ImageBuffer::kChannels;
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.replicas));
  for (int r = 0; r < config.replicas; ++r) seeds[r] = replica_seed(config.master_seed, r);

  ProbeResult result;
  result.restored.resize(image.size());
  result.delta.height = image.height();
  result.delta.width = image.width();
  result.delta.config = config;
  result.delta.data.resize(image.size());

  const double replicas = static_cast<double>(config.replicas);
  parallel_for(image.height(), threads, [&](std::size_t row) {
    std::vector<std::int64_t> acc(n, 0);
    RowScratch scratch(n);
    load_row(image, row, config.clip, scratch);
    for (const std::uint64_t seed : seeds) {
      accumulate_row(scratch.base.data(), n, config.sigma_levels, seed, row, config.clip,
                     acc.data());
    }
    const std::size_t offset = row * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double restored = static_cast<double>(acc[i]) / replicas;
      result.restored[offset + i] = restored;
      result.delta.data[offset + i] = image.value(offset + i) - restored;
    }
  });
  return result;
}

DeltaStats probe_statistics(const DifferenceMap& delta) {
  if (delta.empty()) throw InvalidInput("difference map is empty");
  DeltaStats stats;
  std::array<double, 3> sum{};
  std::array<double, 3> sum_sq{};
  double abs_sum = 0.0;
  std::array<std::size_t, DeltaStats::kHistogramBins> counts{};
  std::size_t under = 0;
  std::size_t over = 0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double v = delta.data[i];
    sum[i % 3] += v;
    sum_sq[i % 3] += v * v;
    abs_sum += std::fabs(v);
    const double shifted = std::floor(v + 32.5);
    if (shifted < 0.0) {
      ++under;
    } else if (shifted >= DeltaStats::kHistogramBins) {
      ++over;
    } else {
      ++counts[static_cast<std::size_t>(shifted)];
    }
  }
  const double per_channel = static_cast<double>(delta.size() / 3);
  const double total = static_cast<double>(delta.size());
  double all = 0.0;
  for (int c = 0; c < 3; ++c) {
    stats.channel_mean[c] = sum[c] / per_channel;
    const double var = sum_sq[c] / per_channel - stats.channel_mean[c] * stats.channel_mean[c];
    stats.channel_std[c] = std::sqrt(std::max(var, 0.0));
    all += sum[c];
  }
  stats.mean = all / total;
  stats.mean_abs = abs_sum / total;
  for (int b = 0; b < DeltaStats::kHistogramBins; ++b) {
    stats.histogram[b] = static_cast<double>(counts[b]) / total;
  }
  stats.underflow = static_cast<double>(under) / total;
  stats.overflow = static_cast<double>(over) / total;
  return stats;
}

namespace {

constexpr int kDmapVersion = 1;

void write_le_f32(std::ostream& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  unsigned char bytes[4];
  for (int k = 0; k < 4; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

void write_dmap(const std::filesystem::path& path, const DifferenceMap& delta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  const nlohmann::json header = {
      {"height", delta.height},
      {"width", delta.width},
      {"sigma_levels", delta.config.sigma_levels},
      {"replicas", delta.config.replicas},
      {"seed", delta.config.master_seed},
      {"clip", delta.config.clip},
      {"version", kDmapVersion},
  };
  out << header.dump() << '\n';
  for (double v : delta.data) write_le_f32(out, static_cast<float>(v));
  if (!out) throw InvalidInput("write failed: " + path.string());
}

DifferenceMap read_dmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad .dmap header: ") + e.what());
  }
  if (header.value("version", 0) != kDmapVersion) {
    throw InvalidInput("unsupported .dmap version");
  }
  DifferenceMap delta;
  delta.height = header.at("height").get<std::size_t>();
  delta.width = header.at("width").get<std::size_t>();
  delta.config.sigma_levels = header.at("sigma_levels").get<double>();
  delta.config.replicas = header.at("replicas").get<int>();
  delta.config.master_seed = header.at("seed").get<std::uint64_t>();
  delta.config.clip = header.at("clip").get<bool>();
  const std::size_t count = delta.height * delta.width * 3;
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw InvalidInput("truncated .dmap payload: " + path.string());
  }
  delta.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= std::uint32_t{raw[4 * i + k]} << (8 * k);
    delta.data[i] = std::bit_cast<float>(bits);
  }
  return delta;
}

std::vector<std::uint8_t> visualize(const DifferenceMap& delta, double gain) {
  std::vector<std::uint8_t> out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double v = std::clamp(128.0 + gain * delta.data[i], 0.0, 255.0);
    out[i] = static_cast<std::uint8_t>(round_half_away(v));
  }
  return out;
}

}  // namespace nqprobe
