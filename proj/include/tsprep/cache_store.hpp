#pragma once

// On-disk cache of the master data set:
//   <root>/.torchtime/<name>/{X.bin, y.bin, length.bin, checksums.txt, meta.json}
// checksums.txt lines are "<sha256-hex>  <file>", checkable with sha256sum -c.

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsprep/error.hpp"
#include "tsprep/sha256.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/tensor_io.hpp"
#include "tsprep/text.hpp"

namespace tsprep::cache {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kCacheDirName = ".torchtime";
inline constexpr std::array<const char*, 3> kBlobs = {"X.bin", "y.bin", "length.bin"};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Identifies a master data set: its name plus every option that changes it.
struct CacheKey {
  std::string name;
  json source_options = json::object();

  /// Stable digest of (name, format version, options) in canonical JSON form.
  std::string digest() const {
    json j = {{"name", name}, {"format_version", kFormatVersion}, {"source_options", source_options}};
    return sha256_hex(j.dump());
  }
};

struct MasterTensors {
  Tensor<double> X;
  Tensor<double> y;
  Tensor<std::int64_t> length;
  json meta;
};

enum class LoadStatus { hit, miss, corrupt };

struct LoadResult {
  LoadStatus status = LoadStatus::miss;
  std::optional<MasterTensors> data;
  std::string detail;  // reason for a miss or corruption
  fs::path file;       // offending file for corruption
};

inline fs::path cache_root(const fs::path& root) { return root / kCacheDirName; }
inline fs::path entry_dir(const fs::path& root, const std::string& name) { return cache_root(root) / name; }

/// "<hex>  <file>" lines for the given files of `dir`, in the given order.
inline std::string checksum_lines(const fs::path& dir, const std::vector<std::string>& files) {
  std::string out;
  for (const auto& f : files) out += sha256_file(dir / f) + "  " + f + "\n";
  return out;
}

/// Parses checksums.txt into (file, hex) pairs.
inline std::vector<std::pair<std::string, std::string>> parse_checksums(std::string_view content) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto line : text::lines(content)) {
    if (text::trim(line).empty()) continue;
    const auto sep = line.find("  ");
    if (sep != 64) throw ParseError("malformed checksum line '" + std::string(line) + "'");
    out.emplace_back(std::string(line.substr(sep + 2)), std::string(line.substr(0, sep)));
  }
  return out;
}

/// Files whose SHA-256 differs from checksums.txt (or are missing).
inline std::vector<std::string> verify_checksums(const fs::path& dir) {
  std::vector<std::string> bad;
  for (const auto& [file, hex] : parse_checksums(io::read_file(dir / "checksums.txt"))) {
    if (!fs::exists(dir / file) || sha256_file(dir / file) != hex) bad.push_back(file);
  }
  return bad;
}

/// Writes an entry into a temporary directory and renames it into place,
/// so a reader sees either the previous entry or the complete new one.
inline fs::path save(const fs::path& root, const CacheKey& key, const Tensor<double>& X, const Tensor<double>& y,
                     const Tensor<std::int64_t>& length, const json& extra_meta = json::object()) {
  std::error_code ec;
  fs::create_directories(cache_root(root), ec);
  if (ec) throw IoError("cannot create cache directory " + cache_root(root).string() + ": " + ec.message());

  std::random_device rd;
  const std::string tag = std::to_string(rd()) + std::to_string(rd());
  const fs::path tmp = cache_root(root) / (".tmp-" + key.name + "-" + tag);
  const fs::path final_dir = entry_dir(root, key.name);
  fs::create_directories(tmp, ec);
  if (ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());

  try {
    io::write_file(tmp / "X.bin", io::encode(X, io::DType::f64));
    io::write_file(tmp / "y.bin", io::encode(y, io::DType::f64));
    io::write_file(tmp / "length.bin", io::encode(length));
    io::write_file(tmp / "checksums.txt", checksum_lines(tmp, {kBlobs.begin(), kBlobs.end()}));
    json meta = extra_meta;
    meta["format_version"] = kFormatVersion;
    meta["dataset"] = key.name;
    meta["created_utc"] = utc_timestamp();
    json options = key.source_options;
    options["key"] = key.digest();
    meta["source_options"] = options;
    io::write_file(tmp / "meta.json", meta.dump(2) + "\n");

    if (fs::exists(final_dir)) {
      const fs::path old = cache_root(root) / (".old-" + key.name + "-" + tag);
      fs::rename(final_dir, old);
      fs::rename(tmp, final_dir);
      fs::remove_all(old, ec);
    } else {
      fs::rename(tmp, final_dir);
    }
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw IoError(std::string("cache save failed: ") + e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
  return final_dir;
}

/// Loads an entry only if every blob matches its recorded SHA-256.
/// An absent or stale entry is a miss; a damaged one is reported as corrupt.
inline LoadResult load(const fs::path& root, const CacheKey& key) {
  const fs::path dir = entry_dir(root, key.name);
  LoadResult r;
  if (!fs::is_directory(dir)) {
    r.detail = "no cache entry at " + dir.string();
    return r;
  }
  auto corrupt = [&](fs::path file, std::string why) {
    r.status = LoadStatus::corrupt;
    r.file = std::move(file);
    r.detail = std::move(why);
    r.data.reset();
    return r;
  };

  json meta;
  try {
    meta = json::parse(io::read_file(dir / "meta.json"));
  } catch (const std::exception& e) {
    return corrupt(dir / "meta.json", std::string("unreadable metadata: ") + e.what());
  }
  if (meta.value("format_version", -1) != kFormatVersion) {
    r.detail = "cache format version differs";
    return r;
  }
  if (!meta.contains("source_options") || meta["source_options"].value("key", "") != key.digest()) {
    r.detail = "cache entry was built with different source options";
    return r;
  }

  std::vector<std::pair<std::string, std::string>> sums;
  try {
    sums = parse_checksums(io::read_file(dir / "checksums.txt"));
  } catch (const std::exception& e) {
    return corrupt(dir / "checksums.txt", e.what());
  }
  MasterTensors data;
  for (const char* blob : kBlobs) {
    auto it = std::find_if(sums.begin(), sums.end(), [&](const auto& p) { return p.first == blob; });
    if (it == sums.end()) return corrupt(dir / "checksums.txt", std::string("no checksum for ") + blob);
    std::string bytes;
    try {
      bytes = io::read_file(dir / blob);
    } catch (const IoError& e) {
      return corrupt(dir / blob, e.what());
    }
    if (sha256_hex(bytes) != it->second) return corrupt(dir / blob, std::string("SHA-256 mismatch for ") + blob);
    try {
      if (std::string_view(blob) == "X.bin") data.X = io::decode_real(bytes);
      else if (std::string_view(blob) == "y.bin") data.y = io::decode_real(bytes);
      else data.length = io::decode_int(bytes);
    } catch (const Error& e) {
      return corrupt(dir / blob, e.what());
    }
  }
  if (data.X.rank() != 3 || data.y.rank() < 1 || data.length.rank() != 1 || data.y.dim(0) != data.X.dim(0) ||
      data.length.dim(0) != data.X.dim(0))
    return corrupt(dir, "inconsistent tensor shapes");
  data.meta = std::move(meta);
  r.status = LoadStatus::hit;
  r.data = std::move(data);
  return r;
}

}  // namespace tsprep::cache
