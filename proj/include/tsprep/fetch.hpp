#pragma once

// Downloading and unpacking raw source archives into
// <root>/.torchtime/raw/<dataset>/.

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsprep/archive.hpp"
#include "tsprep/cache_store.hpp"
#include "tsprep/datasets.hpp"
#include "tsprep/error.hpp"
#include "tsprep/sha256.hpp"

namespace tsprep::fetch {

namespace fs = std::filesystem;
using archive::ArchiveKind;

struct SourceFile {
  std::string url;
  ArchiveKind kind = ArchiveKind::file;
  std::optional<std::string> sha256;

  std::string filename() const {
    const auto slash = url.find_last_of('/');
    std::string name = slash == std::string::npos ? url : url.substr(slash + 1);
    const auto q = name.find_first_of("?#");
    return q == std::string::npos ? name : name.substr(0, q);
  }
};

struct SourceDescriptor {
  std::string dataset;
  std::vector<SourceFile> files;
  std::string target_subdir;
};

inline constexpr const char* kUeaBase = "https://www.timeseriesclassification.com/aeon-toolkit/";
inline constexpr const char* kPhysionet2012Base = "https://physionet.org/files/challenge-2012/1.0.0/";
inline constexpr const char* kPhysionet2019Base = "https://archive.physionet.org/users/shared/challenge-2019/";

/// Sources of a data set. A non-empty `mirror` replaces every base URL.
inline SourceDescriptor describe(const DatasetId& id, std::string mirror = {}) {
  if (!mirror.empty() && mirror.back() != '/') mirror += '/';
  auto base = [&](const char* official) { return mirror.empty() ? std::string(official) : mirror; };
  SourceDescriptor d{id.raw_key(), {}, id.raw_key()};
  switch (id.kind) {
    case DatasetKind::uea:
      d.files.push_back({base(kUeaBase) + id.uea_name + ".zip", ArchiveKind::zip, {}});
      break;
    case DatasetKind::physionet2012:
      for (const char* set : {"a", "b", "c"}) {
        d.files.push_back({base(kPhysionet2012Base) + "set-" + set + ".tar.gz", ArchiveKind::tar_gz, {}});
        d.files.push_back({base(kPhysionet2012Base) + "Outcomes-" + set + ".txt", ArchiveKind::file, {}});
      }
      break;
    case DatasetKind::physionet2019:
    case DatasetKind::physionet2019_binary:
      for (const char* set : {"A", "B"})
        d.files.push_back({base(kPhysionet2019Base) + "training_set" + set + ".zip", ArchiveKind::zip, {}});
      break;
  }
  return d;
}

inline fs::path raw_root(const fs::path& root) { return cache::cache_root(root) / "raw"; }
inline fs::path raw_dir(const fs::path& root, const DatasetId& id) { return raw_root(root) / id.raw_key(); }

struct Url {
  std::string scheme, host, path;
  int port = 0;

  static Url parse(std::string_view url) {
    Url u;
    const auto sep = url.find("://");
    if (sep == std::string_view::npos) throw ConfigError("bad URL '" + std::string(url) + "'");
    u.scheme = text::lower(url.substr(0, sep));
    if (u.scheme != "http" && u.scheme != "https") throw ConfigError("unsupported URL scheme in '" + std::string(url) + "'");
    auto rest = url.substr(sep + 3);
    const auto slash = rest.find('/');
    auto authority = rest.substr(0, slash);
    u.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    const auto colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
      auto port = text::parse_int<int>(authority.substr(colon + 1));
      if (!port) throw ConfigError("bad port in URL '" + std::string(url) + "'");
      u.port = *port;
      authority = authority.substr(0, colon);
    } else {
      u.port = u.scheme == "https" ? 443 : 80;
    }
    u.host = std::string(authority);
    if (u.host.empty()) throw ConfigError("bad URL '" + std::string(url) + "'");
    return u;
  }

  std::string origin() const { return scheme + "://" + host + ":" + std::to_string(port); }
};

/// Downloads one file into `dir`. A partial `<name>.part` is resumed with a
/// Range request when the server honours it. With an expected SHA-256 the
/// result is verified and removed on mismatch. Existing verified files are kept.
inline fs::path download(const SourceFile& file, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path target = dir / file.filename();
  if (fs::exists(target)) {
    if (!file.sha256 || sha256_file(target) == *file.sha256) return target;
    fs::remove(target);
  }
  const fs::path part = dir / (file.filename() + ".part");
  const Url url = Url::parse(file.url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.scheme == "https") throw NetworkError("built without TLS support; cannot fetch " + file.url);
#endif
  httplib::Client client(url.origin());
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(300);

  const std::uintmax_t have = fs::exists(part) ? fs::file_size(part) : 0;
  httplib::Headers headers;
  if (have > 0) headers.emplace("Range", "bytes=" + std::to_string(have) + "-");

  std::ofstream out;
  int status = 0;
  auto res = client.Get(
      url.path, headers,
      [&](const httplib::Response& r) {
        status = r.status;
        if (r.status == 206) out.open(part, std::ios::binary | std::ios::app);
        else if (r.status == 200) out.open(part, std::ios::binary | std::ios::trunc);
        else return false;
        return static_cast<bool>(out);
      },
      [&](const char* data, std::size_t len) {
        out.write(data, static_cast<std::streamsize>(len));
        return static_cast<bool>(out);
      });
  out.close();
  if (status == 416 && have > 0) {
    // partial file already holds the whole resource
  } else if (status == 200 || status == 206) {
    if (!res) throw NetworkError("GET " + file.url + " interrupted: " + httplib::to_string(res.error()));
  } else if (status != 0) {
    throw NetworkError("GET " + file.url + " returned HTTP " + std::to_string(status));
  } else {
    throw NetworkError("GET " + file.url + " failed: " + httplib::to_string(res.error()));
  }
  fs::rename(part, target);
  if (file.sha256) {
    const auto actual = sha256_file(target);
    if (actual != *file.sha256) {
      fs::remove(target);
      throw ChecksumError("SHA-256 mismatch for " + file.url + ": expected " + *file.sha256 + ", got " + actual);
    }
  }
  return target;
}

/// Downloads and unpacks every file of `desc` under `raw_root/<target_subdir>`.
/// Idempotent: completed downloads and extractions are recorded and skipped.
inline std::vector<fs::path> fetch(const SourceDescriptor& desc, const fs::path& raw_root_dir) {
  if (desc.files.empty()) throw ConfigError("source descriptor for " + desc.dataset + " has no files");
  const fs::path dir = raw_root_dir / desc.target_subdir;
  std::vector<fs::path> out;
  for (const auto& file : desc.files) {
    const fs::path local = download(file, dir);
    if (file.kind == ArchiveKind::file) {
      out.push_back(local);
      continue;
    }
    const fs::path marker = dir / ("." + file.filename() + ".extracted");
    if (fs::exists(marker)) continue;
    auto files = archive::extract(local, file.kind, dir);
    out.insert(out.end(), files.begin(), files.end());
    io::write_file(marker, file.filename() + "\n");
  }
  return out;
}

}  // namespace tsprep::fetch
