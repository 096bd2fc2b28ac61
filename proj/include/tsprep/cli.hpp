#pragma once

// Command-line front end: fetch, prepare, export, info and validate.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.
// fetch additionally reports 3 (network), 4 (checksum mismatch) and
// 5 (archive or file system).

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsprep/cache_store.hpp"
#include "tsprep/datasets.hpp"
#include "tsprep/error.hpp"
#include "tsprep/fetch.hpp"
#include "tsprep/pipeline.hpp"
#include "tsprep/sha256.hpp"
#include "tsprep/tensor_io.hpp"
#include "tsprep/text.hpp"

#ifndef TSPREP_VERSION
#define TSPREP_VERSION "0.1.0"
#endif

namespace tsprep::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNetwork = 3;
inline constexpr int kExitChecksum = 4;
inline constexpr int kExitArchive = 5;

inline constexpr std::array<const char*, 3> kTensorNames = {"X", "y", "length"};

/// Canonical JSON text: sorted keys, two-space indent, trailing LF.
inline std::string canonical(const json& j) { return j.dump(2) + "\n"; }

inline std::string tensor_file(const std::string& tensor, Split split, const std::string& ext) {
  return tensor + "_" + std::string(to_string(split)) + ext;
}

// ---------------------------------------------------------------------------
// Option parsing helpers

inline double option_double(std::string_view flag, std::string_view s) {
  if (auto v = text::parse_double(s)) return *v;
  throw ConfigError(std::string(flag) + ": '" + std::string(s) + "' is not a number");
}

inline std::size_t option_channel(std::string_view flag, std::string_view s) {
  if (auto v = text::parse_int<std::size_t>(s)) return *v;
  throw ConfigError(std::string(flag) + ": '" + std::string(s) + "' is not a channel index");
}

inline MissingSpec parse_missing(const std::string& s) {
  const auto parts = text::split(s, ',');
  std::vector<double> values;
  for (auto p : parts) values.push_back(option_double("--missing", p));
  if (values.empty()) throw ConfigError("--missing needs a value");
  if (parts.size() == 1) return MissingSpec(values.front());
  return MissingSpec(std::move(values));
}

inline std::set<std::size_t> parse_channel_list(const std::string& s) {
  std::set<std::size_t> out;
  for (auto p : text::split(s, ',')) {
    if (text::trim(p).empty()) continue;
    out.insert(option_channel("--categorical", p));
  }
  return out;
}

/// "k=v,k=v" pairs.
inline std::map<std::size_t, double> parse_channel_means(const std::string& s) {
  std::map<std::size_t, double> out;
  for (auto p : text::split(s, ',')) {
    p = text::trim(p);
    if (p.empty()) continue;
    const auto eq = p.find_first_of("=:");
    if (eq == std::string_view::npos) throw ConfigError("--channel-means expects channel=value pairs, got '" + std::string(p) + "'");
    out[option_channel("--channel-means", p.substr(0, eq))] = option_double("--channel-means", p.substr(eq + 1));
  }
  return out;
}

/// Digest of every field that changes the prepared tensors.
inline std::string config_digest(const PipelineConfig& config, std::uint64_t seed) {
  json j = config.to_json();
  for (const char* k : {"path", "threads", "download", "overwrite_cache", "split"}) j.erase(k);
  j["seed"] = seed;
  return sha256_hex(j.dump()).substr(0, 16);
}

inline fs::path prepared_dir(const fs::path& root, const PipelineConfig& config, std::uint64_t seed) {
  return cache::cache_root(root) / "prepared" / (config.dataset.key() + "-" + config_digest(config, seed));
}

// ---------------------------------------------------------------------------
// Entries: a directory of per-split tensor files described by manifest.json

inline json read_manifest(const fs::path& dir) {
  const fs::path file = dir / "manifest.json";
  if (!fs::exists(file)) throw ConfigError("no manifest.json in " + dir.string());
  try {
    return json::parse(io::read_file(file));
  } catch (const json::exception& e) {
    throw Error("unreadable manifest " + file.string() + ": " + e.what());
  }
}

/// Writes the dataset's per-split tensors in tsbin f64 and a manifest.
inline json write_entry(const Dataset& dataset, const PipelineConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  json files = json::object();
  json splits = json::object();
  for (auto split : kAllSplits) {
    splits[std::string(to_string(split))] = dataset.size(split);
    const auto& len = dataset.length(split);
    Tensor<std::int64_t> length({len.size()}, std::vector<std::int64_t>(len.begin(), len.end()));
    const std::map<std::string, std::string> blobs = {
        {tensor_file("X", split, ".bin"), io::encode(dataset.X(split).tensor(), io::DType::f64)},
        {tensor_file("y", split, ".bin"), io::encode(dataset.y(split), io::DType::f64)},
        {tensor_file("length", split, ".bin"), io::encode(length)}};
    for (const auto& [name, bytes] : blobs) {
      io::write_file(dir / name, bytes);
      files[name] = sha256_hex(bytes);
    }
  }
  json channels = json::array();
  for (const auto& ch : dataset.layout().channels())
    channels.push_back({{"name", ch.name}, {"kind", std::string(to_string(ch.kind))}, {"source", ch.source}});
  json manifest = {{"dataset", dataset.name},
                   {"config", config.to_json()},
                   {"seed", dataset.seed},
                   {"splits", splits},
                   {"channels", channels},
                   {"files", files},
                   {"format", "tsbin"},
                   {"dtype", "f64"},
                   {"target", dataset.target == TargetKind::per_step ? "per_step" : "sequence"},
                   {"warnings", dataset.warnings},
                   {"tool_version", TSPREP_VERSION},
                   {"created_utc", cache::utc_timestamp()}};
  io::write_file(dir / "manifest.json", canonical(manifest));
  return manifest;
}

/// Per-channel fraction of NaN over the valid (unpadded) steps of every split.
inline std::vector<double> missingness(const fs::path& dir, std::size_t channels) {
  std::vector<std::uint64_t> missing(channels, 0);
  std::uint64_t steps = 0;
  for (auto split : kAllSplits) {
    const fs::path xf = dir / tensor_file("X", split, ".bin");
    const fs::path lf = dir / tensor_file("length", split, ".bin");
    if (!fs::exists(xf) || !fs::exists(lf)) continue;
    const auto X = io::decode_real(io::read_file(xf));
    const auto length = io::decode_int(io::read_file(lf));
    if (X.rank() != 3 || X.dim(2) != channels) throw Error(xf.string() + " does not match the manifest channels");
    for (std::size_t i = 0; i < X.dim(0); ++i)
      for (std::size_t t = 0; t < static_cast<std::size_t>(length(i)); ++t, ++steps)
        for (std::size_t c = 0; c < channels; ++c)
          if (std::isnan(X(i, t, c))) ++missing[c];
  }
  std::vector<double> out(channels, 0.0);
  if (steps)
    for (std::size_t c = 0; c < channels; ++c) out[c] = double(missing[c]) / double(steps);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

inline int cmd_fetch(const std::string& dataset, const fs::path& root, const std::string& mirror, Streams io) {
  const auto id = DatasetId::parse(dataset);
  const auto desc = fetch::describe(id, mirror);
  const auto files = fetch::fetch(desc, fetch::raw_root(root));
  io.out << "fetched " << id.raw_key() << " into " << fetch::raw_dir(root, id).string() << " (" << files.size()
         << " new files)\n";
  return kExitOk;
}

inline int cmd_prepare(PipelineConfig config, const std::string& mirror, const std::optional<fs::path>& out_dir,
                       Streams io) {
  config.validate();
  if (!mirror.empty() && config.download) {
    const fs::path raw = fetch::raw_dir(config.path, config.dataset);
    if (!fs::is_directory(raw) || fs::is_empty(raw))
      fetch::fetch(fetch::describe(config.dataset, mirror), fetch::raw_root(config.path));
  }
  const Dataset dataset = build(config);
  const fs::path dir = out_dir ? *out_dir : prepared_dir(config.path, config, dataset.seed);
  write_entry(dataset, config, dir);
  for (const auto& w : dataset.warnings) io.err << "warning: " << w << "\n";
  io.out << "prepared " << dataset.name << " -> " << dir.string() << "\n";
  io.out << "splits train=" << dataset.size(Split::train) << " val=" << dataset.size(Split::val)
         << " test=" << dataset.size(Split::test) << " channels=" << dataset.layout().size() << "\n";
  return kExitOk;
}

inline int cmd_export(const fs::path& entry, const std::string& format, const std::string& dtype_name,
                      const fs::path& out_dir, Streams io) {
  if (format != "tsbin" && format != "npy") throw ConfigError("unknown format '" + format + "' (expected tsbin or npy)");
  const io::DType dtype = io::parse_dtype(dtype_name);
  if (dtype == io::DType::i64) throw ConfigError("--dtype must be f32 or f64");
  json manifest = read_manifest(entry);
  if (manifest.value("format", "") != "tsbin" || manifest.value("dtype", "") != "f64")
    throw ConfigError(entry.string() + " is not a prepared f64 entry");
  if (fs::exists(out_dir) && fs::equivalent(out_dir, entry)) throw ConfigError("--out must differ from the entry");
  fs::create_directories(out_dir);
  const std::string ext = format == "npy" ? ".npy" : ".bin";
  json files = json::object();
  for (auto split : kAllSplits) {
    for (const char* tensor : kTensorNames) {
      const std::string src = tensor_file(tensor, split, ".bin");
      const std::string bytes_in = io::read_file(entry / src);
      if (manifest["files"].value(src, "") != sha256_hex(bytes_in)) throw ChecksumError("checksum mismatch for " + src);
      std::string bytes;
      if (std::string_view(tensor) == "length") {
        const auto t = io::decode_int(bytes_in);
        bytes = format == "npy" ? io::encode_npy(t) : io::encode(t);
      } else {
        const auto t = io::decode_real(bytes_in);
        bytes = format == "npy" ? io::encode_npy(t, dtype) : io::encode(t, dtype);
      }
      const std::string dst = tensor_file(tensor, split, ext);
      io::write_file(out_dir / dst, bytes);
      files[dst] = sha256_hex(bytes);
    }
  }
  manifest["files"] = files;
  manifest["format"] = format;
  manifest["dtype"] = dtype_name;
  manifest["created_utc"] = cache::utc_timestamp();
  io::write_file(out_dir / "manifest.json", canonical(manifest));
  io.out << "exported " << manifest.value("dataset", "") << " as " << format << "/" << dtype_name << " -> "
         << out_dir.string() << "\n";
  return kExitOk;
}

inline int cmd_info(const fs::path& entry, Streams io) {
  const json manifest = read_manifest(entry);
  io.out << "dataset: " << manifest.value("dataset", "") << "\n";
  io.out << "format: " << manifest.value("format", "") << " " << manifest.value("dtype", "") << "\n";
  io.out << "seed: " << manifest.value("seed", std::uint64_t{0}) << "\n";
  io.out << "splits:";
  for (auto split : kAllSplits) io.out << " " << to_string(split) << "=" << manifest["splits"].value(std::string(to_string(split)), 0);
  io.out << "\n";
  for (const auto& [name, hex] : manifest["files"].items()) {
    if (!name.ends_with(".bin")) continue;
    const auto header = io::decode_header(io::read_file(entry / name));
    io.out << "  " << name << ": " << io::dtype_name(header.dtype) << " " << shape_string(header.shape) << "\n";
  }
  const auto& channels = manifest["channels"];
  std::vector<double> rates;
  if (manifest.value("format", "") == "tsbin" && manifest.value("dtype", "") == "f64")
    rates = missingness(entry, channels.size());
  io.out << "channels (" << channels.size() << "):\n";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    io.out << "  " << std::setw(3) << c << " " << channels[c].value("name", "") << " ["
           << channels[c].value("kind", "") << "]";
    if (!rates.empty()) io.out << " missing=" << std::fixed << std::setprecision(4) << rates[c] << std::defaultfloat;
    io.out << "\n";
  }
  return kExitOk;
}

inline int cmd_validate(const fs::path& entry, Streams io) {
  std::vector<std::string> bad;
  if (fs::exists(entry / "manifest.json")) {
    const json manifest = read_manifest(entry);
    for (const auto& [name, hex] : manifest["files"].items())
      if (!fs::exists(entry / name) || sha256_file(entry / name) != hex.get<std::string>()) bad.push_back(name);
  } else if (fs::exists(entry / "checksums.txt")) {
    bad = cache::verify_checksums(entry);
  } else {
    throw ConfigError(entry.string() + " has neither manifest.json nor checksums.txt");
  }
  if (!bad.empty()) {
    for (const auto& f : bad) io.err << "checksum mismatch: " << (entry / f).string() << "\n";
    return kExitFailure;
  }
  io.out << "ok " << entry.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point

/// Runs the tool on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time series dataset preparation", "tsprep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TSPREP_VERSION);
  Streams io{out, err};

  std::string dataset, mirror;
  std::string root = ".";
  auto add_path = [&](CLI::App* sub) {
    sub->add_option("--path", root, "Cache root (default: current directory)")->envname("TSPREP_CACHE");
  };

  auto* fetch_cmd = app.add_subcommand("fetch", "Download and unpack raw sources");
  fetch_cmd->add_option("dataset", dataset, "Data set name")->required();
  add_path(fetch_cmd);
  fetch_cmd->add_option("--mirror", mirror, "Base URL replacing the official source");

  auto* prep = app.add_subcommand("prepare", "Build a dataset and write a prepared entry");
  prep->add_option("dataset", dataset, "Data set name")->required();
  double train_prop = 0.0;
  std::optional<double> val_prop;
  std::optional<std::uint64_t> seed;
  std::string split = "train", missing = "0", impute = "none", categorical, channel_means;
  bool time = true, mask = false, delta = false, standardise = false, overwrite = false, no_download = false;
  unsigned threads = 1;
  std::string out_dir;
  prep->add_option("--train-prop", train_prop, "Training proportion")->required();
  prep->add_option("--val-prop", val_prop, "Validation proportion");
  prep->add_option("--split", split, "Split bound to X/y/length")->check(CLI::IsMember({"train", "val", "test"}));
  prep->add_option("--missing", missing, "Proportion to drop: p or p1,p2,... per channel");
  prep->add_option("--impute", impute, "none, zero, mean or forward");
  prep->add_option("--categorical", categorical, "Categorical channels, e.g. 3,4");
  prep->add_option("--channel-means", channel_means, "Fill overrides, e.g. 20=0,3=1.5");
  prep->add_flag("--time,!--no-time", time, "Prepend the time stamp channel");
  prep->add_flag("--mask", mask, "Append observational mask channels");
  prep->add_flag("--delta", delta, "Append time delta channels");
  prep->add_flag("--standardise", standardise, "Standardise data channels");
  prep->add_flag("--overwrite-cache", overwrite, "Rebuild the cached master data set");
  add_path(prep);
  prep->add_option("--seed", seed, "Random seed");
  prep->add_option("--threads", threads, "Parser threads")->check(CLI::PositiveNumber);
  prep->add_flag("--no-download", no_download, "Fail instead of downloading missing sources");
  prep->add_option("--mirror", mirror, "Base URL replacing the official source");
  prep->add_option("--out", out_dir, "Entry directory (default: <path>/.torchtime/prepared/...)");

  auto* exp = app.add_subcommand("export", "Convert a prepared entry");
  std::string entry, format = "tsbin", dtype = "f32";
  exp->add_option("entry", entry, "Prepared entry directory")->required();
  exp->add_option("--format", format, "tsbin or npy");
  exp->add_option("--dtype", dtype, "f32 or f64 for X and y");
  exp->add_option("--out", out_dir, "Output directory")->required();

  auto* info = app.add_subcommand("info", "Describe a prepared entry");
  info->add_option("entry", entry, "Entry directory")->required();

  auto* val = app.add_subcommand("validate", "Re-check SHA-256 of an entry or cache directory");
  val->add_option("entry", entry, "Entry or cache directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitUsage;
  }

  try {
    if (*fetch_cmd) return cmd_fetch(dataset, root, mirror, io);
    if (*prep) {
      PipelineConfig config;
      config.dataset = DatasetId::parse(dataset);
      config.split = parse_split(split);
      config.train_prop = train_prop;
      config.val_prop = val_prop;
      config.missing = parse_missing(missing);
      config.impute = ImputeMethod::parse(impute);
      config.categorical = parse_channel_list(categorical);
      config.channel_means = parse_channel_means(channel_means);
      config.time = time;
      config.mask = mask;
      config.delta = delta;
      config.standardise = standardise;
      config.overwrite_cache = overwrite;
      config.path = root;
      config.seed = seed;
      config.threads = threads;
      config.download = !no_download;
      return cmd_prepare(std::move(config), mirror,
                         out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir), io);
    }
    if (*exp) return cmd_export(entry, format, dtype, out_dir, io);
    if (*info) return cmd_info(entry, io);
    if (*val) return cmd_validate(entry, io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NetworkError& e) {
    err << "error: " << e.what() << "\n";
    return *fetch_cmd ? kExitNetwork : kExitFailure;
  } catch (const ChecksumError& e) {
    err << "error: " << e.what() << "\n";
    return *fetch_cmd ? kExitChecksum : kExitFailure;
  } catch (const ArchiveError& e) {
    err << "error: " << e.what() << "\n";
    return *fetch_cmd ? kExitArchive : kExitFailure;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return *fetch_cmd ? kExitArchive : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tsprep::cli
