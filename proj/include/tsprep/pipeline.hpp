#pragma once

// Builds a Dataset from raw sources in a fixed order:
//   1. cache check            5. stratified split
//   2. ingest + cache on miss 6. standardise
//   3. simulate missing data  7. impute
//   4. time/mask/delta        8. bind X/y/length to the requested split

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsprep/batching.hpp"
#include "tsprep/cache_store.hpp"
#include "tsprep/datasets.hpp"
#include "tsprep/error.hpp"
#include "tsprep/fetch.hpp"
#include "tsprep/parallel.hpp"
#include "tsprep/physionet.hpp"
#include "tsprep/rng.hpp"
#include "tsprep/splits.hpp"
#include "tsprep/tensor_core.hpp"
#include "tsprep/transforms.hpp"
#include "tsprep/ts_format.hpp"

namespace tsprep {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct PipelineConfig {
  DatasetId dataset;
  Split split = Split::train;
  double train_prop = 0.0;
  std::optional<double> val_prop;
  MissingSpec missing;
  ImputeMethod impute;
  /// Master channel numbering: 0 is the time stamp, data channels start at 1.
  std::set<std::size_t> categorical;
  std::map<std::size_t, double> channel_means;
  bool time = true;
  bool mask = false;
  bool delta = false;
  bool standardise = false;
  bool overwrite_cache = false;
  fs::path path = ".";
  std::optional<std::uint64_t> seed;
  /// Parser threads; output does not depend on it.
  unsigned threads = 1;
  /// Fetch raw sources when they are not on disk.
  bool download = true;

  void validate() const {
    SplitSpec{train_prop, val_prop, seed}.validate();
    if (split == Split::test && !val_prop) throw ConfigError("split 'test' requires val_prop");
    if (dataset.is_physionet() && !missing.is_zero())
      throw ConfigError("missing data simulation is only available for UEA & UCR data sets");
    if (threads == 0) throw ConfigError("threads must be >= 1");
  }

  json to_json() const {
    json j;
    j["dataset"] = dataset.kind == DatasetKind::uea ? dataset.uea_name : dataset.key();
    j["split"] = std::string(to_string(split));
    j["train_prop"] = train_prop;
    j["val_prop"] = val_prop ? json(*val_prop) : json(nullptr);
    j["missing"] = missing.is_scalar() ? json(missing.scalar()) : json(missing.per_channel());
    j["impute"] = impute.name();
    j["categorical"] = json(std::vector<std::size_t>(categorical.begin(), categorical.end()));
    json means = json::object();
    for (const auto& [k, v] : channel_means) means[std::to_string(k)] = v;
    j["channel_means"] = means;
    j["time"] = time;
    j["mask"] = mask;
    j["delta"] = delta;
    j["standardise"] = standardise;
    j["overwrite_cache"] = overwrite_cache;
    j["path"] = path.string();
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["threads"] = threads;
    j["download"] = download;
    return j;
  }
};

/// Master data set: every sequence of every source file, channel 0 = time stamp.
struct MasterData {
  PaddedTensor3 X;
  Tensor<double> y;
  Lengths length;
  std::vector<std::string> channel_names;
  std::vector<std::string> warnings;
};

/// Properties that follow from the data set kind.
struct DatasetTraits {
  TargetKind target = TargetKind::sequence;
  /// Whether the time stamp is itself a recorded channel with mask/delta.
  bool time_is_observed = false;
  std::set<std::size_t> default_categorical;
  std::map<std::size_t, double> default_channel_means;

  static DatasetTraits of(const DatasetId& id) {
    DatasetTraits t;
    switch (id.kind) {
      case DatasetKind::uea: break;
      case DatasetKind::physionet2012:
        t.time_is_observed = true;
        t.default_categorical = {physionet::kMechVent2012, physionet::kGender2012};
        for (std::size_t k = 0; k < 4; ++k) t.default_categorical.insert(physionet::kIcuTypeFirst2012 + k);
        t.default_channel_means = {{physionet::kMechVent2012, 0.0}};
        break;
      case DatasetKind::physionet2019:
        t.target = TargetKind::per_step;
        t.time_is_observed = true;
        break;
      case DatasetKind::physionet2019_binary: t.time_is_observed = true; break;
    }
    return t;
  }
};

/// Stratum per sequence: class index, binary outcome, or ever-septic for per-step targets.
inline std::vector<std::int64_t> strata_of(const Tensor<double>& y, TargetKind target) {
  std::vector<std::int64_t> out(y.dim(0));
  const std::size_t cols = y.rank() == 2 ? y.dim(1) : 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = y.values().subspan(i * cols, cols);
    if (target == TargetKind::per_step) {
      out[i] = std::any_of(row.begin(), row.end(), [](double v) { return v == 1.0; }) ? 1 : 0;
    } else if (cols == 1) {
      out[i] = static_cast<std::int64_t>(row[0]);
    } else {
      out[i] = static_cast<std::int64_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
  }
  return out;
}

namespace ingest {

inline std::vector<fs::path> find_files(const fs::path& dir, auto predicate) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && predicate(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// Numeric-aware ordering so record ids sort as integers.
inline bool id_less(const std::string& a, const std::string& b) {
  return a.size() != b.size() ? a.size() < b.size() : a < b;
}

inline MasterData uea(const fs::path& dir, const std::string& name, unsigned threads) {
  auto locate = [&](const std::string& suffix) {
    auto files = find_files(dir, [&](const fs::path& p) { return text::iequals(p.filename().string(), name + suffix); });
    if (files.empty()) throw IoError("cannot find " + name + suffix + " under " + dir.string());
    return files.front();
  };
  const std::vector<std::pair<fs::path, ts::SourceFile>> sources = {{locate("_TRAIN.ts"), ts::SourceFile::train_file},
                                                                    {locate("_TEST.ts"), ts::SourceFile::test_file}};
  auto parsed = parallel_map(sources, threads, [](const auto& src) {
    try {
      return ts::parse_ts_file(io::read_file(src.first), src.second);
    } catch (const ParseError& e) {
      throw ParseError(src.first.filename().string() + ": " + e.what());
    }
  });
  const ts::TsHeader& header = parsed[0].header;
  if (!header.has_class_label) throw ParseError(name + " is not a classification problem");
  if (parsed[1].header.class_labels != header.class_labels)
    throw ParseError(name + ": train and test files declare different class labels");
  auto pool = ts::merge_train_test(std::move(parsed[0].series), std::move(parsed[1].series));
  if (pool.empty()) throw ParseError(name + ": no series");

  const std::size_t D = pool.front().channels.size();
  std::vector<Tensor<double>> series;
  std::vector<std::vector<double>> times;
  MasterData m;
  m.y = Tensor<double>({pool.size(), header.class_labels.size()}, 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& s = pool[i];
    if (s.length() == 0) throw ParseError(name + ": empty series " + std::to_string(i));
    Tensor<double> t({s.length(), D});
    for (std::size_t step = 0; step < s.length(); ++step)
      for (std::size_t d = 0; d < D; ++d) t(step, d) = s.channels[d][step];
    series.push_back(std::move(t));
    m.y(i, *header.label_index(s.label)) = 1.0;
  }
  auto [X, length] = pad_to_longest(series);
  m.X = append_time_channel(X, length);
  m.length = std::move(length);
  m.channel_names.push_back("time");
  for (std::size_t d = 0; d < D; ++d) m.channel_names.push_back("channel_" + std::to_string(d + 1));
  return m;
}

inline MasterData from_records(std::vector<physionet::PatientRecord> records, Tensor<double> y,
                               std::vector<std::string> channel_names, std::string time_name) {
  std::vector<Tensor<double>> wide;
  for (const auto& r : records) wide.push_back(physionet::to_wide(r));
  MasterData m;
  auto [X, length] = pad_to_longest(wide);
  m.X = std::move(X);
  m.length = std::move(length);
  m.y = std::move(y);
  m.channel_names.push_back(std::move(time_name));
  for (auto& n : channel_names) m.channel_names.push_back(std::move(n));
  return m;
}

inline MasterData physionet2012(const fs::path& dir, unsigned threads) {
  auto files = find_files(dir, [](const fs::path& p) {
    return p.extension() == ".txt" && p.parent_path().filename().string().rfind("set-", 0) == 0;
  });
  auto outcome_files = find_files(dir, [](const fs::path& p) { return p.filename().string().rfind("Outcomes-", 0) == 0; });
  if (files.empty()) throw IoError("no PhysioNet 2012 record files under " + dir.string());
  if (outcome_files.empty()) throw IoError("no PhysioNet 2012 Outcomes-*.txt files under " + dir.string());

  std::map<std::string, int> outcomes;
  for (const auto& f : outcome_files)
    for (const auto& [id, label] : physionet::parse_outcomes_2012(io::read_file(f)))
      if (!outcomes.emplace(id, label).second) throw ParseError("duplicate record id " + id + " in " + f.string());

  auto records = parallel_map(files, threads, [](const fs::path& f) {
    try {
      return physionet::parse_patient_2012(io::read_file(f));
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ": " + e.what());
    }
  });
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return id_less(a.record_id, b.record_id); });
  for (std::size_t k = 1; k < records.size(); ++k)
    if (records[k].record_id == records[k - 1].record_id) throw ParseError("duplicate record " + records[k].record_id);

  std::size_t dropped = 0;
  std::vector<physionet::PatientRecord> kept;
  for (auto& r : records) {
    if (r.rows() == 0) {
      ++dropped;
      continue;
    }
    if (!outcomes.count(r.record_id)) throw ParseError("no outcome for record " + r.record_id);
    kept.push_back(std::move(r));
  }
  if (kept.empty()) throw ParseError("no PhysioNet 2012 records with time series data");
  Tensor<double> y({kept.size(), 1});
  for (std::size_t i = 0; i < kept.size(); ++i) y(i, 0) = outcomes.at(kept[i].record_id);
  auto names = kept.front().channel_names;
  auto m = from_records(std::move(kept), std::move(y), std::move(names), std::string(physionet::kChannels2012[0]));
  if (dropped) m.warnings.push_back("dropped " + std::to_string(dropped) + " records with no time series rows");
  return m;
}

inline MasterData physionet2019(const fs::path& dir, unsigned threads, bool binary) {
  auto files = find_files(dir, [](const fs::path& p) { return p.extension() == ".psv"; });
  if (files.empty()) throw IoError("no PhysioNet 2019 .psv files under " + dir.string());
  auto records = parallel_map(files, threads, [](const fs::path& f) {
    try {
      return physionet::parse_patient_2019(io::read_file(f), f.stem().string());
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ": " + e.what());
    }
  });
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.record_id < b.record_id; });

  std::size_t dropped = 0;
  std::vector<physionet::PatientRecord> kept;
  std::vector<double> labels;
  const auto layout = records.front().channel_names;
  for (auto& r : records) {
    if (r.channel_names != layout)
      throw ParseError("record " + r.record_id + " has a different column layout");
    if (binary) {
      if (r.rows() == 0 || r.times.front() > double(physionet::kBinaryHorizonHours)) {
        ++dropped;
        continue;
      }
      auto [cut, label] = physionet::to_binary_2019(r);
      labels.push_back(label);
      kept.push_back(std::move(cut));
    } else {
      if (r.rows() == 0) {
        ++dropped;
        continue;
      }
      kept.push_back(std::move(r));
    }
  }
  if (kept.empty()) throw ParseError("no PhysioNet 2019 records with data");
  Tensor<double> y;
  if (binary) {
    y = Tensor<double>({kept.size(), 1}, std::move(labels));
  } else {
    std::size_t s = 0;
    for (const auto& r : kept) s = std::max(s, r.rows());
    y = Tensor<double>({kept.size(), s}, kNaN);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t t = 0; t < kept[i].rows(); ++t) y(i, t) = kept[i].labels[t];
  }
  auto names = kept.front().channel_names;
  auto m = from_records(std::move(kept), std::move(y), std::move(names), "ICULOS");
  if (dropped)
    m.warnings.push_back("dropped " + std::to_string(dropped) + (binary ? " records with no rows within 72 hours"
                                                                          : " records with no rows"));
  return m;
}

}  // namespace ingest

/// Reads the master data set from raw sources (fetching them when allowed).
inline MasterData ingest_master(const PipelineConfig& config) {
  const fs::path dir = fetch::raw_dir(config.path, config.dataset);
  const bool present = fs::is_directory(dir) && !fs::is_empty(dir);
  if (!present) {
    if (!config.download) throw IoError("raw sources not found under " + dir.string());
    fetch::fetch(fetch::describe(config.dataset), fetch::raw_root(config.path));
  }
  switch (config.dataset.kind) {
    case DatasetKind::uea: return ingest::uea(dir, config.dataset.uea_name, config.threads);
    case DatasetKind::physionet2012: return ingest::physionet2012(dir, config.threads);
    case DatasetKind::physionet2019: return ingest::physionet2019(dir, config.threads, false);
    case DatasetKind::physionet2019_binary: return ingest::physionet2019(dir, config.threads, true);
  }
  throw ConfigError("unknown data set kind");
}

inline cache::CacheKey cache_key(const DatasetId& id) {
  return {id.key(), json{{"dataset", id.key()}}};
}

/// Steps 1-2: cached master data set, rebuilt on miss, corruption or overwrite.
inline MasterData load_master(const PipelineConfig& config, std::vector<std::string>& warnings) {
  const auto key = cache_key(config.dataset);
  if (!config.overwrite_cache) {
    auto loaded = cache::load(config.path, key);
    if (loaded.status == cache::LoadStatus::hit) {
      MasterData m;
      m.X = PaddedTensor3(std::move(loaded.data->X));
      m.y = std::move(loaded.data->y);
      m.length.assign(loaded.data->length.values().begin(), loaded.data->length.values().end());
      m.channel_names = loaded.data->meta.at("channels").get<std::vector<std::string>>();
      m.warnings = loaded.data->meta.value("warnings", std::vector<std::string>{});
      if (m.channel_names.size() != m.X.c()) throw Error("cache metadata does not match tensor channels");
      return m;
    }
    if (loaded.status == cache::LoadStatus::corrupt)
      warnings.push_back("cache entry corrupt (" + loaded.file.filename().string() + ": " + loaded.detail +
                         "); rebuilding");
  }
  MasterData m = ingest_master(config);
  Tensor<std::int64_t> length({m.length.size()}, std::vector<std::int64_t>(m.length.begin(), m.length.end()));
  cache::save(config.path, key, m.X.tensor(), m.y, length, json{{"channels", m.channel_names}, {"warnings", m.warnings}});
  return m;
}

namespace detail {

template <typename F>
auto run_step(const char* name, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(std::string(name) + ": " + e.what());
  } catch (const NetworkError& e) {
    throw NetworkError(std::string(name) + ": " + e.what());
  } catch (const ChecksumError& e) {
    throw ChecksumError(std::string(name) + ": " + e.what());
  } catch (const ArchiveError& e) {
    throw ArchiveError(std::string(name) + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(std::string(name) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

}  // namespace detail

/// Runs the whole pipeline for `config`.
inline Dataset build(const PipelineConfig& config) {
  config.validate();
  const auto traits = DatasetTraits::of(config.dataset);
  std::vector<std::string> warnings;

  MasterData master = detail::run_step("ingest", [&] { return load_master(config, warnings); });
  warnings.insert(warnings.end(), master.warnings.begin(), master.warnings.end());
  const std::size_t C = master.X.c();

  std::vector<std::size_t> data_channels;
  for (std::size_t k = 1; k < C; ++k) data_channels.push_back(k);
  std::set<std::size_t> categorical = traits.default_categorical;
  categorical.insert(config.categorical.begin(), config.categorical.end());
  std::map<std::size_t, double> overrides = traits.default_channel_means;
  for (const auto& [k, v] : config.channel_means) overrides[k] = v;
  for (auto k : categorical)
    if (k == 0 || k >= C) throw ConfigError("categorical channel " + std::to_string(k) + " is not a data channel (1-" + std::to_string(C - 1) + ")");
  for (const auto& [k, v] : overrides)
    if (k == 0 || k >= C) throw ConfigError("channel_means channel " + std::to_string(k) + " is not a data channel (1-" + std::to_string(C - 1) + ")");

  const std::uint64_t seed = resolve_seed(config.seed);

  // 3. simulate missing data
  PaddedTensor3 X = detail::run_step("simulate missing data", [&] {
    return simulate_missing(master.X, master.length, data_channels, config.missing, seed);
  });

  // 4. time stamp, mask and delta channels
  std::vector<std::size_t> observed = data_channels;
  if (traits.time_is_observed) observed.insert(observed.begin(), 0);
  const auto layout = ChannelLayout::build(master.channel_names, config.time, config.mask, config.delta, observed);
  PaddedTensor3 final_X = detail::run_step("append channels", [&] {
    std::vector<PaddedTensor3> parts;
    if (config.time) parts.push_back(select_channels(X, std::vector<std::size_t>{0}));
    parts.push_back(select_channels(X, data_channels));
    if (config.mask || config.delta) {
      auto mask = observational_mask(X, master.length, observed);
      if (config.delta) {
        auto delta = time_delta(X, 0, mask, master.length);
        if (config.mask) parts.push_back(std::move(mask));
        parts.push_back(std::move(delta));
      } else {
        parts.push_back(std::move(mask));
      }
    }
    return concat_channels(parts);
  });

  // 5. stratified split
  auto assignment = detail::run_step("split", [&] {
    const auto strata = strata_of(master.y, traits.target);
    return stratified_split(strata, SplitSpec{config.train_prop, config.val_prop, seed}, &warnings);
  });

  // Training statistics in master numbering, on post-simulation raw values.
  Lengths train_length;
  for (auto i : assignment.train) train_length.push_back(master.length[i]);
  const ChannelStats stats =
      channel_stats(select_sequences(X, assignment.train), train_length, categorical, overrides);

  Dataset dataset(std::move(final_X), master.y, master.length, layout, assignment.membership(master.X.n()),
                  config.split);
  dataset.stats = stats;
  dataset.name = config.dataset.key();
  dataset.target = traits.target;
  dataset.seed = seed;

  // 6. standardise
  if (config.standardise) dataset = standardise(dataset, stats);

  // 7. impute
  if (config.impute.kind != ImputeKind::none) {
    dataset = detail::run_step("impute", [&] {
      std::vector<double> fill(layout.size(), kNaN);
      const auto data_idx = layout.indices(ChannelKind::data);
      for (auto k : data_idx) {
        const auto& st = stats[layout[k].source];
        auto f = st.fill();
        if (!f) continue;
        fill[k] = (config.standardise && st.count > 0) ? (*f - st.mean) / st.scale() : *f;
      }
      auto [Xi, yi] = impute(dataset.X_all(), dataset.y_all(), dataset.length_all(), config.impute, fill, data_idx);
      return dataset.with_tensors(std::move(Xi), std::move(yi));
    });
  }

  // 8. bind the requested split
  dataset.warnings = std::move(warnings);
  return dataset.with_active(config.split);
}

}  // namespace tsprep
