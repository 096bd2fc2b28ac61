#pragma once

// Synthetic source files, archive writers and a second tensor-file reader
// shared by the unit and acceptance suites.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("tsprep-test-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& file, const std::string& content) {
  fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("fixture write failed: " + file.string());
}

inline std::string read_bytes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string num(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// UEA .ts files

struct UeaSpec {
  std::string name = "ArrowHead";
  std::size_t dims = 1;
  std::vector<std::string> labels = {"0", "1", "2"};
  /// Per-label series counts in each file.
  std::vector<std::size_t> train_counts = {12, 12, 12};
  std::vector<std::size_t> test_counts = {69, 53, 53};
  std::size_t length = 251;
  /// When set, lengths vary in [min_length, length].
  std::size_t min_length = 0;
  std::uint64_t seed = 1;
};

inline std::string uea_file(const UeaSpec& spec, bool train) {
  std::mt19937_64 gen(spec.seed * 2 + (train ? 0 : 1));
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_int_distribution<std::size_t> len_dist(spec.min_length ? spec.min_length : spec.length, spec.length);
  const bool equal = spec.min_length == 0;
  std::ostringstream out;
  out << "# synthetic fixture\n@problemName " << spec.name << "\n@timeStamps false\n@missing false\n"
      << "@univariate " << (spec.dims == 1 ? "true" : "false") << "\n";
  if (spec.dims > 1) out << "@dimensions " << spec.dims << "\n";
  out << "@equalLength " << (equal ? "true" : "false") << "\n";
  if (equal) out << "@seriesLength " << spec.length << "\n";
  out << "@classLabel true";
  for (const auto& l : spec.labels) out << " " << l;
  out << "\n@data\n";
  const auto& counts = train ? spec.train_counts : spec.test_counts;
  // Interleave classes so file order is not sorted by label.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < counts.size(); ++k) order.insert(order.end(), counts[k], k);
  std::shuffle(order.begin(), order.end(), gen);
  for (auto k : order) {
    const std::size_t len = len_dist(gen);
    for (std::size_t d = 0; d < spec.dims; ++d) {
      if (d) out << ":";
      for (std::size_t t = 0; t < len; ++t) {
        if (t) out << ",";
        out << num(std::sin(0.05 * double(t) * double(k + 1) + double(d)) + noise(gen));
      }
    }
    out << ":" << spec.labels[k] << "\n";
  }
  return out.str();
}

/// Writes <dir>/<name>_TRAIN.ts and <name>_TEST.ts.
inline void write_uea(const fs::path& dir, const UeaSpec& spec = {}) {
  write_text(dir / (spec.name + "_TRAIN.ts"), uea_file(spec, true));
  write_text(dir / (spec.name + "_TEST.ts"), uea_file(spec, false));
}

// ---------------------------------------------------------------------------
// PhysioNet 2012

inline const std::array<const char*, 37> kTimeVarying2012 = {
    "Albumin", "ALP",      "ALT",      "AST",      "Bilirubin", "BUN",     "Cholesterol", "Creatinine", "DiasABP",
    "FiO2",    "GCS",      "Glucose",  "HCO3",     "HCT",       "HR",      "K",           "Lactate",    "Mg",
    "MAP",     "MechVent", "Na",       "NIDiasABP", "NIMAP",    "NISysABP", "PaCO2",      "PaO2",       "pH",
    "Platelets", "RespRate", "SaO2",   "SysABP",   "Temp",      "TroponinI", "TroponinT", "Urine",      "WBC",
    "Weight"};

struct Observation {
  int minutes;
  std::string parameter;
  double value;
};

struct Patient2012 {
  long id;
  double age = 60, gender = 1, height = -1, icu_type = 2, weight = -1;
  std::vector<Observation> obs;
  int death = 0;
};

inline std::string stamp(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

inline std::string patient_2012_text(const Patient2012& p) {
  std::ostringstream out;
  out << "Time,Parameter,Value\n";
  out << "00:00,RecordID," << p.id << "\n00:00,Age," << num(p.age) << "\n00:00,Gender," << num(p.gender)
      << "\n00:00,Height," << num(p.height) << "\n00:00,ICUType," << num(p.icu_type) << "\n00:00,Weight,"
      << num(p.weight) << "\n";
  for (const auto& o : p.obs) out << stamp(o.minutes) << "," << o.parameter << "," << num(o.value) << "\n";
  return out.str();
}

inline std::vector<Patient2012> random_patients_2012(std::size_t n, std::uint64_t seed, long first_id = 132539) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> steps(1, 12), gap(1, 90), param(0, 36), count(1, 5), icu(1, 4);
  std::uniform_real_distribution<double> val(0.5, 150.0);
  std::bernoulli_distribution coin(0.3);
  std::vector<Patient2012> out;
  for (std::size_t i = 0; i < n; ++i) {
    Patient2012 p;
    p.id = first_id + long(i);
    p.age = 20 + double(gen() % 70);
    p.gender = double(gen() % 2);
    p.height = coin(gen) ? -1 : 150 + double(gen() % 40);
    p.icu_type = icu(gen);
    p.death = coin(gen) ? 1 : 0;
    int t = int(gen() % 30);
    const int rows = steps(gen);
    for (int r = 0; r < rows; ++r) {
      const int k = count(gen);
      for (int j = 0; j < k; ++j) {
        const auto* name = kTimeVarying2012[param(gen)];
        double v = std::round(val(gen) * 10) / 10;
        if (std::string(name) == "MechVent") v = 1;
        p.obs.push_back({t, name, v});
      }
      t += gap(gen);
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::string outcomes_2012_text(const std::vector<Patient2012>& patients) {
  std::ostringstream out;
  out << "RecordID,SAPS-I,SOFA,Length_of_stay,Survival,In-hospital_death\n";
  for (const auto& p : patients) out << p.id << ",10,3,7,-1," << p.death << "\n";
  return out.str();
}

/// Writes set-a/ (and set-b/ for the second half) plus matching Outcomes files.
inline void write_physionet2012(const fs::path& dir, const std::vector<Patient2012>& patients) {
  const std::size_t half = (patients.size() + 1) / 2;
  std::vector<Patient2012> a(patients.begin(), patients.begin() + long(half));
  std::vector<Patient2012> b(patients.begin() + long(half), patients.end());
  for (const auto& p : a) write_text(dir / "set-a" / (std::to_string(p.id) + ".txt"), patient_2012_text(p));
  for (const auto& p : b) write_text(dir / "set-b" / (std::to_string(p.id) + ".txt"), patient_2012_text(p));
  write_text(dir / "Outcomes-a.txt", outcomes_2012_text(a));
  write_text(dir / "Outcomes-b.txt", outcomes_2012_text(b));
}

// ---------------------------------------------------------------------------
// PhysioNet 2019

inline const std::vector<std::string> kColumns2019 = {"HR", "O2Sat", "Temp", "Age", "Gender", "ICULOS", "SepsisLabel"};

struct Patient2019 {
  std::string id;
  std::vector<std::array<double, 7>> rows;  // columns as kColumns2019, NaN = empty
};

inline std::string patient_2019_text(const Patient2019& p) {
  std::ostringstream out;
  for (std::size_t k = 0; k < kColumns2019.size(); ++k) out << (k ? "|" : "") << kColumns2019[k];
  out << "\n";
  for (const auto& row : p.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "|" : "") << (std::isnan(row[k]) ? "NaN" : num(row[k]));
    out << "\n";
  }
  return out.str();
}

inline std::vector<Patient2019> random_patients_2019(std::size_t n, std::uint64_t seed, std::size_t max_rows = 90) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> rows(1, max_rows);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Patient2019> out;
  for (std::size_t i = 0; i < n; ++i) {
    Patient2019 p;
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%06zu", i + 1);
    p.id = buf;
    const std::size_t len = rows(gen);
    const bool septic = u(gen) < 0.3;
    const std::size_t onset = septic ? std::size_t(u(gen) * double(len)) : len;
    const double age = 30 + std::floor(u(gen) * 50), gender = u(gen) < 0.5 ? 0 : 1;
    for (std::size_t t = 0; t < len; ++t) {
      const double nan = std::nan("");
      p.rows.push_back({u(gen) < 0.3 ? nan : std::round(60 + 40 * u(gen)), u(gen) < 0.5 ? nan : std::round(90 + 10 * u(gen)),
                        u(gen) < 0.7 ? nan : 36 + std::round(30 * u(gen)) / 10, age, gender, double(t + 1),
                        t >= onset ? 1.0 : 0.0});
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline void write_physionet2019(const fs::path& dir, const std::vector<Patient2019>& patients) {
  for (const auto& p : patients) write_text(dir / "training" / (p.id + ".psv"), patient_2019_text(p));
}

// ---------------------------------------------------------------------------
// Archive writers (test-only; the library only reads archives)

inline void put16(std::string& s, std::uint32_t v) {
  s += char(v & 0xff);
  s += char((v >> 8) & 0xff);
}
inline void put32(std::string& s, std::uint32_t v) {
  put16(s, v & 0xffff);
  put16(s, v >> 16);
}

inline std::string deflate_raw(const std::string& in, int window_bits) {
  z_stream z{};
  if (deflateInit2(&z, Z_BEST_COMPRESSION, Z_DEFLATED, window_bits, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2");
  std::string out(deflateBound(&z, in.size()) + 64, '\0');
  z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  z.avail_in = static_cast<uInt>(in.size());
  z.next_out = reinterpret_cast<Bytef*>(out.data());
  z.avail_out = static_cast<uInt>(out.size());
  if (deflate(&z, Z_FINISH) != Z_STREAM_END) throw std::runtime_error("deflate");
  out.resize(z.total_out);
  deflateEnd(&z);
  return out;
}

inline std::string gzip(const std::string& in) { return deflate_raw(in, 15 + 16); }

struct ArchiveEntry {
  std::string name;
  std::string content;
};

/// Zip with one local header per entry; `deflate` chooses method 8 over 0.
inline std::string make_zip(const std::vector<ArchiveEntry>& entries, bool deflate = true) {
  std::string body, central;
  for (const auto& e : entries) {
    const std::uint32_t crc = crc32(0, reinterpret_cast<const Bytef*>(e.content.data()), uInt(e.content.size()));
    const std::string data = deflate ? deflate_raw(e.content, -15) : e.content;
    const std::uint32_t offset = std::uint32_t(body.size());
    put32(body, 0x04034b50);
    put16(body, 20);
    put16(body, 0);
    put16(body, deflate ? 8 : 0);
    put16(body, 0);
    put16(body, 0x21);
    put32(body, crc);
    put32(body, std::uint32_t(data.size()));
    put32(body, std::uint32_t(e.content.size()));
    put16(body, std::uint32_t(e.name.size()));
    put16(body, 0);
    body += e.name;
    body += data;

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, deflate ? 8 : 0);
    put16(central, 0);
    put16(central, 0x21);
    put32(central, crc);
    put32(central, std::uint32_t(data.size()));
    put32(central, std::uint32_t(e.content.size()));
    put16(central, std::uint32_t(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += e.name;
  }
  std::string out = body + central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, std::uint32_t(entries.size()));
  put16(out, std::uint32_t(entries.size()));
  put32(out, std::uint32_t(central.size()));
  put32(out, std::uint32_t(body.size()));
  put16(out, 0);
  return out;
}

inline std::string tar_header(const std::string& name, std::size_t size, char type) {
  std::string h(512, '\0');
  std::memcpy(h.data(), name.data(), std::min<std::size_t>(name.size(), 100));
  std::snprintf(h.data() + 100, 8, "%07o", 0644);
  std::snprintf(h.data() + 108, 8, "%07o", 0);
  std::snprintf(h.data() + 116, 8, "%07o", 0);
  std::snprintf(h.data() + 124, 12, "%011zo", size);
  std::snprintf(h.data() + 136, 12, "%011o", 0);
  h[156] = type;
  std::memcpy(h.data() + 257, "ustar", 6);
  std::memcpy(h.data() + 263, "00", 2);
  std::memset(h.data() + 148, ' ', 8);
  unsigned sum = 0;
  for (unsigned char c : h) sum += c;
  std::snprintf(h.data() + 148, 8, "%06o", sum);
  h[155] = ' ';
  return h;
}

/// Uncompressed ustar stream; directories are entries whose name ends in '/'.
inline std::string make_tar(const std::vector<ArchiveEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    const bool dir = !e.name.empty() && e.name.back() == '/';
    out += tar_header(e.name, dir ? 0 : e.content.size(), dir ? '5' : '0');
    if (!dir) {
      out += e.content;
      out.append((512 - e.content.size() % 512) % 512, '\0');
    }
  }
  out.append(1024, '\0');
  return out;
}

inline std::string make_tar_gz(const std::vector<ArchiveEntry>& entries) { return gzip(make_tar(entries)); }

/// Entries of every regular file under `dir`, named relative to `base`.
inline std::vector<ArchiveEntry> entries_under(const fs::path& dir, const fs::path& base) {
  std::vector<ArchiveEntry> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back({fs::relative(e.path(), base).generic_string(), read_bytes(e.path())});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

// ---------------------------------------------------------------------------
// Independent tensor-file reader

struct ReadTensor {
  std::string dtype;
  std::vector<std::size_t> shape;
  std::vector<double> real;        // f32 widened / f64
  std::vector<std::int64_t> ints;  // i64
};

/// Parses a tensor file with its own header tokenizer and memcpy decoding.
inline ReadTensor read_tensor_file(const fs::path& file) {
  const std::string bytes = read_bytes(file);
  if (bytes.size() < 96) throw std::runtime_error("short file");
  if (std::memcmp(bytes.data(), "TSPREP\x01", 7) != 0) throw std::runtime_error("bad magic");
  if (bytes[95] != '\n') throw std::runtime_error("bad terminator");
  ReadTensor r;
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t k = 7; k < 95; ++k) {
    if (bytes[k] == ' ') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur += bytes[k];
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  if (tokens.size() < 2) throw std::runtime_error("bad header");
  r.dtype = tokens[0];
  const std::size_t rank = std::stoul(tokens[1]);
  if (tokens.size() != rank + 2) throw std::runtime_error("bad rank");
  std::size_t count = 1;
  for (std::size_t k = 0; k < rank; ++k) {
    r.shape.push_back(std::stoul(tokens[k + 2]));
    count *= r.shape.back();
  }
  const char* p = bytes.data() + 96;
  const std::size_t width = r.dtype == "f32" ? 4 : 8;
  if (bytes.size() != 96 + count * width) throw std::runtime_error("payload size mismatch");
  for (std::size_t k = 0; k < count; ++k, p += width) {
    if (r.dtype == "f32") {
      float f;
      std::memcpy(&f, p, 4);
      r.real.push_back(f);
    } else if (r.dtype == "f64") {
      double d;
      std::memcpy(&d, p, 8);
      r.real.push_back(d);
    } else if (r.dtype == "i64") {
      std::int64_t v;
      std::memcpy(&v, p, 8);
      r.ints.push_back(v);
    } else {
      throw std::runtime_error("unknown dtype " + r.dtype);
    }
  }
  return r;
}

/// Bitwise equality treating every NaN payload as itself.
inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace fixtures
