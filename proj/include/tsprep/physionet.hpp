#pragma once

// PhysioNet 2012 (long format, one text file per patient) and 2019 (pipe
// separated, one row per ICU hour) record parsers.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/text.hpp"

namespace tsprep::physionet {

/// PhysioNet 2012 wide channel order. Channel 0 is the time stamp.
inline constexpr std::array<std::string_view, 45> kChannels2012 = {
    "Mins",      "Albumin",  "ALP",      "ALT",       "AST",       "Bilirubin", "BUN",      "Cholesterol", "Creatinine",
    "DiasABP",   "FiO2",     "GCS",      "Glucose",   "HCO3",      "HCT",       "HR",       "K",           "Lactate",
    "Mg",        "MAP",      "MechVent", "Na",        "NIDiasABP", "NIMAP",     "NISysABP", "PaCO2",       "PaO2",
    "pH",        "Platelets", "RespRate", "SaO2",     "SysABP",    "Temp",      "TroponinI", "TroponinT",  "Urine",
    "WBC",       "Weight",   "Age",      "Gender",    "Height",    "ICUType1",  "ICUType2", "ICUType3",    "ICUType4"};

inline constexpr std::size_t kTimeVarying2012 = 37;  // channels 1..37
inline constexpr std::size_t kMechVent2012 = 20;
inline constexpr std::size_t kGender2012 = 39;
inline constexpr std::size_t kIcuTypeFirst2012 = 41;

inline constexpr std::size_t kBinaryHorizonHours = 72;

struct StaticFields {
  double age = kNaN;
  double gender = kNaN;
  double height = kNaN;
  double icu_type = kNaN;
};

struct PatientRecord {
  std::string record_id;
  /// Minutes since admission (2012) or ICULOS hours (2019). Strictly increasing.
  std::vector<double> times;
  /// rows x data channels, NaN where unmeasured.
  Tensor<double> values;
  std::vector<std::string> channel_names;
  StaticFields static_fields;
  /// Per-row SepsisLabel (2019 only).
  std::vector<double> labels;

  std::size_t rows() const { return times.size(); }
};

/// Time column followed by the data channels.
inline Tensor<double> to_wide(const PatientRecord& record) {
  const std::size_t c = record.values.rank() == 2 ? record.values.dim(1) : 0;
  Tensor<double> wide({record.rows(), c + 1});
  for (std::size_t r = 0; r < record.rows(); ++r) {
    wide(r, 0) = record.times[r];
    for (std::size_t k = 0; k < c; ++k) wide(r, k + 1) = record.values(r, k);
  }
  return wide;
}

namespace detail {

inline std::string canonical_id(std::string_view raw, std::size_t line) {
  auto v = text::parse_double(raw);
  if (!v) throw ParseError("bad RecordID '" + std::string(raw) + "'", line);
  if (*v == std::floor(*v) && std::fabs(*v) < 1e15) return std::to_string(static_cast<long long>(*v));
  return std::string(text::trim(raw));
}

inline std::optional<std::size_t> channel_2012(std::string_view name) {
  if (name == "TropI") return 33;
  if (name == "TropT") return 34;
  for (std::size_t k = 1; k <= kTimeVarying2012; ++k)
    if (kChannels2012[k] == name) return k;
  return std::nullopt;
}

inline double parse_minutes(std::string_view stamp, std::size_t line) {
  auto parts = text::split(text::trim(stamp), ':');
  if (parts.size() != 2) throw ParseError("unparseable time stamp '" + std::string(stamp) + "'", line);
  auto hh = text::parse_int<long>(parts[0]);
  auto mm = text::parse_int<long>(parts[1]);
  if (!hh || !mm || *hh < 0 || *mm < 0 || *mm >= 60)
    throw ParseError("unparseable time stamp '" + std::string(stamp) + "'", line);
  return static_cast<double>(*hh * 60 + *mm);
}

inline double missing_if_minus_one(double v) { return v == -1.0 ? kNaN : v; }

}  // namespace detail

/// Pivots one long-format 2012 record into wide rows.
///
/// Columns of `values` are channels 1..44. Static fields are broadcast to
/// every row; ICUType is one-hot (all NaN when unknown). Every -1 is missing.
/// A row exists for each time stamp with at least one observed time-varying
/// value; for repeated (parameter, time) pairs the last occurrence wins.
inline PatientRecord parse_patient_2012(std::string_view content) {
  auto all = text::lines(content);
  std::size_t lineno = 0;
  bool header_seen = false;
  std::optional<std::string> record_id;
  StaticFields statics;
  std::map<double, std::array<double, kTimeVarying2012 + 1>> cells;

  for (auto raw : all) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      auto cols = text::split(line, ',');
      if (cols.size() != 3 || !text::iequals(text::trim(cols[0]), "Time") ||
          !text::iequals(text::trim(cols[1]), "Parameter") || !text::iequals(text::trim(cols[2]), "Value"))
        throw ParseError("expected header 'Time,Parameter,Value'", lineno);
      header_seen = true;
      continue;
    }
    auto cols = text::split(line, ',');
    if (cols.size() != 3) throw ParseError("expected 3 fields", lineno);
    const double minutes = detail::parse_minutes(cols[0], lineno);
    const auto param = text::trim(cols[1]);
    if (param == "RecordID") {
      record_id = detail::canonical_id(cols[2], lineno);
      continue;
    }
    auto parsed = text::parse_double(cols[2]);
    if (!parsed) throw ParseError("bad value '" + std::string(cols[2]) + "' for " + std::string(param), lineno);
    const double value = detail::missing_if_minus_one(*parsed);

    if (param == "Age") statics.age = value;
    else if (param == "Gender") statics.gender = value;
    else if (param == "Height") statics.height = value;
    else if (param == "ICUType") statics.icu_type = value;
    else if (auto ch = detail::channel_2012(param)) {
      auto [it, inserted] = cells.try_emplace(minutes);
      if (inserted) it->second.fill(kNaN);
      it->second[*ch] = value;
    } else {
      throw ParseError("unknown parameter '" + std::string(param) + "'", lineno);
    }
  }
  if (!header_seen) throw ParseError("empty record");
  if (!record_id) throw ParseError("missing RecordID row");
  if (!std::isnan(statics.icu_type) &&
      (statics.icu_type != std::floor(statics.icu_type) || statics.icu_type < 1 || statics.icu_type > 4))
    throw ParseError("ICUType must be 1-4, got " + text::format_double(statics.icu_type));

  PatientRecord rec;
  rec.record_id = *record_id;
  rec.static_fields = statics;
  for (std::size_t k = 1; k < kChannels2012.size(); ++k) rec.channel_names.emplace_back(kChannels2012[k]);

  std::vector<const std::array<double, kTimeVarying2012 + 1>*> kept;
  for (const auto& [minutes, row] : cells) {
    bool observed = false;
    for (std::size_t k = 1; k <= kTimeVarying2012; ++k) observed = observed || !std::isnan(row[k]);
    if (!observed) continue;
    rec.times.push_back(minutes);
    kept.push_back(&row);
  }

  rec.values = Tensor<double>({rec.times.size(), kChannels2012.size() - 1}, kNaN);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    for (std::size_t k = 1; k <= kTimeVarying2012; ++k) rec.values(r, k - 1) = (*kept[r])[k];
    rec.values(r, 37) = statics.age;
    rec.values(r, 38) = statics.gender;
    rec.values(r, 39) = statics.height;
    for (std::size_t u = 0; u < 4; ++u)
      rec.values(r, 40 + u) = std::isnan(statics.icu_type) ? kNaN : (statics.icu_type == double(u + 1) ? 1.0 : 0.0);
  }
  return rec;
}

/// record id -> In-hospital death (0 survivor, 1 died).
///
/// The outcome column is located by its header name; without a header the
/// record id is the first column and the outcome the last.
inline std::map<std::string, int> parse_outcomes_2012(std::string_view content) {
  std::map<std::string, int> out;
  std::size_t id_col = 0;
  std::optional<std::size_t> label_col;
  std::size_t lineno = 0;
  for (auto raw : text::lines(content)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    auto cols = text::split(line, ',');
    if (lineno == 1 && !text::parse_double(cols[0])) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const auto name = text::lower(text::trim(cols[k]));
        if (name == "recordid") id_col = k;
        if (name == "in-hospital_death" || name == "in-hospital death") label_col = k;
      }
      if (!label_col) throw ParseError("outcomes header has no In-hospital_death column", lineno);
      continue;
    }
    const std::size_t lc = label_col.value_or(cols.size() - 1);
    if (cols.size() <= std::max(lc, id_col)) throw ParseError("too few columns", lineno);
    const std::string id = detail::canonical_id(cols[id_col], lineno);
    auto label = text::parse_double(cols[lc]);
    if (!label || (*label != 0.0 && *label != 1.0))
      throw ParseError("In-hospital death must be 0 or 1, got '" + std::string(cols[lc]) + "'", lineno);
    if (!out.emplace(id, static_cast<int>(*label)).second)
      throw ParseError("duplicate record id " + id, lineno);
  }
  return out;
}

/// Parses one 2019 `.psv` record. ICULOS becomes the time axis and
/// SepsisLabel the per-row target; remaining columns are data channels.
inline PatientRecord parse_patient_2019(std::string_view content, std::string record_id) {
  auto all = text::lines(content);
  if (all.empty()) throw ParseError("empty record");
  auto header = text::split(text::trim(all[0]), '|');
  std::optional<std::size_t> time_col, label_col;
  PatientRecord rec;
  rec.record_id = std::move(record_id);
  for (std::size_t k = 0; k < header.size(); ++k) {
    const auto name = text::trim(header[k]);
    if (name == "ICULOS") time_col = k;
    else if (name == "SepsisLabel") label_col = k;
    else rec.channel_names.emplace_back(name);
  }
  if (!time_col || !label_col) throw ParseError("header must contain ICULOS and SepsisLabel", 1);

  std::vector<double> flat;
  for (std::size_t lineno = 2; lineno <= all.size(); ++lineno) {
    const auto line = text::trim(all[lineno - 1]);
    if (line.empty()) continue;
    auto cells = text::split(line, '|');
    if (cells.size() != header.size())
      throw ParseError("row has " + std::to_string(cells.size()) + " columns, header has " +
                           std::to_string(header.size()),
                       lineno);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto cell = text::trim(cells[k]);
      double v = kNaN;
      if (!cell.empty() && !text::iequals(cell, "nan")) {
        auto parsed = text::parse_double(cell);
        if (!parsed) throw ParseError("bad value '" + std::string(cell) + "'", lineno);
        v = *parsed;
      }
      if (k == *time_col) {
        if (std::isnan(v)) throw ParseError("missing ICULOS", lineno);
        if (!rec.times.empty() && v <= rec.times.back()) throw ParseError("ICULOS not strictly increasing", lineno);
        rec.times.push_back(v);
      } else if (k == *label_col) {
        if (v != 0.0 && v != 1.0) throw ParseError("SepsisLabel must be 0 or 1", lineno);
        rec.labels.push_back(v);
      } else {
        flat.push_back(v);
      }
    }
  }
  rec.values = Tensor<double>({rec.times.size(), rec.channel_names.size()}, std::move(flat));
  return rec;
}

/// Binary variant: rows with ICULOS <= 72 hours; label is 1 iff the patient
/// is septic at any point of the full stay.
inline std::pair<PatientRecord, int> to_binary_2019(const PatientRecord& record) {
  std::size_t keep = 0;
  while (keep < record.rows() && record.times[keep] <= double(kBinaryHorizonHours)) ++keep;
  if (keep == 0) throw ParseError("record " + record.record_id + " has no rows within 72 hours");
  int label = 0;
  for (double l : record.labels) label = std::max(label, static_cast<int>(l));

  PatientRecord out;
  out.record_id = record.record_id;
  out.channel_names = record.channel_names;
  out.static_fields = record.static_fields;
  out.times.assign(record.times.begin(), record.times.begin() + keep);
  out.labels.assign(record.labels.begin(), record.labels.begin() + std::min(keep, record.labels.size()));
  const std::size_t c = record.values.dim(1);
  std::vector<double> flat(record.values.values().begin(), record.values.values().begin() + keep * c);
  out.values = Tensor<double>({keep, c}, std::move(flat));
  return {std::move(out), label};
}

}  // namespace tsprep::physionet
