#pragma once

// Reader and writer for the UEA & UCR repository `.ts` text format
// (classification subset: no timestamp tuples, no regression targets).

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/tensor.hpp"
#include "tsprep/text.hpp"

namespace tsprep::ts {

struct TsHeader {
  std::string problem_name;
  bool univariate = true;
  std::optional<std::size_t> dimensions;
  bool equal_length = false;
  std::optional<std::size_t> series_length;
  bool has_timestamps = false;
  bool has_missing = false;
  bool has_class_label = false;
  /// In directive order; this order defines the one-hot index of each label.
  std::vector<std::string> class_labels;

  std::optional<std::size_t> label_index(std::string_view label) const {
    for (std::size_t k = 0; k < class_labels.size(); ++k)
      if (class_labels[k] == label) return k;
    return std::nullopt;
  }
};

enum class SourceFile { train_file, test_file };

struct RawSeries {
  std::vector<std::vector<double>> channels;  // missing = NaN
  std::string label;
  SourceFile source = SourceFile::train_file;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

struct TsFile {
  TsHeader header;
  std::vector<RawSeries> series;
};

namespace detail {

inline bool parse_bool(std::string_view value, std::string_view directive, std::size_t line) {
  if (text::iequals(value, "true")) return true;
  if (text::iequals(value, "false")) return false;
  throw ParseError("malformed directive @" + std::string(directive) + ": expected true/false, got '" +
                       std::string(value) + "'",
                   line);
}

inline std::size_t parse_count(std::string_view value, std::string_view directive, std::size_t line) {
  auto n = text::parse_int<std::size_t>(value);
  if (!n) throw ParseError("malformed directive @" + std::string(directive) + ": '" + std::string(value) + "'", line);
  return *n;
}

inline std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    const std::size_t start = k;
    while (k < s.size() && !std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    if (k > start) out.push_back(s.substr(start, k - start));
  }
  return out;
}

inline void parse_directive(std::string_view line, TsHeader& header, std::size_t lineno) {
  auto tokens = words(line.substr(1));
  if (tokens.empty()) throw ParseError("malformed directive: bare '@'", lineno);
  const std::string name = text::lower(tokens[0]);
  auto want_value = [&]() -> std::string_view {
    if (tokens.size() != 2) throw ParseError("malformed directive @" + name + ": expected one value", lineno);
    return tokens[1];
  };
  if (name == "problemname") {
    if (tokens.size() < 2) throw ParseError("malformed directive @problemname", lineno);
    header.problem_name = std::string(tokens[1]);
  } else if (name == "timestamps") {
    header.has_timestamps = parse_bool(want_value(), name, lineno);
  } else if (name == "missing") {
    header.has_missing = parse_bool(want_value(), name, lineno);
  } else if (name == "univariate") {
    header.univariate = parse_bool(want_value(), name, lineno);
  } else if (name == "dimensions") {
    header.dimensions = parse_count(want_value(), name, lineno);
  } else if (name == "equallength") {
    header.equal_length = parse_bool(want_value(), name, lineno);
  } else if (name == "serieslength") {
    header.series_length = parse_count(want_value(), name, lineno);
  } else if (name == "classlabel") {
    if (tokens.size() < 2) throw ParseError("malformed directive @classlabel", lineno);
    header.has_class_label = parse_bool(tokens[1], name, lineno);
    header.class_labels.clear();
    for (std::size_t k = 2; k < tokens.size(); ++k) header.class_labels.emplace_back(tokens[k]);
    if (header.has_class_label && header.class_labels.empty())
      throw ParseError("malformed directive @classlabel: no labels declared", lineno);
    if (!header.has_class_label && !header.class_labels.empty())
      throw ParseError("malformed directive @classlabel: labels given with 'false'", lineno);
  } else if (name == "targetlabel") {
    throw ParseError("regression problems (@targetLabel) are not supported", lineno);
  } else {
    throw ParseError("malformed directive: unknown @" + std::string(tokens[0]), lineno);
  }
}

inline std::vector<double> parse_dimension(std::string_view field, std::size_t lineno) {
  std::vector<double> values;
  field = text::trim(field);
  if (field.empty()) throw ParseError("empty dimension", lineno);
  for (auto token : text::split(field, ',')) {
    token = text::trim(token);
    if (token == "?" || text::iequals(token, "nan")) {
      values.push_back(kNaN);
      continue;
    }
    auto v = text::parse_double(token);
    if (!v) throw ParseError("bad value '" + std::string(token) + "'", lineno);
    values.push_back(*v);
  }
  return values;
}

}  // namespace detail

/// Parses a complete `.ts` file. Every data line yields one series; `?` is missing.
inline TsFile parse_ts_file(std::string_view content, SourceFile source = SourceFile::train_file) {
  TsFile file;
  TsHeader& header = file.header;
  bool in_data = false;
  std::optional<std::size_t> n_dims;
  std::size_t lineno = 0;

  for (auto raw : text::lines(content)) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '@') {
      if (in_data) throw ParseError("directive after @data", lineno);
      if (text::iequals(text::trim(line), "@data")) {
        if (header.has_timestamps) throw ParseError("timestamped .ts files are not supported", lineno);
        in_data = true;
        if (header.univariate) n_dims = 1;
        else if (header.dimensions) n_dims = header.dimensions;
        continue;
      }
      detail::parse_directive(line, header, lineno);
      continue;
    }
    if (!in_data) throw ParseError("data before @data", lineno);

    auto fields = text::split(line, ':');
    RawSeries series;
    series.source = source;
    if (header.has_class_label) {
      if (fields.size() < 2) throw ParseError("data line has no class label", lineno);
      series.label = std::string(text::trim(fields.back()));
      fields.pop_back();
      if (!header.label_index(series.label))
        throw ParseError("unknown class label '" + series.label + "'", lineno);
    }
    if (!n_dims) n_dims = fields.size();
    if (fields.size() != *n_dims)
      throw ParseError("dimension count mismatch: expected " + std::to_string(*n_dims) + ", got " +
                           std::to_string(fields.size()),
                       lineno);
    for (auto field : fields) series.channels.push_back(detail::parse_dimension(field, lineno));
    for (const auto& ch : series.channels)
      if (ch.size() != series.channels.front().size())
        throw ParseError("dimensions of one series have different lengths", lineno);
    if (header.equal_length && header.series_length && series.length() != *header.series_length)
      throw ParseError("series length " + std::to_string(series.length()) + " differs from @seriesLength " +
                           std::to_string(*header.series_length),
                       lineno);
    file.series.push_back(std::move(series));
  }
  if (!in_data) throw ParseError("no @data section");
  return file;
}

/// Pools the repository's train and test files: train series first, file order kept.
inline std::vector<RawSeries> merge_train_test(std::vector<RawSeries> train, std::vector<RawSeries> test) {
  if (!train.empty() && !test.empty() && train.front().channels.size() != test.front().channels.size())
    throw ParseError("train and test files have different channel counts (" +
                     std::to_string(train.front().channels.size()) + " vs " +
                     std::to_string(test.front().channels.size()) + ")");
  train.reserve(train.size() + test.size());
  for (auto& s : test) train.push_back(std::move(s));
  return train;
}

/// Serialises back to `.ts` text. NaN is written as `?`.
inline std::string write_ts_file(const TsHeader& header, const std::vector<RawSeries>& series) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string out;
  out += "@problemName " + (header.problem_name.empty() ? std::string("unnamed") : header.problem_name) + "\n";
  out += std::string("@timeStamps ") + b(header.has_timestamps) + "\n";
  out += std::string("@missing ") + b(header.has_missing) + "\n";
  out += std::string("@univariate ") + b(header.univariate) + "\n";
  if (header.dimensions) out += "@dimensions " + std::to_string(*header.dimensions) + "\n";
  out += std::string("@equalLength ") + b(header.equal_length) + "\n";
  if (header.series_length) out += "@seriesLength " + std::to_string(*header.series_length) + "\n";
  out += std::string("@classLabel ") + b(header.has_class_label);
  for (const auto& l : header.class_labels) out += " " + l;
  out += "\n@data\n";
  for (const auto& s : series) {
    for (std::size_t d = 0; d < s.channels.size(); ++d) {
      if (d) out += ':';
      for (std::size_t t = 0; t < s.channels[d].size(); ++t) {
        if (t) out += ',';
        const double v = s.channels[d][t];
        out += std::isnan(v) ? std::string("?") : text::format_double(v);
      }
    }
    if (header.has_class_label) out += ":" + s.label;
    out += "\n";
  }
  return out;
}

}  // namespace tsprep::ts
