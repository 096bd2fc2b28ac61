#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "tsprep/ts_format.hpp"

using namespace tsprep;

namespace {

const char* kSmall =
    "# comment\n"
    "@problemName Tiny\n"
    "@timeStamps false\n"
    "@missing true\n"
    "@univariate false\n"
    "@dimensions 2\n"
    "@equalLength false\n"
    "@classLabel true up down\n"
    "@data\n"
    "1,2,3:4,5,6:up\n"
    "7,?:8,NaN:down\n";

}  // namespace

TEST(TsFormat, ParsesMultivariateWithMissing) {
  auto f = ts::parse_ts_file(kSmall);
  EXPECT_EQ(f.header.problem_name, "Tiny");
  EXPECT_FALSE(f.header.univariate);
  EXPECT_EQ(f.header.dimensions, 2u);
  ASSERT_EQ(f.series.size(), 2u);
  EXPECT_EQ(f.series[0].length(), 3u);
  EXPECT_EQ(f.series[0].channels[1][2], 6.0);
  EXPECT_EQ(f.series[1].label, "down");
  EXPECT_TRUE(std::isnan(f.series[1].channels[0][1]));
  EXPECT_TRUE(std::isnan(f.series[1].channels[1][1]));
  EXPECT_EQ(f.header.label_index("down"), 1u);
}

TEST(TsFormat, DirectivesAreCaseInsensitive) {
  auto f = ts::parse_ts_file("@PROBLEMNAME x\n@UNIVARIATE TRUE\n@CLASSLABEL true a\n@DATA\n1,2:a\n");
  EXPECT_EQ(f.series.size(), 1u);
}

TEST(TsFormat, UnknownDirectiveRejected) {
  EXPECT_THROW(ts::parse_ts_file("@bogus 1\n@data\n"), ParseError);
}

TEST(TsFormat, DataBeforeHeaderRejected) {
  EXPECT_THROW(ts::parse_ts_file("1,2,3\n@data\n"), ParseError);
}

TEST(TsFormat, MissingDataSectionRejected) {
  EXPECT_THROW(ts::parse_ts_file("@problemName x\n"), ParseError);
}

TEST(TsFormat, DimensionMismatchReportsLine) {
  try {
    ts::parse_ts_file("@univariate false\n@dimensions 2\n@classLabel true a\n@data\n1,2:3,4:a\n1,2:a\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(TsFormat, UnknownLabelRejected) {
  EXPECT_THROW(ts::parse_ts_file("@classLabel true a b\n@data\n1,2:c\n"), ParseError);
}

TEST(TsFormat, SeriesLengthEnforced) {
  EXPECT_THROW(ts::parse_ts_file("@equalLength true\n@seriesLength 3\n@classLabel true a\n@data\n1,2:a\n"),
               ParseError);
}

TEST(TsFormat, UnequalDimensionLengthsRejected) {
  EXPECT_THROW(ts::parse_ts_file("@univariate false\n@classLabel true a\n@data\n1,2:3:a\n"), ParseError);
}

TEST(TsFormat, TimestampsUnsupported) {
  EXPECT_THROW(ts::parse_ts_file("@timeStamps true\n@classLabel true a\n@data\n(0,1):a\n"), ParseError);
}

TEST(TsFormat, BadValueRejected) {
  EXPECT_THROW(ts::parse_ts_file("@classLabel true a\n@data\n1,x:a\n"), ParseError);
}

TEST(TsFormat, MergeKeepsTrainFirst) {
  auto tr = ts::parse_ts_file(kSmall, ts::SourceFile::train_file);
  auto te = ts::parse_ts_file(kSmall, ts::SourceFile::test_file);
  auto all = ts::merge_train_test(tr.series, te.series);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0].source, ts::SourceFile::train_file);
  EXPECT_EQ(all[3].source, ts::SourceFile::test_file);
}

TEST(TsFormat, MergeRejectsChannelMismatch) {
  auto a = ts::parse_ts_file("@classLabel true a\n@data\n1,2:a\n").series;
  auto b = ts::parse_ts_file(kSmall).series;
  EXPECT_THROW(ts::merge_train_test(a, b), ParseError);
}

TEST(TsFormat, WriteParseRoundTrip) {
  auto f = ts::parse_ts_file(kSmall);
  auto again = ts::parse_ts_file(ts::write_ts_file(f.header, f.series));
  ASSERT_EQ(again.series.size(), f.series.size());
  for (std::size_t i = 0; i < f.series.size(); ++i) {
    EXPECT_EQ(again.series[i].label, f.series[i].label);
    for (std::size_t d = 0; d < 2; ++d)
      for (std::size_t t = 0; t < f.series[i].length(); ++t)
        EXPECT_TRUE(fixtures::same_bits(again.series[i].channels[d][t], f.series[i].channels[d][t]));
  }
}

TEST(TsFormat, ArrowHeadFixtureShape) {
  fixtures::UeaSpec spec;
  auto train = ts::parse_ts_file(fixtures::uea_file(spec, true));
  auto test = ts::parse_ts_file(fixtures::uea_file(spec, false));
  EXPECT_EQ(train.series.size(), 36u);
  EXPECT_EQ(test.series.size(), 175u);
  EXPECT_EQ(train.series[0].length(), 251u);
  EXPECT_EQ(train.header.class_labels.size(), 3u);
}
