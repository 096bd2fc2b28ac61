#pragma once

// Supported data set identifiers.

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>

#include "tsprep/error.hpp"
#include "tsprep/text.hpp"

namespace tsprep {

/// UEA & UCR classification archive names accepted without the `uea:` prefix.
inline constexpr std::array<std::string_view, 158> kUeaDatasets = {
    "ACSF1", "Adiac", "AllGestureWiimoteX", "AllGestureWiimoteY", "AllGestureWiimoteZ", "ArrowHead", "Beef",
    "BeetleFly", "BirdChicken", "BME", "Car", "CBF", "Chinatown", "ChlorineConcentration", "CinCECGTorso", "Coffee",
    "Computers", "CricketX", "CricketY", "CricketZ", "Crop", "DiatomSizeReduction", "DistalPhalanxOutlineAgeGroup",
    "DistalPhalanxOutlineCorrect", "DistalPhalanxTW", "DodgerLoopDay", "DodgerLoopGame", "DodgerLoopWeekend",
    "Earthquakes", "ECG200", "ECG5000", "ECGFiveDays", "ElectricDevices", "EOGHorizontalSignal", "EOGVerticalSignal",
    "EthanolLevel", "FaceAll", "FaceFour", "FacesUCR", "FiftyWords", "Fish", "FordA", "FordB", "FreezerRegularTrain",
    "FreezerSmallTrain", "Fungi", "GestureMidAirD1", "GestureMidAirD2", "GestureMidAirD3", "GesturePebbleZ1",
    "GesturePebbleZ2", "GunPoint", "GunPointAgeSpan", "GunPointMaleVersusFemale", "GunPointOldVersusYoung", "Ham",
    "HandOutlines", "Haptics", "Herring", "HouseTwenty", "InlineSkate", "InsectEPGRegularTrain", "InsectEPGSmallTrain",
    "InsectWingbeatSound", "ItalyPowerDemand", "LargeKitchenAppliances", "Lightning2", "Lightning7", "Mallat", "Meat",
    "MedicalImages", "MelbournePedestrian", "MiddlePhalanxOutlineAgeGroup", "MiddlePhalanxOutlineCorrect",
    "MiddlePhalanxTW", "MixedShapesRegularTrain", "MixedShapesSmallTrain", "MoteStrain",
    "NonInvasiveFetalECGThorax1", "NonInvasiveFetalECGThorax2", "OliveOil", "OSULeaf", "PhalangesOutlinesCorrect",
    "Phoneme", "PickupGestureWiimoteZ", "PigAirwayPressure", "PigArtPressure", "PigCVP", "PLAID", "Plane",
    "PowerCons", "ProximalPhalanxOutlineAgeGroup", "ProximalPhalanxOutlineCorrect", "ProximalPhalanxTW",
    "RefrigerationDevices", "Rock", "ScreenType", "SemgHandGenderCh2", "SemgHandMovementCh2", "SemgHandSubjectCh2",
    "ShakeGestureWiimoteZ", "ShapeletSim", "ShapesAll", "SmallKitchenAppliances", "SmoothSubspace",
    "SonyAIBORobotSurface1", "SonyAIBORobotSurface2", "StarLightCurves", "Strawberry", "SwedishLeaf", "Symbols",
    "SyntheticControl", "ToeSegmentation1", "ToeSegmentation2", "Trace", "TwoLeadECG", "TwoPatterns", "UMD",
    "UWaveGestureLibraryAll", "UWaveGestureLibraryX", "UWaveGestureLibraryY", "UWaveGestureLibraryZ", "Wafer", "Wine",
    "WordSynonyms", "Worms", "WormsTwoClass", "Yoga",
    // multivariate
    "ArticularyWordRecognition", "AtrialFibrillation", "BasicMotions", "CharacterTrajectories", "Cricket",
    "DuckDuckGeese", "EigenWorms", "Epilepsy", "ERing", "EthanolConcentration", "FaceDetection", "FingerMovements",
    "HandMovementDirection", "Handwriting", "Heartbeat", "InsectWingbeat", "JapaneseVowels", "Libras", "LSST",
    "MotorImagery", "NATOPS", "PEMSSF", "PenDigits", "PhonemeSpectra", "RacketSports", "SelfRegulationSCP1",
    "SelfRegulationSCP2", "SpokenArabicDigits", "StandWalkJump", "UWaveGestureLibrary"};

enum class DatasetKind { uea, physionet2012, physionet2019, physionet2019_binary };

struct DatasetId {
  DatasetKind kind = DatasetKind::uea;
  std::string uea_name;  // archive name, UEA only

  /// Accepts physionet2012, physionet2019, physionet2019binary, a known UEA
  /// name (any case) or `uea:<Name>` for names not in the built-in list.
  static DatasetId parse(std::string_view name) {
    const auto n = text::trim(name);
    if (text::iequals(n, "physionet2012")) return {DatasetKind::physionet2012, {}};
    if (text::iequals(n, "physionet2019")) return {DatasetKind::physionet2019, {}};
    if (text::iequals(n, "physionet2019binary")) return {DatasetKind::physionet2019_binary, {}};
    if (n.size() > 4 && text::iequals(n.substr(0, 4), "uea:")) {
      const auto rest = n.substr(4);
      for (char ch : rest)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
          throw ConfigError("invalid UEA data set name '" + std::string(rest) + "'");
      return {DatasetKind::uea, std::string(rest)};
    }
    for (auto known : kUeaDatasets)
      if (text::iequals(n, known)) return {DatasetKind::uea, std::string(known)};
    throw ConfigError("unsupported data set '" + std::string(n) + "'. Supported: " + supported_names());
  }

  static std::string supported_names() {
    std::string out = "physionet2012, physionet2019, physionet2019binary, uea:<Name>, ";
    for (std::size_t k = 0; k < kUeaDatasets.size(); ++k) out += (k ? ", " : "") + std::string(kUeaDatasets[k]);
    return out;
  }

  /// Cache directory name of the master data set.
  std::string key() const {
    switch (kind) {
      case DatasetKind::uea: return "uea-" + uea_name;
      case DatasetKind::physionet2012: return "physionet2012";
      case DatasetKind::physionet2019: return "physionet2019";
      case DatasetKind::physionet2019_binary: return "physionet2019binary";
    }
    return "?";
  }

  /// Raw-source directory name; the binary 2019 variant shares the 2019 sources.
  std::string raw_key() const { return kind == DatasetKind::physionet2019_binary ? "physionet2019" : key(); }

  bool is_physionet() const { return kind != DatasetKind::uea; }

  bool operator==(const DatasetId&) const = default;
};

}  // namespace tsprep
