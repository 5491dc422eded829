// Study bundle: everything a run produced, serializable to JSON and
// exportable as plot-ready CSV tables with a hashed manifest.

#ifndef H2CHAIN_REPORT_HPP
#define H2CHAIN_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2chain/coalition.hpp"
#include "h2chain/stackelberg.hpp"

namespace h2chain {

struct PlanningSection {
  PriceSchedule price;                      // price the structures were valued at
  std::vector<StructureValue> structures;   // enumeration order
  std::vector<StabilityVerdict> verdicts;   // parallel to structures
  std::string selected;                     // label of the structure carried to scheduling
  std::vector<Imputation> imputations;      // Shapley split of each multi-plant block of `selected`
};

struct SensitivitySection {
  SensitivityParameter parameter = SensitivityParameter::kOperatingCost;
  std::vector<SensitivityPoint> points;
};

struct StudyBundle {
  std::string scenario_name;
  std::string scenario_fingerprint;
  std::vector<double> tariff;  // electricity price per period, $/kWh
  std::optional<PlanningSection> planning;
  std::optional<EquilibriumReport> scheduling;
  std::optional<std::vector<SweepPoint>> flat_sweep;
  std::optional<SensitivitySection> sensitivity;
};

enum class Section { kPlanning, kScheduling, kFlatSweep, kSensitivity };

const char* to_string(Section section);  // "planning", "scheduling", "flat_sweep", "sensitivity"
Section parse_section(const std::string& text);

class MissingSectionError : public std::runtime_error {
 public:
  explicit MissingSectionError(Section section)
      : std::runtime_error(std::string("study bundle has no '") + to_string(section) + "' section"),
        section(section) {}
  Section section;
};

// Canonical JSON (sorted keys, shortest round-trip numbers, trailing newline).
std::string bundle_to_json(const StudyBundle& bundle);
// Throws std::invalid_argument on malformed input.
StudyBundle parse_bundle(const std::string& text);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

// Writes the CSV tables of the requested sections (every present section when
// `sections` is empty) into `dir`. Throws MissingSectionError when a requested
// section is absent. Entries are sorted by path.
std::vector<ManifestEntry> export_tables(const StudyBundle& bundle, const std::filesystem::path& dir,
                                         const std::vector<Section>& sections = {});

// Writes `contents` to dir/name through a temporary file and rename.
ManifestEntry write_file_atomic(const std::filesystem::path& dir, const std::string& name,
                                const std::string& contents);

// manifest.json listing `entries` (sorted by path).
ManifestEntry write_manifest(const std::filesystem::path& dir, std::vector<ManifestEntry> entries);

// Plans handed from the planning stage to the scheduling stage.
struct PlanFile {
  std::string scenario_fingerprint;
  std::string structure;
  std::vector<PlanDecision> plans;
};

std::string plan_file_to_json(const PlanFile& plan);
// Throws std::invalid_argument on malformed input.
PlanFile parse_plan_file(const std::string& text);

// Fixed two-decimal money text and the shortest round-trip text; -0 prints as 0.
std::string money(double value);
std::string exact(double value);

}  // namespace h2chain

#endif  // H2CHAIN_REPORT_HPP
