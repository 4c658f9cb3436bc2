#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epicast/calendar.hpp"

namespace epicast::epidata {

enum class RegionRole { train, test };

std::string to_string(RegionRole role);
RegionRole parse_role(std::string_view text);

/// One region's contiguous daily new-case series.
///
/// Dates are implicit: day i is `start + i`. This makes the no-gap invariant
/// hold by construction.
struct EpiCurve {
  std::string region_id;
  std::string name;
  std::string country_code;
  RegionRole role = RegionRole::train;
  std::int64_t population = 1;
  Date start{};
  std::vector<double> new_cases;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return new_cases.size(); }
  Date date_at(std::size_t i) const { return add_days(start, static_cast<long long>(i)); }
  Date last_date() const;
  std::vector<Date> dates() const;

  /// Throws ValidationError if any invariant is broken.
  void validate() const;
};

struct NormalizedCurve {
  std::vector<double> values;
  double scale = 0.0;   // original max
  double offset = 0.0;  // original min
  std::string source;

  double denormalize(double v) const { return v * (scale - offset) + offset; }
  std::vector<double> denormalize(std::span<const double> v) const;
};

struct Sample {
  std::vector<double> input_window;
  std::vector<double> target_window;
  std::string region_id;
  Date start_date{};
};

struct RegionError {
  std::string region_id;
  std::string message;
};

struct IngestResult {
  std::vector<EpiCurve> curves;
  std::vector<RegionError> errors;
};

/// Reads `region_id,date,new_cases` rows plus `region_id,name,population,country,role`
/// metadata. Blank lines and lines starting with '#' are ignored.
///
/// Strict variant: the first problem is thrown (ParseError with line number,
/// MissingMetadataError, ValidationError).
std::vector<EpiCurve> ingest_cases(std::istream& cases_csv, std::istream& metadata_csv);

/// Batch variant: problems attributable to one region are collected per region
/// and that region is dropped; problems with the metadata file or the header
/// still throw.
IngestResult ingest_cases_lenient(std::istream& cases_csv, std::istream& metadata_csv);

std::vector<double> incidence_per_million(const EpiCurve& curve);

/// Min-max scaling to [0,1]. A constant series maps to all zeros.
NormalizedCurve normalize(std::span<const double> values, std::string source = {});

inline constexpr std::size_t kInputDays = 50;
inline constexpr std::size_t kOutputDays = 10;

/// Non-overlapping (input, target) windows, left-aligned from index 0.
/// The trailing remainder shorter than one sample is discarded.
std::vector<Sample> extract_samples(std::span<const double> values,
                                    std::size_t input_len = kInputDays,
                                    std::size_t output_len = kOutputDays,
                                    const std::string& region_id = {}, Date start = {});

/// (values strictly before `split`, values on or after `split`).
std::pair<std::vector<double>, std::vector<double>> temporal_split(const EpiCurve& curve,
                                                                   Date split);

/// Copy of `curve` restricted to [from, from+count).
EpiCurve slice(const EpiCurve& curve, std::size_t from, std::size_t count);

}  // namespace epicast::epidata
