#include "epicast/epidata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

#include "epicast/csv.hpp"
#include "epicast/error.hpp"

namespace epicast::epidata {

std::string to_string(RegionRole role) { return role == RegionRole::train ? "train" : "test"; }

RegionRole parse_role(std::string_view text) {
  if (text == "train") return RegionRole::train;
  if (text == "test") return RegionRole::test;
  throw ParseError(fmt::format("unknown role '{}' (expected train or test)", text), 0);
}

Date EpiCurve::last_date() const {
  if (new_cases.empty()) throw ValidationError("curve '" + region_id + "' is empty");
  return date_at(new_cases.size() - 1);
}

std::vector<Date> EpiCurve::dates() const {
  std::vector<Date> out;
  out.reserve(new_cases.size());
  for (std::size_t i = 0; i < new_cases.size(); ++i) out.push_back(date_at(i));
  return out;
}

void EpiCurve::validate() const {
  if (new_cases.empty()) throw ValidationError("curve '" + region_id + "' is empty");
  if (population < 1) throw ValidationError("curve '" + region_id + "' has population < 1");
  for (std::size_t i = 0; i < new_cases.size(); ++i) {
    if (!std::isfinite(new_cases[i]) || new_cases[i] < 0.0) {
      throw ValidationError(fmt::format("curve '{}' has invalid case value {} on {}", region_id,
                                        new_cases[i], format_date(date_at(i))));
    }
  }
}

std::vector<double> NormalizedCurve::denormalize(std::span<const double> v) const {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [this](double x) { return denormalize(x); });
  return out;
}

namespace {

struct Metadata {
  std::string name;
  std::string country;
  std::int64_t population = 1;
  RegionRole role = RegionRole::train;
};

struct Row {
  Date date;
  double cases;
  std::size_t line;
};

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string_view strip_bom(std::string_view line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    return line.substr(3);
  }
  return line;
}

bool skippable(std::string_view line) {
  const auto t = csv::trim(line);
  return t.empty() || t.front() == '#';
}

// Reads lines until the header, checks it, then calls `on_row(fields, line_no)` per record.
template <typename OnRow>
void read_table(std::istream& in, const std::vector<std::string>& header, const char* what,
                OnRow&& on_row) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1) view = strip_bom(view);
    if (skippable(view)) continue;
    if (!csv::split_record(view, fields)) throw ParseError("unterminated quoted field", line_no);
    if (!have_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw ParseError(fmt::format("{} header must be '{}'", what, expected), line_no);
      }
      have_header = true;
      continue;
    }
    on_row(fields, line_no);
  }
  if (!have_header) throw ParseError(fmt::format("{} is missing its header", what), line_no);
}

std::unordered_map<std::string, Metadata> read_metadata(std::istream& in) {
  std::unordered_map<std::string, Metadata> out;
  read_table(in, {"region_id", "name", "population", "country", "role"}, "metadata CSV",
             [&](const std::vector<std::string>& f, std::size_t line_no) {
               if (f.size() != 5) {
                 throw ParseError(fmt::format("expected 5 fields, got {}", f.size()), line_no);
               }
               if (f[0].empty()) throw ParseError("empty region_id", line_no);
               const auto population = parse_number<std::int64_t>(f[2]);
               if (!population) throw ParseError("population is not an integer: " + f[2], line_no);
               if (*population < 1) {
                 throw ValidationError(
                     fmt::format("line {}: region '{}' has population < 1", line_no, f[0]));
               }
               Metadata meta{f[1], f[3], *population, RegionRole::train};
               try {
                 meta.role = parse_role(f[4]);
               } catch (const ParseError& e) {
                 throw ParseError(e.what(), line_no);
               }
               if (!out.emplace(f[0], std::move(meta)).second) {
                 throw ValidationError(
                     fmt::format("line {}: duplicate metadata for region '{}'", line_no, f[0]));
               }
             });
  return out;
}

IngestResult ingest(std::istream& cases_csv, std::istream& metadata_csv, bool strict) {
  const auto metadata = read_metadata(metadata_csv);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> rows;
  std::map<std::string, std::string> failed;

  auto fail = [&](const std::string& region, auto&& make_error) {
    if (strict) throw make_error();
    failed.emplace(region, make_error().what());
  };

  read_table(cases_csv, {"region_id", "date", "new_cases"}, "cases CSV",
             [&](const std::vector<std::string>& f, std::size_t line_no) {
               if (f.empty() || f[0].empty()) throw ParseError("empty region_id", line_no);
               const std::string& region = f[0];
               if (!rows.contains(region)) {
                 order.push_back(region);
                 rows[region];
               }
               if (f.size() != 3) {
                 fail(region, [&] {
                   return ParseError(fmt::format("expected 3 fields, got {}", f.size()), line_no);
                 });
                 return;
               }
               const auto date = parse_date(f[1]);
               if (!date) {
                 fail(region, [&] { return ParseError("invalid ISO-8601 date: " + f[1], line_no); });
                 return;
               }
               const auto cases = parse_number<double>(f[2]);
               if (!cases || !std::isfinite(*cases)) {
                 fail(region, [&] { return ParseError("invalid case count: " + f[2], line_no); });
                 return;
               }
               if (*cases < 0.0) {
                 fail(region, [&] {
                   return ValidationError(fmt::format("line {}: negative case value {} for '{}'",
                                                      line_no, f[2], region));
                 });
                 return;
               }
               rows[region].push_back({*date, *cases, line_no});
             });

  IngestResult result;
  for (const auto& region : order) {
    if (auto it = failed.find(region); it != failed.end()) {
      result.errors.push_back({region, it->second});
      continue;
    }
    const auto meta = metadata.find(region);
    if (meta == metadata.end()) {
      auto err = [&] {
        return MissingMetadataError("region '" + region + "' has no metadata row");
      };
      if (strict) throw err();
      result.errors.push_back({region, err().what()});
      continue;
    }

    auto& region_rows = rows[region];
    std::stable_sort(region_rows.begin(), region_rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    const auto dup = std::adjacent_find(region_rows.begin(), region_rows.end(),
                                        [](const Row& a, const Row& b) { return a.date == b.date; });
    if (dup != region_rows.end()) {
      auto err = [&] {
        return ValidationError(fmt::format("line {}: duplicate date {} for region '{}'",
                                           std::next(dup)->line, format_date(dup->date), region));
      };
      if (strict) throw err();
      result.errors.push_back({region, err().what()});
      continue;
    }

    EpiCurve curve;
    curve.region_id = region;
    curve.name = meta->second.name;
    curve.country_code = meta->second.country;
    curve.population = meta->second.population;
    curve.role = meta->second.role;
    curve.start = region_rows.front().date;
    const auto span = days_between(curve.start, region_rows.back().date) + 1;
    curve.new_cases.assign(static_cast<std::size_t>(span), 0.0);
    for (std::size_t i = 0; i < region_rows.size(); ++i) {
      const auto& row = region_rows[i];
      curve.new_cases[static_cast<std::size_t>(days_between(curve.start, row.date))] = row.cases;
      if (i > 0) {
        const auto gap = days_between(region_rows[i - 1].date, row.date) - 1;
        if (gap > 0) {
          curve.warnings.push_back(fmt::format("filled {} missing day(s) between {} and {} with 0 cases",
                                               gap, format_date(region_rows[i - 1].date),
                                               format_date(row.date)));
        }
      }
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

}  // namespace

std::vector<EpiCurve> ingest_cases(std::istream& cases_csv, std::istream& metadata_csv) {
  return ingest(cases_csv, metadata_csv, true).curves;
}

IngestResult ingest_cases_lenient(std::istream& cases_csv, std::istream& metadata_csv) {
  return ingest(cases_csv, metadata_csv, false);
}

std::vector<double> incidence_per_million(const EpiCurve& curve) {
  if (curve.population < 1) throw ValidationError("population must be >= 1");
  const double per = 1e6 / static_cast<double>(curve.population);
  std::vector<double> out(curve.new_cases.size());
  std::transform(curve.new_cases.begin(), curve.new_cases.end(), out.begin(),
                 [per](double c) { return c * per; });
  return out;
}

NormalizedCurve normalize(std::span<const double> values, std::string source) {
  if (values.empty()) throw ValidationError("cannot normalize an empty series");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  NormalizedCurve out;
  out.scale = *hi;
  out.offset = *lo;
  out.source = std::move(source);
  out.values.assign(values.size(), 0.0);
  const double span = *hi - *lo;
  if (span > 0.0) {
    std::transform(values.begin(), values.end(), out.values.begin(),
                   [&](double v) { return std::clamp((v - *lo) / span, 0.0, 1.0); });
  }
  return out;
}

std::vector<Sample> extract_samples(std::span<const double> values, std::size_t input_len,
                                    std::size_t output_len, const std::string& region_id,
                                    Date start) {
  const std::size_t size = input_len + output_len;
  if (size == 0) throw ValidationError("sample size must be >= 1");
  std::vector<Sample> out;
  const std::size_t count = values.size() / size;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(k * size);
    Sample s;
    s.input_window.assign(first, first + static_cast<std::ptrdiff_t>(input_len));
    s.target_window.assign(first + static_cast<std::ptrdiff_t>(input_len),
                           first + static_cast<std::ptrdiff_t>(size));
    s.region_id = region_id;
    s.start_date = add_days(start, static_cast<long long>(k * size));
    out.push_back(std::move(s));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> temporal_split(const EpiCurve& curve,
                                                                   Date split) {
  const auto offset = days_between(curve.start, split);
  const auto n = static_cast<long long>(curve.size());
  const auto cut = static_cast<std::ptrdiff_t>(std::clamp(offset, 0LL, n));
  return {std::vector<double>(curve.new_cases.begin(), curve.new_cases.begin() + cut),
          std::vector<double>(curve.new_cases.begin() + cut, curve.new_cases.end())};
}

EpiCurve slice(const EpiCurve& curve, std::size_t from, std::size_t count) {
  if (from > curve.size()) from = curve.size();
  count = std::min(count, curve.size() - from);
  EpiCurve out = curve;
  out.start = curve.date_at(from);
  out.new_cases.assign(curve.new_cases.begin() + static_cast<std::ptrdiff_t>(from),
                       curve.new_cases.begin() + static_cast<std::ptrdiff_t>(from + count));
  return out;
}

}  // namespace epicast::epidata
