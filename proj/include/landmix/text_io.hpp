#pragma once

// Small text-format helpers shared by the loaders and exporters: a
// comma-delimited table reader, a key = value config reader, shortest
// round-trip number formatting and atomic file replacement.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace landmix {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws MissingColumn.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

// Lines starting with '#' and blank lines are skipped. Fields are trimmed;
// a field wrapped in double quotes has the quotes removed.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

std::vector<std::string> split_fields(std::string_view line, char delim = ',');
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

// Writes to a sibling temp file then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Flat `key = value` file; '#' starts a comment. Later keys override earlier.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  // Whitespace- or comma-separated numbers.
  std::vector<double> get_doubles(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  // Sorted `key=value` lines; the input to the config hash.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> parse_number_list(std::string_view text, const std::string& context);

}  // namespace landmix
