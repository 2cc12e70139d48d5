#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "serw/config.hpp"

namespace serw::cli {

/// A double at 17 significant digits (round-trip exact) with '.' as the
/// decimal point regardless of locale. Non-finite values print as nan, inf
/// and -inf.
std::string format_double(double x);

/// Comma-separated file with a header row. Cells are written through
/// format_double or std::to_chars, never through iostream formatting.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(double x);
  CsvWriter& cell(std::int64_t x);
  CsvWriter& cell(std::string_view s);
  void end_row();

  /// Flushes and throws std::runtime_error if any write failed.
  void close();

 private:
  void separator();

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// A JSON number, or null when x is not finite.
Json json_number(double x);

void write_json(const std::filesystem::path& path, const Json& doc);

/// Creates the output directory and writes effective_config.json (the
/// configuration minus output.dir) into it.
std::filesystem::path prepare_output(const RunConfig& cfg);

/// Columns of a CSV file keyed by header name; used to read sweep results
/// back in. Throws ConfigError on malformed input.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::size_t column) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace serw::cli
