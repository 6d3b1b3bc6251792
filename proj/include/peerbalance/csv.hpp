#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace peerbalance::csv {

/// 17 significant digits, which round-trips any finite double.
std::string format_double(double x);
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws if absent.
  std::size_t column(std::string_view name) const;
};

/// Writes `header` then `rows`, comma-separated, '\n' line endings.
void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

/// Minimal reader for the files this library writes (no quoting).
Table read(const std::filesystem::path& path);

}  // namespace peerbalance::csv
