#pragma once

#include "labelstack/table.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labelstack {

/// Fields treated as Missing on input: empty, "NA", "?".
bool is_missing_token(std::string_view field) noexcept;

/// Split RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and newlines. Throws DataError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

/// Parse CSV text with a header row. A given schema must name the same
/// columns in the same order; otherwise it is inferred (a column is
/// Continuous iff every present field parses as a real number).
DataTable parse_csv(std::string_view text, const std::optional<Schema>& schema = std::nullopt);

DataTable load_csv(const std::filesystem::path& path,
                   const std::optional<Schema>& schema = std::nullopt);

/// Writes doubles in shortest round-trip form and missing cells as "NA".
void write_csv(std::ostream& out, const DataTable& table);
void save_csv(const std::filesystem::path& path, const DataTable& table);

/// Optional JSON sidecar: [{"name":..., "kind":"continuous"|"categorical",
/// "categories":[...]}, ...]
Schema parse_schema_json(std::string_view text);
Schema load_schema_json(const std::filesystem::path& path);
std::string schema_to_json(const Schema& schema);

/// Quote a field if it contains a delimiter, quote or newline.
std::string csv_escape(std::string_view field);

/// Shortest representation that parses back to the same double.
std::string format_roundtrip(double v);

}  // namespace labelstack
