#include "labelstack/csv.hpp"

#include "labelstack/error.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace labelstack {

namespace {

std::optional<double> parse_real(std::string_view s)
{
    // from_chars rejects leading whitespace and '+'; accept both.
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

bool is_missing_token(std::string_view field) noexcept
{
    return field.empty() || field == "NA" || field == "?";
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool record_has_content = false;

    // Strip UTF-8 BOM.
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            in_quotes = true;
            record_has_content = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            record_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            if (record_has_content || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            field.clear();
            record.clear();
            record_has_content = false;
            break;
        default:
            field.push_back(ch);
            record_has_content = true;
        }
    }
    if (in_quotes) {
        throw DataError("unterminated quoted field");
    }
    if (record_has_content || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

DataTable parse_csv(std::string_view text, const std::optional<Schema>& schema)
{
    auto records = parse_csv_records(text);
    if (records.empty()) {
        throw DataError("CSV has no header row");
    }
    const auto& header = records.front();
    const std::size_t p = header.size();
    const std::size_t n = records.size() - 1;

    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != p) {
            throw DataError("ragged CSV: data row " + std::to_string(i - 1) + " has " +
                            std::to_string(records[i].size()) + " fields, header has " +
                            std::to_string(p));
        }
    }

    Schema cols;
    if (schema) {
        if (schema->size() != p) {
            throw DataError("schema has " + std::to_string(schema->size()) + " columns, CSV has " +
                            std::to_string(p));
        }
        for (std::size_t c = 0; c < p; ++c) {
            if ((*schema)[c].name != header[c]) {
                throw DataError("schema column " + std::to_string(c) + " is '" + (*schema)[c].name +
                                "', CSV header is '" + header[c] + "'");
            }
        }
        cols = *schema;
    } else {
        for (std::size_t c = 0; c < p; ++c) {
            bool numeric = true;
            std::vector<std::string> cats;
            std::unordered_map<std::string, std::size_t> seen;
            for (std::size_t i = 1; i < records.size(); ++i) {
                const auto& f = records[i][c];
                if (is_missing_token(f)) {
                    continue;
                }
                if (numeric && !parse_real(f)) {
                    numeric = false;
                }
                if (seen.emplace(f, cats.size()).second) {
                    cats.push_back(f);
                }
            }
            cols.push_back(numeric ? ColumnSchema::continuous(header[c])
                                   : ColumnSchema::categorical(header[c], std::move(cats)));
        }
    }

    std::vector<std::unordered_map<std::string, std::size_t>> codes(p);
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t k = 0; k < cols[c].categories.size(); ++k) {
            codes[c].emplace(cols[c].categories[k], k);
        }
    }

    DataTable table(cols, n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = records[r + 1];
        for (std::size_t c = 0; c < p; ++c) {
            const auto& f = rec[c];
            if (is_missing_token(f)) {
                continue;
            }
            if (cols[c].is_categorical()) {
                auto it = codes[c].find(f);
                if (it == codes[c].end()) {
                    throw DataError("schema violation: unknown category '" + f + "' in column '" +
                                    cols[c].name + "' at data row " + std::to_string(r));
                }
                table.set(r, c, static_cast<double>(it->second));
            } else {
                auto v = parse_real(f);
                if (!v) {
                    throw DataError("schema violation: '" + f + "' is not a number in column '" +
                                    cols[c].name + "' at data row " + std::to_string(r));
                }
                table.set(r, c, *v);
            }
        }
    }
    return table;
}

DataTable load_csv(const std::filesystem::path& path, const std::optional<Schema>& schema)
{
    return parse_csv(read_file(path), schema);
}

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out.push_back('"');
        }
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string format_roundtrip(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const DataTable& table)
{
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        out << (c ? "," : "") << csv_escape(table.column(c).name);
    }
    out << '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < table.n_cols(); ++c) {
            if (c) {
                out << ',';
            }
            if (table.is_missing(r, c)) {
                out << "NA";
            } else if (table.column(c).is_categorical()) {
                out << csv_escape(table.column(c).categories[table.category(r, c)]);
            } else {
                out << format_roundtrip(table.value(r, c));
            }
        }
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const DataTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_csv(out, table);
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

Schema parse_schema_json(std::string_view text)
{
    Schema schema;
    try {
        const auto doc = nlohmann::json::parse(text);
        if (!doc.is_array()) {
            throw DataError("schema JSON must be a list of columns");
        }
        for (const auto& item : doc) {
            const auto name = item.at("name").get<std::string>();
            const auto kind = item.at("kind").get<std::string>();
            if (kind == "continuous") {
                schema.push_back(ColumnSchema::continuous(name));
            } else if (kind == "categorical") {
                schema.push_back(ColumnSchema::categorical(
                    name, item.at("categories").get<std::vector<std::string>>()));
            } else {
                throw DataError("unknown column kind '" + kind + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad schema JSON: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(e.what());
    }
    return schema;
}

Schema load_schema_json(const std::filesystem::path& path)
{
    return parse_schema_json(read_file(path));
}

std::string schema_to_json(const Schema& schema)
{
    auto doc = nlohmann::json::array();
    for (const auto& c : schema) {
        nlohmann::json item{{"name", c.name}, {"kind", c.is_categorical() ? "categorical" : "continuous"}};
        if (c.is_categorical()) {
            item["categories"] = c.categories;
        }
        doc.push_back(std::move(item));
    }
    return doc.dump(2);
}

}  // namespace labelstack
