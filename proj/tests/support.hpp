#pragma once

#include "labelstack/csv.hpp"
#include "labelstack/random.hpp"
#include "labelstack/table.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace labelstack::testing {

inline std::filesystem::path source_dir()
{
    return LABELSTACK_SOURCE_DIR;
}

inline DataTable iris_table()
{
    return load_csv(source_dir() / "data" / "iris.csv");
}

inline std::pair<DataTable, LabelVector> iris()
{
    return extract_label(iris_table(), "class");
}

/// Random complete table with a mix of continuous and categorical columns.
/// Categorical columns use every declared category at least once when n
/// allows it; continuous columns carry a shared latent factor.
inline DataTable random_mixed_table(std::size_t n, std::size_t p, Rng& rng)
{
    Schema schema;
    std::vector<bool> categorical(p);
    for (std::size_t c = 0; c < p; ++c) {
        categorical[c] = rng.uniform() < 0.35;
        if (categorical[c]) {
            const std::size_t k = 2 + rng.below(3);
            std::vector<std::string> cats;
            for (std::size_t j = 0; j < k; ++j) {
                cats.push_back("c" + std::to_string(c) + "_" + std::to_string(j));
            }
            schema.push_back(ColumnSchema::categorical("f" + std::to_string(c), std::move(cats)));
        } else {
            schema.push_back(ColumnSchema::continuous("f" + std::to_string(c)));
        }
    }
    DataTable t(schema, n);
    for (std::size_t r = 0; r < n; ++r) {
        const double latent = rng.uniform(-1.0, 1.0);
        for (std::size_t c = 0; c < p; ++c) {
            if (categorical[c]) {
                const std::size_t k = schema[c].category_count();
                t.set(r, c, static_cast<double>(r < k ? r : rng.below(k)));
            } else {
                t.set(r, c, latent * static_cast<double>(c + 1) + rng.uniform(-0.5, 0.5));
            }
        }
    }
    return t;
}

}  // namespace labelstack::testing

namespace labelstack::testing {

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("labelstack_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::size_t line_count(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace labelstack::testing
