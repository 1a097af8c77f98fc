#pragma once

// Deterministic text output: CSV with '#' metadata comments and JSON sidecar
// documents. Numbers are printed with %.17g so every double round-trips and
// reruns produce byte-identical files; no timestamps or machine identifiers
// are ever written.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

#include <json.hpp>

namespace fluxion {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot open output file " + path);
        comment("fluxion " + std::string(constants::version));
    }

    // '# key: value' metadata line.
    void metadata(const std::string& key, const std::string& value) {
        out_ << "# " << key << ": " << value << "\n";
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void header(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ",";
            out_ << columns[i];
        }
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << format_double(values[i]);
        }
        out_ << "\n";
    }

    // Mixed row for columns that are integers or flags.
    void raw_row(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << values[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file " + path);
    out << doc.dump(2) << "\n";
}

} // namespace fluxion
