#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evdeg/error.hpp"

namespace evdeg {

/// Shortest round-trip decimal form; deterministic, locale-free.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw error(errc::numeric, "failed to format double");
    return std::string(buf, ptr);
}

/// RFC-4180-style field quoting: fields containing separators, quotes or
/// line breaks are wrapped in double quotes with inner quotes doubled.
inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw error(errc::io, "cannot open '" + path + "' for writing");
        path_ = path;
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << '\n';
        if (!out_) throw error(errc::io, "write failed on '" + path_ + "'");
    }

private:
    std::ofstream out_;
    std::string path_;
};

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw error(errc::io, "write failed on '" + path + "'");
}

inline void write_json_file(const std::string& path, const nlohmann::json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

/// One manifest per CLI invocation: enough to reproduce every listed output
/// byte for byte. The timestamp lives only here, never in output files.
struct RunManifest {
    std::string command;
    std::string input_path;
    std::uint64_t seed = 0;
    bool seeded = false;
    std::map<std::string, std::string> parameters;
    std::string version;
    std::vector<std::string> outputs;
    std::string timestamp;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["command"] = command;
        j["input_path"] = input_path;
        if (seeded) j["seed"] = seed;
        j["parameters"] = parameters;
        j["version"] = version;
        j["outputs"] = outputs;
        j["timestamp"] = timestamp;
        return j;
    }
};

}  // namespace evdeg
