#pragma once

// Deterministic text output: every float is printed with %.17g so identical
// configs produce byte-identical CSV/JSON artifacts, and every file carries
// the FNV-1a hash of the config that produced it.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kswitten/errors.hpp"

namespace ksw {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash_hex(std::string_view raw) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(raw)));
    return buf;
}

// Minimal ordered JSON value for output (input parsing uses nlohmann).
class JsonValue {
public:
    static JsonValue object() { JsonValue v; v.kind_ = Kind::Object; return v; }
    static JsonValue array() { JsonValue v; v.kind_ = Kind::Array; return v; }
    static JsonValue number(double x) { JsonValue v; v.kind_ = Kind::Number; v.num_ = x; return v; }
    static JsonValue integer(long long x) { JsonValue v; v.kind_ = Kind::Integer; v.int_ = x; return v; }
    static JsonValue boolean(bool b) { JsonValue v; v.kind_ = Kind::Bool; v.bool_ = b; return v; }
    static JsonValue string(std::string s) { JsonValue v; v.kind_ = Kind::String; v.str_ = std::move(s); return v; }

    static JsonValue number_array(const std::vector<double>& xs) {
        JsonValue v = array();
        for (double x : xs) v.push_back(number(x));
        return v;
    }

    JsonValue& add(const std::string& key, JsonValue v) {
        members_.emplace_back(key, std::make_shared<JsonValue>(std::move(v)));
        return *this;
    }
    JsonValue& push_back(JsonValue v) {
        items_.push_back(std::make_shared<JsonValue>(std::move(v)));
        return *this;
    }

    void write(std::string& out, int indent = 0) const {
        const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        const std::string pad1(static_cast<std::size_t>(indent + 1) * 2, ' ');
        switch (kind_) {
        case Kind::Object: {
            if (members_.empty()) { out += "{}"; return; }
            out += "{\n";
            for (std::size_t i = 0; i < members_.size(); ++i) {
                out += pad1;
                out += '"';
                out += members_[i].first;
                out += "\": ";
                members_[i].second->write(out, indent + 1);
                if (i + 1 < members_.size()) out += ',';
                out += '\n';
            }
            out += pad;
            out += '}';
            break;
        }
        case Kind::Array: {
            if (items_.empty()) { out += "[]"; return; }
            bool scalars = true;
            for (const auto& it : items_)
                scalars = scalars && it->kind_ != Kind::Object && it->kind_ != Kind::Array;
            if (scalars) {
                out += '[';
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    items_[i]->write(out, indent);
                    if (i + 1 < items_.size()) out += ", ";
                }
                out += ']';
            } else {
                out += "[\n";
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    out += pad1;
                    items_[i]->write(out, indent + 1);
                    if (i + 1 < items_.size()) out += ',';
                    out += '\n';
                }
                out += pad;
                out += ']';
            }
            break;
        }
        case Kind::Number: {
            const std::string s = fmt17(num_);
            // JSON has no inf/nan tokens; emit as strings
            if (s.find("inf") != std::string::npos || s.find("nan") != std::string::npos) {
                out += '"';
                out += s;
                out += '"';
            } else {
                out += s;
            }
            break;
        }
        case Kind::Integer: out += std::to_string(int_); break;
        case Kind::Bool: out += bool_ ? "true" : "false"; break;
        case Kind::String:
            out += '"';
            for (char c : str_) {
                if (c == '"' || c == '\\') { out += '\\'; out += c; }
                else if (c == '\n') out += "\\n";
                else out += c;
            }
            out += '"';
            break;
        }
    }

    std::string dump() const {
        std::string out;
        write(out);
        out += '\n';
        return out;
    }

private:
    enum class Kind { Object, Array, Number, Integer, Bool, String };
    Kind kind_ = Kind::Object;
    double num_ = 0.0;
    long long int_ = 0;
    bool bool_ = false;
    std::string str_;
    std::vector<std::pair<std::string, std::shared_ptr<JsonValue>>> members_;
    std::vector<std::shared_ptr<JsonValue>> items_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericError("cannot open output file: " + path);
    f << content;
    if (!f) throw NumericError("failed writing output file: " + path);
}

// CSV with a hash comment line, a header, and %.17g cells.
class CsvBuilder {
public:
    CsvBuilder(std::string hash, const std::vector<std::string>& columns) {
        body_ += "# config_hash=" + hash + "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            body_ += columns[i];
            if (i + 1 < columns.size()) body_ += ',';
        }
        body_ += '\n';
    }

    void row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            body_ += fmt17(cells[i]);
            if (i + 1 < cells.size()) body_ += ',';
        }
        body_ += '\n';
    }

    const std::string& str() const { return body_; }

private:
    std::string body_;
};

} // namespace ksw
