#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace bsdekit {

// Shortest exact-ish decimal: %.17g, which round-trips IEEE doubles.
// Non-finite values render as "inf", "-inf", "nan".
std::string fmt17(double v);

// Deterministic JSON value tree: object keys keep insertion order, all
// numbers are emitted through fmt17 (non-finite as quoted strings).
class JsonValue {
public:
    static JsonValue number(double v);
    static JsonValue integer(std::int64_t v);
    static JsonValue boolean(bool v);
    static JsonValue string(std::string v);
    static JsonValue array();
    static JsonValue object();

    JsonValue& push(JsonValue v);                       // arrays
    JsonValue& set(const std::string& key, JsonValue v); // objects
    JsonValue& set(const std::string& key, double v);
    JsonValue& set(const std::string& key, std::int64_t v);
    JsonValue& set(const std::string& key, int v);
    JsonValue& set(const std::string& key, bool v);
    JsonValue& set(const std::string& key, const std::string& v);
    JsonValue& set(const std::string& key, const char* v);

    std::string dump(int indent = 2) const;

private:
    enum class Kind { Number, Integer, Bool, String, Array, Object };
    Kind kind_ = Kind::Object;
    double num_ = 0.0;
    std::int64_t int_ = 0;
    bool bool_ = false;
    std::string str_;
    std::vector<JsonValue> arr_;
    std::vector<std::pair<std::string, JsonValue>> obj_;

    void write(std::string& out, int indent, int depth) const;
};

// CSV with a fixed header; every numeric cell goes through fmt17.
class CsvWriter {
public:
    CsvWriter(std::string path, std::vector<std::string> header);
    ~CsvWriter();
    void row(const std::vector<double>& cells);
    void row_mixed(const std::vector<std::string>& cells);
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

void write_text_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

} // namespace bsdekit
