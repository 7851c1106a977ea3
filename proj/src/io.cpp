#include "bsdekit/io.hpp"

#include "bsdekit/common.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace bsdekit {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

JsonValue JsonValue::number(double v) {
    JsonValue j;
    j.kind_ = Kind::Number;
    j.num_ = v;
    return j;
}
JsonValue JsonValue::integer(std::int64_t v) {
    JsonValue j;
    j.kind_ = Kind::Integer;
    j.int_ = v;
    return j;
}
JsonValue JsonValue::boolean(bool v) {
    JsonValue j;
    j.kind_ = Kind::Bool;
    j.bool_ = v;
    return j;
}
JsonValue JsonValue::string(std::string v) {
    JsonValue j;
    j.kind_ = Kind::String;
    j.str_ = std::move(v);
    return j;
}
JsonValue JsonValue::array() {
    JsonValue j;
    j.kind_ = Kind::Array;
    return j;
}
JsonValue JsonValue::object() {
    JsonValue j;
    j.kind_ = Kind::Object;
    return j;
}

JsonValue& JsonValue::push(JsonValue v) {
    arr_.push_back(std::move(v));
    return *this;
}
JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
    obj_.emplace_back(key, std::move(v));
    return *this;
}
JsonValue& JsonValue::set(const std::string& key, double v) {
    return set(key, number(v));
}
JsonValue& JsonValue::set(const std::string& key, std::int64_t v) {
    return set(key, integer(v));
}
JsonValue& JsonValue::set(const std::string& key, int v) {
    return set(key, integer(static_cast<std::int64_t>(v)));
}
JsonValue& JsonValue::set(const std::string& key, bool v) {
    return set(key, boolean(v));
}
JsonValue& JsonValue::set(const std::string& key, const std::string& v) {
    return set(key, string(v));
}
JsonValue& JsonValue::set(const std::string& key, const char* v) {
    return set(key, string(std::string(v)));
}

namespace {
void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
        }
    }
    out += '"';
}
void indent_to(std::string& out, int indent, int depth) {
    if (indent <= 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent) * depth, ' ');
}
} // namespace

void JsonValue::write(std::string& out, int indent, int depth) const {
    switch (kind_) {
    case Kind::Number:
        if (std::isfinite(num_)) {
            out += fmt17(num_);
        } else {
            write_escaped(out, fmt17(num_));
        }
        break;
    case Kind::Integer: out += std::to_string(int_); break;
    case Kind::Bool: out += bool_ ? "true" : "false"; break;
    case Kind::String: write_escaped(out, str_); break;
    case Kind::Array: {
        out += '[';
        for (std::size_t i = 0; i < arr_.size(); ++i) {
            if (i) out += ',';
            indent_to(out, indent, depth + 1);
            arr_[i].write(out, indent, depth + 1);
        }
        if (!arr_.empty()) indent_to(out, indent, depth);
        out += ']';
        break;
    }
    case Kind::Object: {
        out += '{';
        for (std::size_t i = 0; i < obj_.size(); ++i) {
            if (i) out += ',';
            indent_to(out, indent, depth + 1);
            write_escaped(out, obj_[i].first);
            out += indent > 0 ? ": " : ":";
            obj_[i].second.write(out, indent, depth + 1);
        }
        if (!obj_.empty()) indent_to(out, indent, depth);
        out += '}';
        break;
    }
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    write(out, indent, 0);
    out += '\n';
    return out;
}

struct CsvWriter::Impl {
    std::ofstream f;
};

CsvWriter::CsvWriter(std::string path, std::vector<std::string> header)
    : impl_(new Impl) {
    impl_->f.open(path, std::ios::binary);
    if (!impl_->f) throw ConfigError("cannot open output file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) impl_->f << ',';
        impl_->f << header[i];
    }
    impl_->f << '\n';
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<double>& cells) {
    auto& f = impl_->f;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) f << ',';
        f << fmt17(cells[i]);
    }
    f << '\n';
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
    auto& f = impl_->f;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) f << ',';
        f << cells[i];
    }
    f << '\n';
}

void CsvWriter::close() {
    impl_->f.close();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << content;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create output directory: " + path);
}

} // namespace bsdekit
