#include "tristate/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tristate {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), n_cols_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != n_cols_)
        throw IoError("csv: row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += format_double(values[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
    if (cells.size() != n_cols_)
        throw IoError("csv: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    write_text_file_atomic(path_, buffer_);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path);
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config_path;
    j["out_dir"] = out_dir;
    j["version"] = version;
    j["duration_seconds"] = duration_seconds;
    j["stage_seconds"] = stage_seconds;
    j["outputs"] = outputs;
    j["notes"] = notes;
    write_text_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace tristate
