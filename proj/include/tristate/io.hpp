#pragma once

#include <map>
#include <string>
#include <vector>

#include "tristate/types.hpp"

namespace tristate {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// CSV sink with fixed columns; floats are serialized with 17 significant
/// digits so identical runs produce byte-identical bodies.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    ~CsvWriter();

    void row(const std::vector<double>& values);
    /// Mixed row: numeric cells plus preformatted text cells.
    void raw_row(const std::vector<std::string>& cells);
    void close();

private:
    std::string path_;
    std::string buffer_;
    std::size_t n_cols_ = 0;
    bool closed_ = false;
};

std::string format_double(double v);

/// Run manifest written atomically (temp file + rename) at run end.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::string version;
    double duration_seconds = 0.0;
    std::map<std::string, double> stage_seconds;
    std::vector<std::string> outputs;  // relative paths
    std::map<std::string, std::string> notes;

    void write(const std::string& path) const;
};

std::string read_text_file(const std::string& path);
void write_text_file_atomic(const std::string& path, const std::string& text);

constexpr const char* kToolVersion = "0.1.0";

}  // namespace tristate
