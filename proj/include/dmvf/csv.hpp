#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dmvf/errors.hpp"

namespace dmvf {

// One canonical float formatting so identical values always print to
// identical bytes (reproducibility of every emitted CSV is a contract).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

class CsvWriter {
public:
    void header(const std::vector<std::string>& cols) { row_strings(cols); }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open for writing: " + path);
        f << out_.str();
        if (!f) throw IoError("write failed: " + path);
    }

private:
    std::ostringstream out_;
};

}  // namespace dmvf
