#include "hogl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hogl/errors.hpp"

namespace hogl {

namespace {

bool parse_double(const std::string& token, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(token, &used);
        while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
        return used == token.size();
    } catch (...) {
        return false;
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> tokens;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) tokens.push_back(token);
    if (!line.empty() && line.back() == ',') tokens.emplace_back();
    return tokens;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tokens = split_csv_line(line);
        std::vector<double> row(tokens.size());
        bool numeric = true;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!parse_double(tokens[i], row[i])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw Error("non-numeric value in CSV file: " + path);
        }
        first = false;
        if (width == 0) width = row.size();
        if (row.size() != width) throw Error("ragged rows in CSV file: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("CSV file has no data rows: " + path);

    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open file for writing: " + tmp);
        out << content;
        if (!out) throw Error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw Error("cannot rename " + tmp + " to " + path);
    }
}

std::vector<std::string> numbered_columns(const std::string& prefix, int count) {
    std::vector<std::string> names;
    names.reserve(count);
    for (int i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
    return names;
}

void write_csv_matrix(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& column_names) {
    if (static_cast<Index>(column_names.size()) != m.cols()) {
        throw DimensionMismatch("write_csv_matrix: header width mismatch");
    }
    std::string content;
    for (std::size_t j = 0; j < column_names.size(); ++j) {
        if (j > 0) content += ',';
        content += column_names[j];
    }
    content += '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) content += ',';
            content += format_double(m(i, j));
        }
        content += '\n';
    }
    write_text_atomic(path, content);
}

}  // namespace hogl
