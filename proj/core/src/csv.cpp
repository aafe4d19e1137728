#include "mks/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mks/container.hpp"

namespace mks::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw FormatError(path + ": ragged CSV row '" + line + "'");
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw FormatError(path + ": empty CSV");
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ostringstream os;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << table.header[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    atomic_write(path, os.str());
}

void write_labels_csv(const std::string& path, const LabelsFile& labels) {
    CsvTable table;
    table.header = {"index", "normalized_c11", "converged", "iterations", "residual"};
    for (std::size_t i = 0; i < labels.index.size(); ++i) {
        table.rows.push_back({std::to_string(labels.index[i]),
                              format_double(labels.normalized_c11[i]),
                              std::to_string(labels.converged[i]),
                              std::to_string(labels.iterations[i]),
                              format_double(labels.residual[i])});
    }
    write_csv(path, table);
}

LabelsFile read_labels_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int ci = table.column("index");
    const int cv = table.column("normalized_c11");
    if (ci < 0 || cv < 0)
        throw FormatError(path + ": labels CSV needs index and normalized_c11 columns");
    const int cc = table.column("converged");
    const int cit = table.column("iterations");
    const int cr = table.column("residual");
    LabelsFile labels;
    for (const auto& row : table.rows) {
        try {
            labels.index.push_back(std::stoi(row[static_cast<std::size_t>(ci)]));
            labels.normalized_c11.push_back(std::stod(row[static_cast<std::size_t>(cv)]));
            labels.converged.push_back(cc >= 0 ? std::stoi(row[static_cast<std::size_t>(cc)]) : 1);
            labels.iterations.push_back(cit >= 0 ? std::stoi(row[static_cast<std::size_t>(cit)]) : 0);
            labels.residual.push_back(cr >= 0 ? std::stod(row[static_cast<std::size_t>(cr)]) : 0.0);
        } catch (const std::exception&) {
            throw FormatError(path + ": unparsable labels row");
        }
    }
    return labels;
}

void write_index_csv(const std::string& path, const std::vector<int>& indices) {
    CsvTable table;
    table.header = {"index"};
    for (int i : indices) table.rows.push_back({std::to_string(i)});
    write_csv(path, table);
}

std::vector<int> read_index_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int ci = table.column("index");
    if (ci < 0) throw FormatError(path + ": expected an index column");
    std::vector<int> out;
    for (const auto& row : table.rows) {
        try {
            out.push_back(std::stoi(row[static_cast<std::size_t>(ci)]));
        } catch (const std::exception&) {
            throw FormatError(path + ": unparsable index row");
        }
    }
    return out;
}

} // namespace mks::io
