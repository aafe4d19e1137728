#pragma once

#include <string>
#include <vector>

#include "mks/errors.hpp"

namespace mks::io {

// Round-trip-exact float formatting shared by every CSV artifact.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Solver labels: index,normalized_c11,converged,iterations,residual.
struct LabelsFile {
    std::vector<int> index;
    std::vector<double> normalized_c11;
    std::vector<int> converged;
    std::vector<int> iterations;
    std::vector<double> residual;
};

void write_labels_csv(const std::string& path, const LabelsFile& labels);
LabelsFile read_labels_csv(const std::string& path);

void write_index_csv(const std::string& path, const std::vector<int>& indices);
std::vector<int> read_index_csv(const std::string& path);

} // namespace mks::io
