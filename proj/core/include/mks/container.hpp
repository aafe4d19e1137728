#pragma once

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "mks/grid.hpp"

namespace mks::io {

// MKSD dataset container: magic "MKSD", u16 version = 1, u32 count,
// u16 height, u16 width, then count*height*width bytes of 0/1, row-major.
// All integers little-endian.
void write_mksd(const std::string& path, const std::vector<UnitCell>& cells);
std::vector<UnitCell> read_mksd(const std::string& path);

// MKSM model container: u32 header length, JSON header naming f64 arrays
// (shape + byte offset into the payload), then the concatenated
// little-endian f64 payload. Array data is row-major.
class ArrayBundle {
public:
    void set(const std::string& name, const Eigen::MatrixXd& m);
    void set(const std::string& name, const Eigen::VectorXd& v);
    void set_meta(const std::string& key, const std::string& value);
    void set_meta(const std::string& key, double value);

    bool has(const std::string& name) const;
    Eigen::MatrixXd matrix(const std::string& name) const;
    Eigen::VectorXd vector(const std::string& name) const;

    bool has_meta(const std::string& key) const;
    std::string meta_string(const std::string& key) const;
    double meta_number(const std::string& key) const;

    const std::map<std::string, std::pair<std::vector<long>, std::vector<double>>>&
    arrays() const { return arrays_; }
    const std::map<std::string, std::string>& meta_strings() const { return meta_strings_; }
    const std::map<std::string, double>& meta_numbers() const { return meta_numbers_; }

    void set_raw(const std::string& name, std::vector<long> shape,
                 std::vector<double> data);

private:
    std::map<std::string, std::pair<std::vector<long>, std::vector<double>>> arrays_;
    std::map<std::string, std::string> meta_strings_;
    std::map<std::string, double> meta_numbers_;
};

void write_mksm(const std::string& path, const ArrayBundle& bundle);
ArrayBundle read_mksm(const std::string& path);

// Write-to-temp-then-rename, shared by every artifact writer.
void atomic_write(const std::string& path, const std::string& bytes);

} // namespace mks::io
