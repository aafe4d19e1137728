#include "mks/container.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mks::io {

namespace {

using nlohmann::json;

void append_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t read_u16(const std::string& bytes, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[at]) |
                                      (static_cast<unsigned char>(bytes[at + 1]) << 8));
}

std::uint32_t read_u32(const std::string& bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

[[noreturn]] void bad_format(const std::string& path, std::size_t offset,
                             const std::string& what) {
    std::ostringstream os;
    os << path << ": " << what << " (byte offset " << offset << ")";
    throw FormatError(os.str());
}

} // namespace

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw FormatError("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw FormatError("cannot rename '" + tmp + "' to '" + path + "'");
}

void write_mksd(const std::string& path, const std::vector<UnitCell>& cells) {
    if (cells.empty()) throw ArgumentError("write_mksd: empty dataset");
    const int h = cells[0].height(), w = cells[0].width();
    for (const auto& c : cells) {
        if (!c.same_shape(cells[0]))
            throw ArgumentError("write_mksd: cells must share one shape");
        if (!is_binary(c)) throw ArgumentError("write_mksd: cells must be binary");
    }
    std::string out;
    out.reserve(14 + cells.size() * cells[0].size());
    out += "MKSD";
    append_u16(out, 1);
    append_u32(out, static_cast<std::uint32_t>(cells.size()));
    append_u16(out, static_cast<std::uint16_t>(h));
    append_u16(out, static_cast<std::uint16_t>(w));
    for (const auto& c : cells)
        out.append(reinterpret_cast<const char*>(c.data()), c.size());
    atomic_write(path, out);
}

std::vector<UnitCell> read_mksd(const std::string& path) {
    const std::string bytes = slurp(path);
    if (bytes.size() < 14) bad_format(path, bytes.size(), "truncated MKSD header");
    if (bytes.compare(0, 4, "MKSD") != 0) bad_format(path, 0, "bad magic, expected MKSD");
    const std::uint16_t version = read_u16(bytes, 4);
    if (version != 1) bad_format(path, 4, "unsupported MKSD version");
    const std::uint32_t count = read_u32(bytes, 6);
    const std::uint16_t h = read_u16(bytes, 10);
    const std::uint16_t w = read_u16(bytes, 12);
    if (count == 0 || h == 0 || w == 0) bad_format(path, 6, "empty MKSD dimensions");
    const std::size_t need = 14 + static_cast<std::size_t>(count) * h * w;
    if (bytes.size() != need)
        bad_format(path, bytes.size(), "MKSD payload size mismatch");

    std::vector<UnitCell> cells;
    cells.reserve(count);
    std::size_t at = 14;
    for (std::uint32_t i = 0; i < count; ++i) {
        UnitCell cell(w, h);
        for (std::size_t p = 0; p < cell.size(); ++p, ++at) {
            const unsigned char v = static_cast<unsigned char>(bytes[at]);
            if (v > 1) bad_format(path, at, "non-binary pixel value");
            cell.cells()[p] = v;
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

void ArrayBundle::set(const std::string& name, const Eigen::MatrixXd& m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c)
            data[static_cast<std::size_t>(r) * m.cols() + c] = m(r, c);
    arrays_[name] = {{m.rows(), m.cols()}, std::move(data)};
}

void ArrayBundle::set(const std::string& name, const Eigen::VectorXd& v) {
    arrays_[name] = {{v.size()}, std::vector<double>(v.data(), v.data() + v.size())};
}

void ArrayBundle::set_meta(const std::string& key, const std::string& value) {
    meta_strings_[key] = value;
}

void ArrayBundle::set_meta(const std::string& key, double value) {
    meta_numbers_[key] = value;
}

bool ArrayBundle::has(const std::string& name) const { return arrays_.count(name) > 0; }

Eigen::MatrixXd ArrayBundle::matrix(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw FormatError("bundle: missing array '" + name + "'");
    const auto& [shape, data] = it->second;
    if (shape.size() != 2) throw FormatError("bundle: array '" + name + "' is not 2-D");
    Eigen::MatrixXd m(shape[0], shape[1]);
    for (long r = 0; r < shape[0]; ++r)
        for (long c = 0; c < shape[1]; ++c)
            m(r, c) = data[static_cast<std::size_t>(r) * shape[1] + c];
    return m;
}

Eigen::VectorXd ArrayBundle::vector(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw FormatError("bundle: missing array '" + name + "'");
    const auto& [shape, data] = it->second;
    if (shape.size() != 1) throw FormatError("bundle: array '" + name + "' is not 1-D");
    return Eigen::Map<const Eigen::VectorXd>(data.data(), shape[0]);
}

bool ArrayBundle::has_meta(const std::string& key) const {
    return meta_strings_.count(key) > 0 || meta_numbers_.count(key) > 0;
}

std::string ArrayBundle::meta_string(const std::string& key) const {
    const auto it = meta_strings_.find(key);
    if (it == meta_strings_.end()) throw FormatError("bundle: missing meta '" + key + "'");
    return it->second;
}

double ArrayBundle::meta_number(const std::string& key) const {
    const auto it = meta_numbers_.find(key);
    if (it == meta_numbers_.end()) throw FormatError("bundle: missing meta '" + key + "'");
    return it->second;
}

void ArrayBundle::set_raw(const std::string& name, std::vector<long> shape,
                          std::vector<double> data) {
    long total = 1;
    for (long s : shape) total *= s;
    if (total != static_cast<long>(data.size()))
        throw ArgumentError("ArrayBundle::set_raw: shape/data size mismatch");
    arrays_[name] = {std::move(shape), std::move(data)};
}

void write_mksm(const std::string& path, const ArrayBundle& bundle) {
    json header;
    header["version"] = 1;
    json arrays = json::array();
    std::size_t offset = 0;
    for (const auto& [name, entry] : bundle.arrays()) {
        json a;
        a["name"] = name;
        a["shape"] = entry.first;
        a["offset"] = offset; // bytes from the start of the payload
        arrays.push_back(a);
        offset += entry.second.size() * sizeof(double);
    }
    header["arrays"] = arrays;
    json meta = json::object();
    for (const auto& [k, v] : bundle.meta_strings()) meta[k] = v;
    for (const auto& [k, v] : bundle.meta_numbers()) meta[k] = v;
    header["meta"] = meta;
    // nlohmann keeps object keys sorted, so dumps are byte-stable.
    const std::string head = header.dump();

    std::string out;
    out.reserve(4 + head.size() + offset);
    append_u32(out, static_cast<std::uint32_t>(head.size()));
    out += head;
    for (const auto& [name, entry] : bundle.arrays()) {
        (void)name;
        const char* raw = reinterpret_cast<const char*>(entry.second.data());
        out.append(raw, entry.second.size() * sizeof(double));
    }
    atomic_write(path, out);
}

ArrayBundle read_mksm(const std::string& path) {
    const std::string bytes = slurp(path);
    if (bytes.size() < 4) bad_format(path, bytes.size(), "truncated MKSM header");
    const std::uint32_t head_len = read_u32(bytes, 0);
    if (bytes.size() < 4 + static_cast<std::size_t>(head_len))
        bad_format(path, bytes.size(), "truncated MKSM header block");

    json header;
    try {
        header = json::parse(bytes.substr(4, head_len));
    } catch (const json::exception& e) {
        bad_format(path, 4, std::string("invalid MKSM JSON header: ") + e.what());
    }
    if (!header.contains("version") || header["version"].get<int>() != 1)
        bad_format(path, 4, "unsupported MKSM version");

    const std::size_t payload_at = 4 + head_len;
    ArrayBundle bundle;
    for (const auto& a : header.at("arrays")) {
        const std::string name = a.at("name").get<std::string>();
        const std::vector<long> shape = a.at("shape").get<std::vector<long>>();
        const std::size_t offset = a.at("offset").get<std::size_t>();
        long total = 1;
        for (long s : shape) {
            if (s < 0) bad_format(path, payload_at, "negative shape in '" + name + "'");
            total *= s;
        }
        const std::size_t begin = payload_at + offset;
        const std::size_t len = static_cast<std::size_t>(total) * sizeof(double);
        if (begin + len > bytes.size())
            bad_format(path, begin, "array '" + name + "' runs past end of file");
        std::vector<double> data(static_cast<std::size_t>(total));
        std::memcpy(data.data(), bytes.data() + begin, len);
        bundle.set_raw(name, shape, std::move(data));
    }
    if (header.contains("meta")) {
        for (const auto& [k, v] : header.at("meta").items()) {
            if (v.is_string()) bundle.set_meta(k, v.get<std::string>());
            else if (v.is_number()) bundle.set_meta(k, v.get<double>());
        }
    }
    return bundle;
}

} // namespace mks::io
