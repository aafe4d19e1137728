#include "mks/npy.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace mks::io {

namespace {

[[noreturn]] void bad(const std::string& path, std::size_t offset, const std::string& what) {
    std::ostringstream os;
    os << path << ": " << what << " (byte offset " << offset << ")";
    throw FormatError(os.str());
}

// Minimal parser for the python dict literal in the npy header.
std::string dict_value(const std::string& header, const std::string& key) {
    const std::string quoted = "'" + key + "'";
    const auto at = header.find(quoted);
    if (at == std::string::npos) return {};
    auto colon = header.find(':', at);
    if (colon == std::string::npos) return {};
    ++colon;
    while (colon < header.size() && header[colon] == ' ') ++colon;
    std::size_t end = colon;
    if (header[colon] == '(') {
        end = header.find(')', colon);
        if (end != std::string::npos) ++end;
    } else {
        end = header.find_first_of(",}", colon);
    }
    if (end == std::string::npos) return {};
    return header.substr(colon, end - colon);
}

std::vector<long> parse_shape(const std::string& tuple) {
    std::vector<long> dims;
    long value = 0;
    bool in_number = false;
    for (char c : tuple) {
        if (c >= '0' && c <= '9') {
            value = value * 10 + (c - '0');
            in_number = true;
        } else if (in_number) {
            dims.push_back(value);
            value = 0;
            in_number = false;
        }
    }
    if (in_number) dims.push_back(value);
    return dims;
}

} // namespace

std::vector<UnitCell> read_npy_cells(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());

    if (bytes.size() < 10 || bytes.compare(0, 6, "\x93NUMPY") != 0)
        bad(path, 0, "not an npy file (bad magic)");
    const unsigned char major = static_cast<unsigned char>(bytes[6]);

    std::size_t header_len = 0, header_at = 0;
    if (major == 1) {
        header_len = static_cast<unsigned char>(bytes[8]) |
                     (static_cast<unsigned char>(bytes[9]) << 8);
        header_at = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) bad(path, 8, "truncated npy v2 header length");
        header_len = 0;
        for (int i = 0; i < 4; ++i)
            header_len |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[8 + i]))
                          << (8 * i);
        header_at = 12;
    } else {
        bad(path, 6, "unsupported npy version");
    }
    if (bytes.size() < header_at + header_len)
        bad(path, bytes.size(), "truncated npy header");
    const std::string header = bytes.substr(header_at, header_len);

    const std::string descr = dict_value(header, "descr");
    if (descr.find("u1") == std::string::npos)
        bad(path, header_at, "expected uint8 cells, got descr " + descr);
    const std::string fortran = dict_value(header, "fortran_order");
    if (fortran.find("False") == std::string::npos)
        bad(path, header_at, "fortran_order arrays are not supported");
    const std::vector<long> shape = parse_shape(dict_value(header, "shape"));
    if (shape.size() != 3)
        bad(path, header_at, "expected shape (N, H, W)");
    const long n = shape[0], h = shape[1], w = shape[2];
    if (n < 1 || h < 1 || w < 1) bad(path, header_at, "empty npy shape");

    const std::size_t data_at = header_at + header_len;
    const std::size_t need = static_cast<std::size_t>(n) * h * w;
    if (bytes.size() - data_at != need)
        bad(path, bytes.size(), "npy payload size mismatch");

    std::vector<UnitCell> cells;
    cells.reserve(static_cast<std::size_t>(n));
    std::vector<std::string> offenders;
    for (long i = 0; i < n; ++i) {
        UnitCell cell(static_cast<int>(w), static_cast<int>(h));
        const std::size_t base = data_at + static_cast<std::size_t>(i) * h * w;
        for (std::size_t p = 0; p < cell.size(); ++p) {
            const unsigned char v = static_cast<unsigned char>(bytes[base + p]);
            if (v > 1 && offenders.size() < 10) {
                std::ostringstream os;
                os << "record " << i << " pixel " << p << " value " << static_cast<int>(v);
                offenders.push_back(os.str());
            }
            cell.cells()[p] = v;
        }
        cells.push_back(std::move(cell));
    }
    if (!offenders.empty()) {
        std::ostringstream os;
        os << path << ": non-binary values;";
        for (const auto& o : offenders) os << " " << o << ";";
        throw FormatError(os.str());
    }
    return cells;
}

} // namespace mks::io
