#pragma once

#include <string>

namespace mks {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

} // namespace mks
