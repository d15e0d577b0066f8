#pragma once

#include <filesystem>
#include <string_view>

namespace hfsp {

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace hfsp
