#pragma once

#include <string>
#include <string_view>

namespace hiertree {

// Writes through a ".partial" sibling and renames on success, so an
// aborted run leaves only suffixed files behind.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

// Shortest-faithful decimal for CSV/Newick/DOT output: %.12g.
std::string format_sig12(double v);

} // namespace hiertree
