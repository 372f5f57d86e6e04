#include "hiertree/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hiertree/error.hpp"

namespace hiertree {

void write_file_atomic(const std::string& path, std::string_view content) {
    const std::string partial = path + ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) fail_io("cannot open for writing: " + partial);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) fail_io("write failed: " + partial);
    }
    std::error_code ec;
    std::filesystem::rename(partial, path, ec);
    if (ec) fail_io("rename failed: " + partial + " -> " + path + " (" + ec.message() + ")");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail_io("read failed: " + path);
    return content;
}

std::string format_sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace hiertree
