#include <curvbc/report.h>

#include <curvbc/errors.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace curvbc {

std::string_view version()
{
    return "0.1.0";
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed)
{
    char buf[128];
    std::snprintf(buf, sizeof(buf), "curvbc %s config_hash=%016llx seed=%llu", std::string(version()).c_str(),
        static_cast<unsigned long long>(config_hash), static_cast<unsigned long long>(seed));
    return buf;
}

void write_output_file(const std::filesystem::path& path, const std::string& provenance, const std::string& body)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "# " << provenance << '\n' << body;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::filesystem::path default_output_dir()
{
    const char* env = std::getenv("CURVBC_OUT");
    return env && *env ? std::filesystem::path(env) : std::filesystem::current_path();
}

} // namespace curvbc
