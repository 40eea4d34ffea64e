#include "spc5/suitesparse.hpp"

#include <curl/curl.h>
#include <zlib.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <system_error>

namespace spc5 {

namespace fs = std::filesystem;

std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "spc5";
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "spc5";
    return fs::temp_directory_path() / "spc5-cache";
}

std::string default_base_url() {
    if (const char* env = std::getenv(kBaseUrlEnv); env && *env) return env;
    return std::string(kSuiteSparseBaseUrl);
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool valid_component(std::string_view s) {
    if (s.empty() || s == "." || s == "..") return false;
    for (char c : s) {
        if (c == '/' || c == '\\' || c == '\0') return false;
    }
    return true;
}

}  // namespace

MatrixSource MatrixSource::parse(std::string_view spec) {
    MatrixSource src;
    std::error_code ec;
    if (fs::is_regular_file(fs::path(spec), ec)) {
        src.origin = Origin::local_file;
        src.path = fs::path(spec);
        return src;
    }
    if (auto colon = spec.find(':'); colon != std::string_view::npos) {
        auto parts = split(spec, ':');
        src.origin = Origin::synthetic;
        src.name = parts.front();
        src.params.assign(parts.begin() + 1, parts.end());
        return src;
    }
    auto parts = split(spec, '/');
    if (parts.size() == 2 && valid_component(parts[0]) && valid_component(parts[1])) {
        src.origin = Origin::suitesparse;
        src.group = parts[0];
        src.name = parts[1];
        return src;
    }
    throw std::invalid_argument("cannot resolve matrix '" + std::string(spec) +
                                "': not a file, not kind:params, not Group/Name");
}

std::filesystem::path MatrixSource::cache_path(const std::filesystem::path& cache_dir) const {
    switch (origin) {
        case Origin::local_file: return path;
        case Origin::suitesparse: return suitesparse_cache_path(cache_dir, group, name);
        case Origin::synthetic: return {};
    }
    return {};
}

std::string MatrixSource::display_name() const {
    switch (origin) {
        case Origin::local_file: return path.stem().string();
        case Origin::suitesparse: return name;
        case Origin::synthetic: {
            // Size shows up in the Dim column, so only random specs keep their parameters.
            std::string out = name;
            if (name == "random") {
                for (const auto& p : params) out += "-" + p;
            }
            return out;
        }
    }
    return {};
}

std::filesystem::path suitesparse_cache_path(const std::filesystem::path& cache_dir, std::string_view group,
                                             std::string_view name) {
    if (!valid_component(group) || !valid_component(name)) {
        throw std::invalid_argument("invalid SuiteSparse identifier '" + std::string(group) + "/" +
                                    std::string(name) + "'");
    }
    return cache_dir / std::string(group) / (std::string(name) + ".mtx");
}

std::vector<char> gunzip(std::span<const char> compressed) {
    z_stream zs{};
    // 16 + MAX_WBITS selects the gzip wrapper.
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
        throw ArchiveError("gunzip: inflateInit2 failed");
    }
    std::vector<char> out;
    std::vector<char> chunk(1 << 16);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    zs.avail_in = static_cast<uInt>(compressed.size());
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ArchiveError(std::string("gunzip: corrupt stream (") + (zs.msg ? zs.msg : "unknown") + ")");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (rc != Z_STREAM_END && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw ArchiveError("gunzip: truncated stream");
        }
    } while (rc != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

std::optional<std::vector<char>> find_tar_member(std::span<const char> tar, std::string_view member_name) {
    constexpr std::size_t kBlock = 512;
    std::size_t offset = 0;
    while (offset + kBlock <= tar.size()) {
        const char* header = tar.data() + offset;
        if (header[0] == '\0') break;  // end-of-archive marker

        const std::string name(header, strnlen(header, 100));
        const std::string prefix(header + 345, strnlen(header + 345, 155));
        std::string size_field(header + 124, strnlen(header + 124, 12));
        std::size_t size = 0;
        try {
            size = size_field.empty() ? 0 : std::stoull(size_field, nullptr, 8);
        } catch (const std::exception&) {
            throw ArchiveError("tar: bad size field at offset " + std::to_string(offset));
        }
        const char type = header[156];
        const std::size_t data_begin = offset + kBlock;
        if (data_begin + size > tar.size()) {
            throw ArchiveError("tar: member '" + name + "' truncated");
        }
        const std::string full = prefix.empty() ? name : prefix + "/" + name;
        const auto slash = full.find_last_of('/');
        const std::string_view leaf = slash == std::string::npos ? std::string_view(full)
                                                                 : std::string_view(full).substr(slash + 1);
        if ((type == '0' || type == '\0') && leaf == member_name) {
            return std::vector<char>(tar.begin() + std::ptrdiff_t(data_begin),
                                     tar.begin() + std::ptrdiff_t(data_begin + size));
        }
        offset = data_begin + (size + kBlock - 1) / kBlock * kBlock;
    }
    return std::nullopt;
}

namespace {

std::once_flag curl_init_flag;

std::size_t write_to_vector(char* data, std::size_t size, std::size_t nmemb, void* user) {
    auto* out = static_cast<std::vector<char>*>(user);
    out->insert(out->end(), data, data + size * nmemb);
    return size * nmemb;
}

std::vector<char> http_get(const std::string& url) {
    std::call_once(curl_init_flag, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw HttpError(0, "curl_easy_init failed");

    std::vector<char> body;
    char errbuf[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_to_vector);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
    curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, errbuf);
    curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "spc5-fetch/1.0");

    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) {
        throw HttpError(0, "GET " + url + " failed: " + (errbuf[0] ? errbuf : curl_easy_strerror(rc)));
    }
    long status = 0;
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
    if (status < 200 || status >= 300) {
        throw HttpError(status, "GET " + url + " returned HTTP " + std::to_string(status));
    }
    return body;
}

void write_atomically(const fs::path& target, std::span<const char> bytes) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) {
        throw std::runtime_error("cache directory " + target.parent_path().string() +
                                 " is not writable: " + ec.message());
    }
    std::random_device rd;
    const fs::path tmp = target.string() + ".part" + std::to_string(rd());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move " + tmp.string() + " into cache: " + ec.message());
    }
}

}  // namespace

std::filesystem::path fetch_suitesparse(std::string_view group, std::string_view name,
                                        const std::filesystem::path& cache_dir, std::string_view base_url) {
    const fs::path target = suitesparse_cache_path(cache_dir, group, name);
    std::error_code ec;
    if (fs::is_regular_file(target, ec)) return target;

    std::string url(base_url);
    if (!url.empty() && url.back() == '/') url.pop_back();
    url += "/" + std::string(group) + "/" + std::string(name) + ".tar.gz";

    const std::vector<char> archive = http_get(url);
    const std::vector<char> tar = gunzip(archive);
    auto member = find_tar_member(tar, std::string(name) + ".mtx");
    if (!member) {
        throw ArchiveError("archive " + url + " has no member " + std::string(name) + ".mtx");
    }
    write_atomically(target, *member);
    return target;
}

}  // namespace spc5
