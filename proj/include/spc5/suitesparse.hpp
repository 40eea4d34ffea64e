#ifndef SPC5_SUITESPARSE_HPP
#define SPC5_SUITESPARSE_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spc5 {

/// Non-2xx answer (or transport failure, status 0) from the download server.
class HttpError : public std::runtime_error {
public:
    HttpError(long status, const std::string& what) : std::runtime_error(what), status_(status) {}
    long status() const { return status_; }

private:
    long status_;
};

class ArchiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSuiteSparseBaseUrl = "https://sparse.tamu.edu/MM";

/// Environment variables consulted by the CLI and by fetch defaults.
inline constexpr const char* kCacheDirEnv = "SPC5_CACHE_DIR";
inline constexpr const char* kBaseUrlEnv = "SPC5_SUITESPARSE_URL";

std::filesystem::path default_cache_dir();
std::string default_base_url();

/// Where a matrix comes from. Synthetic kinds: "dense:N", "identity:N",
/// "random:ROWS:COLS:NNZ_PER_ROW:CLUSTERING:SEED".
struct MatrixSource {
    enum class Origin { local_file, suitesparse, synthetic };

    Origin origin = Origin::local_file;
    std::filesystem::path path;  // local_file
    std::string group;           // suitesparse
    std::string name;            // suitesparse, or synthetic kind
    std::vector<std::string> params;

    /// Existing file > "kind:..." synthetic spec > "Group/Name".
    static MatrixSource parse(std::string_view spec);

    std::filesystem::path cache_path(const std::filesystem::path& cache_dir) const;
    std::string display_name() const;
};

/// `<cache_dir>/<group>/<name>.mtx`
std::filesystem::path suitesparse_cache_path(const std::filesystem::path& cache_dir, std::string_view group,
                                             std::string_view name);

/// Download `<base_url>/<group>/<name>.tar.gz`, extract `<name>.mtx` into the
/// cache and return its path. A cache hit returns immediately without any
/// network access.
std::filesystem::path fetch_suitesparse(std::string_view group, std::string_view name,
                                        const std::filesystem::path& cache_dir,
                                        std::string_view base_url = kSuiteSparseBaseUrl);

/// Inflate a gzip stream.
std::vector<char> gunzip(std::span<const char> compressed);

/// Return the payload of the first regular file in a ustar archive whose
/// name's last component equals `member_name`.
std::optional<std::vector<char>> find_tar_member(std::span<const char> tar, std::string_view member_name);

}  // namespace spc5

#endif
