#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "helix/field.hpp"

namespace helix {

// Snapshot container as read back from disk: one or more complex fields
// sharing a box, in physical space.
struct FieldFile {
    Box box;
    std::vector<Field> components;
};

// Binary snapshot layout (this comment is the format reference):
//   8 little-endian uint32 words: the magic bytes "HLXF", format
//   version (currently 1), d, n_per, n1, n2, component count, and a
//   reserved zero word;
//   then the transverse length L2 as a little-endian float64;
//   then each component in physical space, x2 index fastest, stored as
//   interleaved re/im float64 pairs.
// Writers convert a spectral field to physical in a copy; the file
// always holds point values.
void save_fields(const std::string& path, const std::vector<const Field*>& comps);
void save_fields(const std::string& path, const Field& u);
void save_fields(const std::string& path, const VecField& m);
FieldFile load_fields(const std::string& path);

// CSV with a fixed header line. Values print with 17 significant
// digits, enough for a bit-exact double round trip; a NaN prints as an
// empty cell (the convention for undefined ratios).
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

// Flat "key = value" configuration with [section] headers and
// full-line '#' comments. Lookups use namespaced "section.key" names.
// Getters fall back when the key is absent and mark keys they read;
// unknown_keys() then lists everything the program never asked about,
// which callers reject as a usage error. Duplicate keys and malformed
// lines or values throw.
class Config {
  public:
    Config() = default;
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    bool get_bool(const std::string& key, bool fallback);

    // Keys present in the file that no getter has consumed yet.
    std::vector<std::string> unknown_keys() const;

  private:
    struct Entry {
        std::string value;
        bool consumed = false;
    };
    std::map<std::string, Entry> entries_;
};

// SHA-256 as lowercase hex.
std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_file(const std::string& path);

// Serialize JSON through a temporary file and rename into place, so a
// manifest is either absent or complete.
void write_json_atomic(const std::string& path, const nlohmann::json& j);

// Re-hash every file listed in the manifest's "files" object (paths
// relative to the manifest's own directory) and compare. On mismatch
// returns false and fills err with the first offending file.
bool verify_manifest(const std::string& manifest_path, std::string* err);

}  // namespace helix
