#include "helix/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace helix {

static_assert(std::endian::native == std::endian::little,
              "snapshot serialization assumes a little-endian host");

namespace {

constexpr std::uint32_t kMagic = 0x46584c48u;  // "HLXF" read as bytes
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ofstream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::ifstream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

double get_f64(std::ifstream& is) {
    double v = 0.0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void save_fields(const std::string& path, const std::vector<const Field*>& comps) {
    require(!comps.empty(), "save_fields: no components");
    const Box& b = comps[0]->box;
    for (const Field* f : comps)
        require(f->box.n1 == b.n1 && f->box.n2 == b.n2,
                "save_fields: component grids differ");

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(os.good(), "save_fields: cannot open " + path);
    put_u32(os, kMagic);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(b.d));
    put_u32(os, static_cast<std::uint32_t>(b.n_per));
    put_u32(os, static_cast<std::uint32_t>(b.n1));
    put_u32(os, static_cast<std::uint32_t>(b.n2));
    put_u32(os, static_cast<std::uint32_t>(comps.size()));
    put_u32(os, 0);
    put_f64(os, b.L2);
    for (const Field* f : comps) {
        Field p = *f;
        p.to_physical();
        for (const cplx& v : p.data) {
            put_f64(os, v.real());
            put_f64(os, v.imag());
        }
    }
    require(os.good(), "save_fields: write failed for " + path);
}

void save_fields(const std::string& path, const Field& u) {
    save_fields(path, std::vector<const Field*>{&u});
}

void save_fields(const std::string& path, const VecField& m) {
    save_fields(path, std::vector<const Field*>{&m.c[0], &m.c[1], &m.c[2]});
}

FieldFile load_fields(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "load_fields: cannot open " + path);
    require(get_u32(is) == kMagic, "load_fields: bad magic in " + path);
    require(get_u32(is) == kVersion, "load_fields: unsupported version in " + path);

    FieldFile ff;
    ff.box.d = static_cast<int>(get_u32(is));
    ff.box.n_per = static_cast<int>(get_u32(is));
    ff.box.n1 = static_cast<int>(get_u32(is));
    ff.box.n2 = static_cast<int>(get_u32(is));
    const std::uint32_t ncomp = get_u32(is);
    get_u32(is);  // reserved
    ff.box.L2 = get_f64(is);
    require(is.good(), "load_fields: truncated header in " + path);
    ff.box.validate();
    require(ncomp >= 1 && ncomp <= 8, "load_fields: bad component count");

    for (std::uint32_t c = 0; c < ncomp; ++c) {
        Field f(ff.box);
        for (cplx& v : f.data) {
            double re = get_f64(is);
            double im = get_f64(is);
            v = cplx(re, im);
        }
        require(is.good(), "load_fields: truncated data in " + path);
        ff.components.push_back(std::move(f));
    }
    return ff;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path, std::ios::trunc);
    require(os.good(), "write_csv: cannot open " + path);
    os << header << '\n';
    char buf[32];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            if (std::isnan(row[i])) continue;
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << buf;
        }
        os << '\n';
    }
    require(os.good(), "write_csv: write failed for " + path);
}

namespace {

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t z = s.find_last_not_of(" \t\r");
    return s.substr(a, z - a + 1);
}

}  // namespace

Config Config::parse_text(const std::string& text) {
    Config cfg;
    std::string section;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = trimmed(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            require(line.back() == ']' && line.size() > 2,
                    "config: bad section header at line " + std::to_string(lineno));
            section = trimmed(line.substr(1, line.size() - 2));
            require(!section.empty(),
                    "config: empty section name at line " + std::to_string(lineno));
            continue;
        }
        std::size_t eq = line.find('=');
        require(eq != std::string::npos,
                "config: expected key = value at line " + std::to_string(lineno));
        std::string key = trimmed(line.substr(0, eq));
        std::string value = trimmed(line.substr(eq + 1));
        require(!key.empty(), "config: empty key at line " + std::to_string(lineno));
        if (!section.empty()) key = section + "." + key;
        require(!cfg.entries_.count(key), "config: duplicate key " + key);
        cfg.entries_[key] = Entry{value, false};
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return parse_text(text);
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    return it->second.value;
}

double Config::get_double(const std::string& key, double fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    const std::string& v = it->second.value;
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    require(end == v.c_str() + v.size() && !v.empty(),
            "config: key " + key + " is not a number: '" + v + "'");
    return x;
}

int Config::get_int(const std::string& key, int fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    const std::string& v = it->second.value;
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    require(end == v.c_str() + v.size() && !v.empty(),
            "config: key " + key + " is not an integer: '" + v + "'");
    return static_cast<int>(x);
}

bool Config::get_bool(const std::string& key, bool fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.consumed = true;
    const std::string& v = it->second.value;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config: key " + key + " is not a bool: '" + v + "'");
}

std::vector<std::string> Config::unknown_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_)
        if (!entry.consumed) out.push_back(key);
    return out;
}

namespace {

// SHA-256 per FIPS 180-4, enough for manifest integrity hashes.
struct Sha256 {
    std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                          0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    unsigned char block[64];
    std::size_t fill = 0;
    std::uint64_t total = 0;

    static std::uint32_t rotr(std::uint32_t x, int n) {
        return (x >> n) | (x << (32 - n));
    }

    void compress(const unsigned char* p) {
        static const std::uint32_t K[64] = {
            0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu,
            0x59f111f1u, 0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u,
            0x243185beu, 0x550c7dc3u, 0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u,
            0xc19bf174u, 0xe49b69c1u, 0xefbe4786u, 0x0fc19dc6u, 0x240ca1ccu,
            0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau, 0x983e5152u,
            0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
            0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu,
            0x53380d13u, 0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u,
            0xa2bfe8a1u, 0xa81a664bu, 0xc24b8b70u, 0xc76c51a3u, 0xd192e819u,
            0xd6990624u, 0xf40e3585u, 0x106aa070u, 0x19a4c116u, 0x1e376c08u,
            0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au, 0x5b9cca4fu,
            0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
            0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = std::uint32_t(p[4 * i]) << 24 | std::uint32_t(p[4 * i + 1]) << 16 |
                   std::uint32_t(p[4 * i + 2]) << 8 | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
        std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = hh + s1 + ch + K[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }

    void update(const unsigned char* p, std::size_t n) {
        total += n;
        while (n) {
            std::size_t take = std::min(n, sizeof block - fill);
            std::memcpy(block + fill, p, take);
            fill += take;
            p += take;
            n -= take;
            if (fill == sizeof block) {
                compress(block);
                fill = 0;
            }
        }
    }

    std::string finish() {
        std::uint64_t bits = total * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (fill != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = (unsigned char)(bits >> (56 - 8 * i));
        update(len, 8);
        char out[65];
        for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 64);
    }
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t n) {
    Sha256 s;
    s.update(static_cast<const unsigned char*>(data), n);
    return s.finish();
}

std::string sha256_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "sha256: cannot open " + path);
    Sha256 s;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof buf);
        s.update(reinterpret_cast<const unsigned char*>(buf),
                 static_cast<std::size_t>(is.gcount()));
    }
    return s.finish();
}

void write_json_atomic(const std::string& path, const nlohmann::json& j) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        require(os.good(), "manifest: cannot open " + tmp);
        os << j.dump(2) << '\n';
        require(os.good(), "manifest: write failed for " + tmp);
    }
    require(std::rename(tmp.c_str(), path.c_str()) == 0,
            "manifest: rename failed for " + path);
}

bool verify_manifest(const std::string& manifest_path, std::string* err) {
    std::ifstream is(manifest_path);
    require(is.good(), "verify: cannot open " + manifest_path);
    nlohmann::json j = nlohmann::json::parse(is);
    std::string dir = ".";
    std::size_t slash = manifest_path.find_last_of('/');
    if (slash != std::string::npos) dir = manifest_path.substr(0, slash);
    if (!j.contains("files")) return true;
    for (const auto& [name, want] : j.at("files").items()) {
        std::string got = sha256_file(dir + "/" + name);
        if (got != want.get<std::string>()) {
            if (err) *err = name + ": recorded " + want.get<std::string>() +
                            ", found " + got;
            return false;
        }
    }
    return true;
}

}  // namespace helix
