// Persistence checks: snapshot round trips, CSV formatting, config
// parsing with strict unknown-key accounting, hash vectors, and
// manifest verification.
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "helix/io.hpp"

using namespace helix;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
}

std::string tmp_path(const char* name) {
    return std::string("/tmp/helix_io_") + name;
}

}  // namespace

TEST_CASE("snapshot round trip is bit exact") {
    Box b{2, 4, 32, 8, 12.0};
    VecField m(b);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& f : m.c)
        for (cplx& v : f.data) v = cplx(dist(rng), dist(rng));

    const std::string path = tmp_path("roundtrip.hlxf");
    save_fields(path, m);
    FieldFile ff = load_fields(path);
    CHECK(ff.box.d == 2);
    CHECK(ff.box.n_per == 4);
    CHECK(ff.box.n1 == 32);
    CHECK(ff.box.n2 == 8);
    CHECK(ff.box.L2 == 12.0);
    REQUIRE(ff.components.size() == 3);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < m.c[c].data.size(); ++i)
            CHECK(ff.components[c].data[i] == m.c[c].data[i]);
}

TEST_CASE("snapshot stores point values for spectral input") {
    Box b{1, 4, 64, 1, 0.0};
    Field u(b);
    for (int i = 0; i < b.n1; ++i)
        u.at(i) = cplx(std::cos(0.37 * i), std::sin(0.11 * i));
    Field spec = u;
    spec.to_spectral();

    const std::string path = tmp_path("spectral.hlxf");
    save_fields(path, spec);
    FieldFile ff = load_fields(path);
    REQUIRE(ff.components.size() == 1);
    // The write path transforms a copy; values match the physical field
    // to rounding, not exactly, because of the transform round trip.
    for (int i = 0; i < b.n1; ++i)
        CHECK(std::abs(ff.components[0].at(i) - u.at(i)) < 1e-14);
}

TEST_CASE("snapshot loader rejects damaged files") {
    Box b{1, 2, 16, 1, 0.0};
    Field u(b);
    const std::string path = tmp_path("damage.hlxf");
    save_fields(path, u);

    std::string bytes = slurp(path);
    {
        std::string bad = bytes;
        bad[0] = 'X';
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << bad;
    }
    CHECK_THROWS(load_fields(path));
    {
        std::string bad = bytes;
        bad[4] = 9;  // unsupported version
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << bad;
    }
    CHECK_THROWS(load_fields(path));
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << bytes.substr(0, bytes.size() / 2);
    }
    CHECK_THROWS(load_fields(path));
}

TEST_CASE("csv values survive a parse round trip") {
    const std::string path = tmp_path("series.csv");
    std::vector<std::vector<double>> rows = {
        {0.0, 1.0 / 3.0, 6.02214076e23},
        {0.1, -2.2250738585072014e-308, 0.1 + 0.2},
    };
    write_csv(path, "t,a,b", rows);

    std::string text = slurp(path);
    CHECK(text.substr(0, 6) == "t,a,b\n");
    std::size_t pos = 6;
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::size_t stop = text.find_first_of(",\n", pos);
            REQUIRE(stop != std::string::npos);
            CHECK(std::stod(text.substr(pos, stop - pos)) == row[i]);
            pos = stop + 1;
        }
    CHECK(pos == text.size());
}

TEST_CASE("config parses sections, types, and comments") {
    Config cfg = Config::parse_text(
        "# a comment\n"
        "top = 3\n"
        "[run]\n"
        "alpha = 0.5\n"
        "scheme = etd-u\n"
        "verify = true\n"
        "\n"
        "[grid]\n"
        "n1 = 256\n");

    CHECK(cfg.get_int("top", 0) == 3);
    CHECK(cfg.get_double("run.alpha", 0.0) == 0.5);
    CHECK(cfg.get_string("run.scheme", "") == "etd-u");
    CHECK(cfg.get_bool("run.verify", false));
    CHECK(cfg.get_int("grid.n1", 0) == 256);
    CHECK(cfg.get_int("grid.n2", 7) == 7);  // absent, falls back
    CHECK(cfg.unknown_keys().empty());
}

TEST_CASE("config flags unconsumed keys and bad input") {
    Config cfg = Config::parse_text("[run]\nalpha = 1\ntypo_key = 2\n");
    CHECK(cfg.get_double("run.alpha", 0.0) == 1.0);
    auto unknown = cfg.unknown_keys();
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0] == "run.typo_key");

    CHECK_THROWS(Config::parse_text("just words\n"));
    CHECK_THROWS(Config::parse_text("[run\nalpha = 1\n"));
    CHECK_THROWS(Config::parse_text("a = 1\na = 2\n"));
    Config bad = Config::parse_text("x = notanumber\nb = maybe\n");
    CHECK_THROWS(bad.get_double("x", 0.0));
    CHECK_THROWS(bad.get_bool("b", false));
}

TEST_CASE("hash matches published vectors") {
    CHECK(sha256_hex("", 0) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc", 3) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::string million(1000000, 'a');
    CHECK(sha256_hex(million.data(), million.size()) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");

    const std::string path = tmp_path("hashme.bin");
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << "abc";
    }
    CHECK(sha256_file(path) == sha256_hex("abc", 3));
}

TEST_CASE("manifest verification catches a flipped byte") {
    const std::string dir = "/tmp";
    const std::string data = tmp_path("artifact.csv");
    write_csv(data, "t,v", {{1.0, 2.0}});

    nlohmann::json j;
    j["command"] = "demo";
    j["files"]["helix_io_artifact.csv"] = sha256_file(data);
    const std::string manifest = tmp_path("manifest.json");
    write_json_atomic(manifest, j);

    std::string err;
    CHECK(verify_manifest(manifest, &err));

    {
        std::ofstream os(data, std::ios::app);
        os << "tamper\n";
    }
    CHECK_FALSE(verify_manifest(manifest, &err));
    CHECK(err.find("artifact") != std::string::npos);
}
