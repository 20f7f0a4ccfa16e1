#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "evdeg/io.hpp"

using namespace evdeg;

TEST_CASE("double formatting round-trips") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(20.0) == "20");
    for (double v : {0.1, 1.0 / 3.0, 1878.2870022539444, 1e-15, -33.7}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("csv escaping follows RFC-4180 quoting") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("csv writer emits headered rows") {
    const std::string path = "test_io_tmp.csv";
    {
        CsvWriter w(path);
        w.row({"u", "e", "count"});
        w.row({"1.5", "2.25", "10"});
    }
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "u,e,count\n1.5,2.25,10\n");
    std::remove(path.c_str());
}

TEST_CASE("manifest serialization lists outputs and keeps the timestamp local") {
    RunManifest m;
    m.command = "tail";
    m.input_path = "degrees.txt";
    m.seed = 42;
    m.seeded = true;
    m.parameters["method"] = "hill";
    m.version = "0.1.0";
    m.outputs = {"tail_estimates.json"};
    m.timestamp = "2000-01-01T00:00:00Z";
    auto j = m.to_json();
    CHECK(j["schema_version"] == 1);
    CHECK(j["seed"] == 42);
    CHECK(j["outputs"].size() == 1);
    CHECK(j["parameters"]["method"] == "hill");

    RunManifest unseeded;
    unseeded.command = "degrees";
    CHECK_FALSE(unseeded.to_json().contains("seed"));
}
