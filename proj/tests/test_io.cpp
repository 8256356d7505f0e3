#include <bdecomp/io.hpp>

#include "doctest.h"
#include "test_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

using namespace bdecomp;
namespace fs = std::filesystem;

namespace {

// Per-test scratch directory, removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bdecomp-io-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("density files round-trip values, grid and metadata") {
    TempDir tmp;
    auto m = testutil::mixed_grid({3, 4}, 201);
    const Density f = testutil::random_density(m, 202);
    const io::StringMap meta = {{"family", "product"}, {"seed", "7"}};

    const fs::path p = tmp.path / "f.json";
    io::write_density(p, f, meta);

    io::StringMap got_meta;
    const Density g = io::read_density(p, &got_meta);
    CHECK(g.measure().same_as(f.measure()));
    CHECK(testutil::max_abs_diff(g.values(), f.values()) == 0.0);
    CHECK(got_meta == meta);

    for (int i = 0; i < 2; ++i) {
        CHECK(g.measure().axis(i).name() == f.measure().axis(i).name());
    }
}

TEST_CASE("clr files revalidate the zero-sum constraint on read") {
    TempDir tmp;
    auto m = testutil::mixed_grid({4, 3}, 211);
    const ClrField z = clr(testutil::random_density(m, 212));
    const fs::path p = tmp.path / "z.json";
    io::write_clr(p, z);
    const ClrField back = io::read_clr(p);
    CHECK(testutil::max_abs_diff(back.values(), z.values()) == 0.0);

    // Tampering with one value breaks the weighted zero-sum invariant.
    std::string text = slurp(p);
    const auto pos = text.find("\"values\"");
    REQUIRE(pos != std::string::npos);
    const auto bracket = text.find('[', pos);
    REQUIRE(bracket != std::string::npos);
    text.insert(bracket + 1, "12345.0,");
    // One extra value also breaks the length check; remove the last entry to
    // keep the count intact.
    const auto close = text.find(']', bracket);
    auto comma = text.rfind(',', close);
    text.erase(comma, close - comma);
    spit(p, text);
    CHECK_THROWS_AS(io::read_clr(p), std::invalid_argument);
}

TEST_CASE("the format tag of a density file is checked") {
    TempDir tmp;
    auto m = testutil::cube({2, 2});
    const Density f(m, {1.0, 2.0, 3.0, 4.0});
    const fs::path p = tmp.path / "f.json";
    io::write_density(p, f);

    std::string text = slurp(p);
    const auto pos = text.find("bdecomp-density-v1");
    REQUIRE(pos != std::string::npos);
    std::string wrong = text;
    wrong.replace(pos, 18, "bdecomp-density-v9");
    spit(p, wrong);
    CHECK_THROWS_WITH_AS(io::read_density(p), doctest::Contains("format tag"),
                         std::invalid_argument);

    // A density file does not parse as a clr file.
    spit(p, text);
    CHECK_THROWS_AS(io::read_clr(p), std::invalid_argument);
}

TEST_CASE("a truncated values array is reported with both lengths") {
    TempDir tmp;
    auto m = testutil::cube({4, 4});
    const Density f = testutil::random_density(m, 221);
    const fs::path p = tmp.path / "f.json";
    io::write_density(p, f);

    std::string text = slurp(p);
    const auto pos = text.find("\"values\"");
    const auto bracket = text.find('[', pos);
    const auto close = text.find(']', bracket);
    const auto comma = text.rfind(',', close);
    text.erase(comma, close - comma);
    spit(p, text);
    CHECK_THROWS_WITH_AS(io::read_density(p), doctest::Contains("does not match grid size"),
                         std::invalid_argument);
}

TEST_CASE("malformed json and missing files are input errors") {
    TempDir tmp;
    const fs::path p = tmp.path / "broken.json";
    spit(p, "{\"format\": \"bdecomp-density-v1\", \"grid\":");
    CHECK_THROWS(io::read_density(p));
    CHECK_THROWS(io::read_density(tmp.path / "absent.json"));
}

TEST_CASE("density serialization is byte-stable") {
    auto m = testutil::mixed_grid({3, 3}, 231);
    const Density f = testutil::random_density(m, 232);
    const std::string a = io::density_json(f, {{"k", "v"}});
    const std::string b = io::density_json(f, {{"k", "v"}});
    CHECK(a == b);
    CHECK(a.back() == '\n');
}

TEST_CASE("reports list every component with norms and shares") {
    auto m = testutil::mixed_grid({4, 4}, 241);
    const Density f = testutil::random_density(m, 242);
    const DecompositionReport rep = pythagoras_report(decompose(f));

    const std::string text = io::report_text(rep);
    CHECK(text.find("component") != std::string::npos);
    CHECK(text.find("norm_sq") != std::string::npos);
    CHECK(text.find("share") != std::string::npos);
    CHECK(text.find("1-2") != std::string::npos);
    CHECK(text.find("pythagoras") != std::string::npos);
    CHECK(text.find("reconstruction") != std::string::npos);
    CHECK(text.find("orthogonality") != std::string::npos);

    const std::string js = io::report_json(rep);
    CHECK(js.find("bdecomp-report-v1") != std::string::npos);
    CHECK(js.find("\"components\"") != std::string::npos);
    CHECK(js.find("\"total_norm_sq\"") != std::string::npos);
    CHECK(js.find("\"subset\"") != std::string::npos);
}

TEST_CASE("component tsv holds one row per subset grid point") {
    auto m = testutil::mixed_grid({3, 4, 5}, 251);
    const Density f = testutil::random_density(m, 252);
    const Decomposition dec = decompose(f);
    const IndexSet pair = IndexSet::of({0, 2});
    const std::string tsv = io::component_tsv(*m, pair, dec.component(pair));

    std::size_t rows = 0;
    for (char ch : tsv)
        if (ch == '\n') ++rows;
    // Header plus 3 * 5 subset points.
    CHECK(rows == 1 + 15);
    CHECK(tsv.rfind("clr", 0) == std::string::npos);
    CHECK(tsv.find("clr") != std::string::npos);
}

TEST_CASE("sample csv requires a header and rectangular numeric rows") {
    TempDir tmp;
    const fs::path p = tmp.path / "s.csv";
    spit(p, "a,b\n1,2\n3,4\n5,6\n");
    std::vector<std::string> names;
    const SampleMatrix s = io::read_sample_csv(p, &names);
    CHECK(s.rows() == 3);
    CHECK(s.cols() == 2);
    CHECK(s.at(2, 1) == 6.0);
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "a");
    CHECK(names[1] == "b");

    spit(p, "1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(io::read_sample_csv(p), doctest::Contains("header"),
                         std::invalid_argument);

    spit(p, "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(io::read_sample_csv(p), std::invalid_argument);

    spit(p, "a,b\n1,2\n3,oops\n");
    CHECK_THROWS_AS(io::read_sample_csv(p), std::invalid_argument);

    spit(p, "a,b\n1,2\n");
    CHECK_THROWS_AS(io::read_sample_csv(p), std::invalid_argument);

    spit(p, "a,b\n");
    CHECK_THROWS_AS(io::read_sample_csv(p), std::invalid_argument);
}

TEST_CASE("correlation json parses dimension and entries") {
    TempDir tmp;
    const fs::path p = tmp.path / "c.json";
    spit(p, "{\"d\": 2, \"rho\": [[1.0, 0.25], [0.25, 1.0]]}\n");
    const CorrelationMatrix c = io::read_correlation(p);
    CHECK(c.dim() == 2);
    CHECK(c.entry(0, 1) == 0.25);

    spit(p, "{\"d\": 3, \"rho\": [[1.0, 0.25], [0.25, 1.0]]}\n");
    CHECK_THROWS_AS(io::read_correlation(p), std::invalid_argument);

    spit(p, "{\"rho\": [[1.0]]}\n");
    CHECK_THROWS(io::read_correlation(p));
}

TEST_CASE("marginal csv round-trips with and without header") {
    TempDir tmp;
    const fs::path p = tmp.path / "m.csv";
    const MarginalTransform t({0.0, 1.0, 3.0}, {0.2, 0.5, 0.8});
    io::write_marginal_csv(p, t);
    const std::string text = slurp(p);
    CHECK(text.rfind("x,F", 0) == 0);

    const MarginalTransform back = io::read_marginal_csv(p);
    REQUIRE(back.breakpoints().size() == 3);
    CHECK(back.breakpoints()[2] == 3.0);
    CHECK(back.cdf_values()[1] == 0.5);

    spit(p, "0,0.2\n1,0.5\n3,0.8\n");
    const MarginalTransform headerless = io::read_marginal_csv(p);
    CHECK(headerless.breakpoints()[1] == 1.0);

    spit(p, "0,0.2\n1,0.1\n");
    CHECK_THROWS_AS(io::read_marginal_csv(p), std::invalid_argument);
}

TEST_CASE("doubles render as shortest round-trip decimals") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(-2.5) == "-2.5");
    const double v = 0.30000000000000004;
    CHECK(std::stod(io::format_double(v)) == v);
}
