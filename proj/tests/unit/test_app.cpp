#include <doctest.h>

#include <cmath>
#include <sstream>

#include "app/config.hpp"
#include "app/csv.hpp"
#include "app/experiment.hpp"

using namespace cogmac::app;

namespace {

std::string csv_of(const Table& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

std::string error_of(const std::string& text) {
    try {
        parse_spec(text, "x.toml");
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

const char* kHd = R"(protocol = "hdmac_single"
mode = "both"
seed = 9
cycles = 10000

[scenario]
n_su = 4
w = 32
m = 3
snr_db = -17.5
p_idle = 0.75

[[sweep]]
path = "tau"
values = [0.001, 0.0026]

[[sweep]]
path = "scenario.w"
values = [16, 32, 64]
)";

}  // namespace

TEST_SUITE("app") {
    TEST_CASE("numbers print with nine significant digits") {
        CHECK(format_number(0.1) == "0.1");
        CHECK(format_number(1.0 / 3) == "0.333333333");
        CHECK(format_number(123456789012.0) == "1.23456789e+11");
        CHECK(format_number(0.0) == "0");
        CHECK(format_number(-0.0) == "0");
        CHECK(format_number(2.5) == "2.5");
    }

    TEST_CASE("csv quoting and line endings") {
        Table t{{"a", "b"}, {{"1", "x,y"}, {"say \"hi\"", "2"}}};
        CHECK(csv_of(t) == "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",2\n");
    }

    TEST_CASE("db keys are converted to linear") {
        ExperimentSpec s = parse_spec(kHd, "x.toml");
        REQUIRE(s.scenario.count("snr"));
        CHECK(s.scenario.at("snr").from_db);
        CHECK(std::get<double>(s.scenario.at("snr").value) == doctest::Approx(std::pow(10.0, -1.75)));
        CHECK(s.sweep.size() == 2);
        CHECK(s.sweep[1].labels[2] == "64");
    }

    TEST_CASE("errors carry file and line") {
        std::string e = error_of("protocol = \"hdmac_single\"\n[scenario]\nn_su = 4\nbogus = 1\n");
        CHECK(e.find("x.toml:4:") == 0);
        CHECK(e.find("bogus") != std::string::npos);
        e = error_of("protocol = \"nope\"\n");
        CHECK(e.find("x.toml:1:") == 0);
        e = error_of("protocol = \"hdmac_single\"\n[scenario]\nsnr = 0.1\nsnr_db = -10\n");
        CHECK(e.find("x.toml:") == 0);
        e = error_of("protocol = \"hdmac_single\"\nmode = [1,\n");
        CHECK(e.find("x.toml:") == 0);
    }

    TEST_CASE("out-of-range probabilities fail validation") {
        ExperimentSpec s = parse_spec("protocol = \"hdmac_single\"\n[scenario]\nn_su = 4\np_idle = 1.2\ntau = 0.002\n", "x.toml");
        CHECK_THROWS_AS(validate_experiment(s), InputError);
    }

    TEST_CASE("sweep product runs with the last axis fastest") {
        ExperimentSpec s = parse_spec(kHd, "x.toml");
        s.mode = Mode::analytic;
        Table t = run_experiment(s, {});
        REQUIRE(t.rows.size() == 6);
        CHECK(t.header[0] == "tau");
        CHECK(t.header[1] == "w");
        CHECK(t.rows[0][0] == "0.001");
        CHECK(t.rows[1][0] == "0.001");
        CHECK(t.rows[1][1] == "32");
        CHECK(t.rows[3][0] == "0.0026");
        CHECK(t.rows[3][1] == "16");
    }

    TEST_CASE("output is byte-stable across job counts") {
        ExperimentSpec s = parse_spec(kHd, "x.toml");
        RunOptions one, three;
        three.jobs = 3;
        std::string a = csv_of(run_experiment(s, one));
        CHECK(a == csv_of(run_experiment(s, three)));
        CHECK(a == csv_of(run_experiment(s, one)));
        RunOptions other;
        other.seed = 10;
        CHECK(a != csv_of(run_experiment(s, other)));
    }

    TEST_CASE("point seeds differ") {
        CHECK(point_seed(1, 0) != point_seed(1, 1));
        CHECK(point_seed(1, 0) != point_seed(2, 0));
        CHECK(point_seed(7, 3) == point_seed(7, 3));
    }
}
