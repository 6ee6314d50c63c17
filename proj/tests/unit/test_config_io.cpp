#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flockmeter/config.hpp"
#include "flockmeter/error.hpp"
#include "flockmeter/experiments.hpp"
#include "flockmeter/report_io.hpp"

using namespace flockmeter;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "flockmeter_test_config_io";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentReport tiny_report() {
  ExperimentReport r;
  r.kind = "coupling";
  r.times = {0.0, 0.1};
  r.series = {{"errX", 5, {0.0, 1.0 / 3.0}, {0.0, 1e-17}}, {"errV", 5, {0.0, 2.0 / 7.0}, {0.0, 0.1}}};
  return r;
}

}  // namespace

TEST_CASE("empty document gives the reference defaults") {
  const auto c = config::from_json_text("{}");
  CHECK(c == ExperimentConfig{});
  CHECK(c.dim == 2);
  CHECK(c.K == 5.0);
  CHECK(c.rate.gamma == 0.5);
  CHECK(c.dt == 0.05);
  CHECK(c.x_halfwidths == std::vector<double>{3.0, 3.0});
  CHECK(c.v_halfwidths == std::vector<double>{1.0, 1.0});
}

TEST_CASE("config errors name the key") {
  auto key_of = [](const std::string& text) {
    try {
      config::from_json_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<accepted>");
  };
  CHECK(key_of(R"({"dt": -1})") == "dt");
  CHECK(key_of(R"({"dtt": 0.1})") == "dtt");
  CHECK(key_of(R"({"J_list": "ten"})") == "J_list");
  CHECK(key_of(R"({"gamma": -2})") == "gamma");
  CHECK(key_of(R"({"gamma": 1, "rate_table": {"r": [0, 1], "psi": [1, 0.5]}})") == "rate_table");
  CHECK(key_of(R"({"rate_table": {"r": [0, 1], "psi": [1, 1.5]}})") == "rate_table");
  CHECK_THROWS_AS(config::from_json_text("{not json"), ConfigError);
  CHECK_NOTHROW(config::from_json_text(R"({"dtt": 0.1})", false));
  CHECK_THROWS_AS(config::load(scratch("missing.json")), Error);
}

TEST_CASE("config overrides and round trip") {
  const auto c = config::from_json_text(
      R"({"dim": 3, "K": 2.5, "gamma": 1.0, "T": 1, "J_list": [4, 8], "J_inf": 16, "M": 3, "seed": 12345678901234,
          "x_halfwidths": 2, "record_every": 2})");
  CHECK(c.dim == 3);
  CHECK(c.x_halfwidths == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(c.v_halfwidths == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(c.seed == 12345678901234ULL);

  const auto text = config::to_json_text(c);
  CHECK(config::from_json_text(text) == c);
  config::save(c, scratch("a.json"));
  config::save(config::load(scratch("a.json")), scratch("b.json"));
  std::ifstream a(scratch("a.json")), b(scratch("b.json"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() == text);

  const auto tab = config::from_json_text(R"({"rate_table": {"r": [0, 1, 2], "psi": [1, 0.6, 0.2]}})");
  CHECK(tab.rate.kind == RateSpec::Kind::Tabulated);
  CHECK(config::from_json_text(config::to_json_text(tab)) == tab);
}

TEST_CASE("CSV schemas and shapes") {
  CHECK(report_io::schema("coupling") ==
        std::vector<std::string>{"t", "J", "errX_mean", "errX_stderr", "errV_mean", "errV_stderr"});
  CHECK(report_io::schema("w2rate") == std::vector<std::string>{"J", "t", "w2sq_mean", "w2sq_stderr"});
  CHECK(report_io::schema("stability") ==
        std::vector<std::string>{"t", "dist_mean", "dist_stderr", "LX_mean", "LV_mean", "cstab_bound"});
  CHECK(report_io::schema("telescope") == std::vector<std::string>{"n", "t_n", "increment_mean", "increment_stderr"});

  ExperimentReport empty;
  empty.kind = "coupling";
  CHECK(report_io::to_csv(empty) == "t,J,errX_mean,errX_stderr,errV_mean,errV_stderr\n");

  auto one = tiny_report();
  one.times = {0.0};
  for (auto& s : one.series) {
    s.mean.resize(1);
    s.stderr_.resize(1);
  }
  CHECK(line_count(report_io::to_csv(one)) == 2);
  CHECK(line_count(report_io::to_csv(tiny_report())) == 3);
}

TEST_CASE("CSV round trip at 17 digits") {
  CHECK(report_io::format_double(0.1) == "0.10000000000000001");
  CHECK(report_io::format_double(0.0) == "0");
  const auto r = tiny_report();
  const auto path = scratch("coupling.csv");
  report_io::emit_csv(r, path);
  const auto table = report_io::read_csv(path);
  CHECK_NOTHROW(report_io::require_schema(table, "coupling"));
  const auto x = table.values("errX_mean");
  CHECK(x[1] == r.series[0].mean[1]);
  CHECK(table.values("errX_stderr")[1] == 1e-17);
  CHECK(table.values("errV_mean")[1] == 2.0 / 7.0);
  try {
    report_io::require_schema(table, "w2rate");
    FAIL("schema mismatch accepted");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("w2sq_mean") != std::string::npos);
  }
  CHECK_THROWS_AS(report_io::write_text("/nonexistent-dir/x.csv", "x"), Error);
}
