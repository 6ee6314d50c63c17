#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "flockmeter/cli.hpp"
#include "flockmeter/report_io.hpp"
#include "flockmeter/theory.hpp"

using namespace flockmeter;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  const auto dir = fs::temp_directory_path() / "flockmeter_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string field(const std::string& table, const std::string& key) {
  std::istringstream in(table);
  std::string k, v;
  while (in >> k >> v) {
    if (k == key) return v;
  }
  return {};
}

}  // namespace

TEST_CASE("usage and exit codes") {
  const auto none = call({});
  CHECK(none.code == cli::kExitUsage);
  CHECK(none.err.find("Usage") != std::string::npos);
  CHECK(call({"--help"}).code == cli::kExitOk);
  CHECK(call({"bogus"}).code == cli::kExitUsage);
  CHECK(call({"constants", "--dx0", "1"}).code == cli::kExitUsage);
  CHECK(call({"constants", "--dx0", "1", "--dv0", "1", "--frobnicate"}).code == cli::kExitUsage);
  CHECK(call({"constants", "--dx0", "1", "--dv0", "1", "--variant", "loose"}).code == cli::kExitUsage);

  const auto dir = workdir();
  std::ofstream(dir / "bad.json") << R"({"dt": -1})";
  const auto bad = call({"coupling", "--config", (dir / "bad.json").string(), "--out", dir.string()});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("dt") != std::string::npos);

  std::ofstream(dir / "typo.json") << R"({"Jlist": [4]})";
  const auto typo = call({"coupling", "--config", (dir / "typo.json").string(), "--out", dir.string()});
  CHECK(typo.code == cli::kExitUsage);
  CHECK(typo.err.find("Jlist") != std::string::npos);

  // unstable step: velocities blow up
  std::ofstream(dir / "blowup.json") << R"({"K": 1000, "gamma": 0, "dt": 1, "T": 400, "J_list": [4], "J_inf": 4, "M": 1})";
  const auto blow = call({"simulate", "--config", (dir / "blowup.json").string(), "--out", dir.string()});
  CHECK(blow.code == cli::kExitNumerical);
}

TEST_CASE("constants table matches the theory chain") {
  const auto r = call({"constants", "--K", "5", "--gamma", "0.5", "--dx0", "8.485", "--dv0", "2.828"});
  CHECK(r.code == 0);
  const auto rate = validate_rate(RateSpec::gamma_family(0.5));
  const auto k = theory::compute_constants(5.0, rate, 8.485, 2.828, 2.828, 2.828);
  CHECK(field(r.out, "x_inf") == report_io::format_double(k.x_inf));
  CHECK(field(r.out, "x_inf") == report_io::format_double(std::sinh(std::asinh(8.485) + 2.828 / 5.0)));
  CHECK(field(r.out, "alpha") == report_io::format_double(k.alpha));
  CHECK(field(r.out, "C_MF") == report_io::format_double(k.c_mf));
  CHECK(field(r.out, "C_Stab") == report_io::format_double(k.c_stab));
  CHECK(field(r.out, "flocking") == "true");

  const auto no = call({"constants", "--K", "0.1", "--gamma", "1", "--dx0", "0", "--dv0", "1"});
  CHECK(no.code == 0);
  CHECK(field(no.out, "flocking") == "false");
}

TEST_CASE("experiment subcommands write listed files") {
  const auto dir = workdir() / "runs";
  fs::remove_all(dir);
  std::ofstream(workdir() / "small.json") << R"({"J_list": [4, 8], "J_inf": 16, "M": 2, "T": 2})";
  const auto cfg = (workdir() / "small.json").string();
  for (const std::string kind : {"coupling", "w2rate", "stability", "telescope", "simulate"}) {
    const auto out = dir / kind;
    const auto r = call({kind, "--config", cfg, "--out", out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["subcommand"] == kind);
    for (const auto& f : manifest["files"]) CHECK(fs::exists(out / f.get<std::string>()));
    std::size_t listed = manifest["files"].size();
    CHECK(listed == static_cast<std::size_t>(std::distance(fs::directory_iterator(out), fs::directory_iterator{})));
  }
  CHECK(fs::exists(dir / "coupling" / "errX.svg"));
  CHECK(fs::exists(dir / "coupling" / "errV.svg"));

  const auto again = dir / "again";
  CHECK(call({"coupling", "--config", cfg, "--out", again.string()}).code == 0);
  CHECK(slurp(again / "coupling.csv") == slurp(dir / "coupling" / "coupling.csv"));

  const auto plot = call({"plot", "--csv", (dir / "coupling" / "coupling.csv").string(), "--kind", "errx-final",
                          "--out", (dir / "final.svg").string()});
  CHECK(plot.code == 0);
  CHECK(slurp(dir / "final.svg").find("errorbar") != std::string::npos);
  const auto mismatch = call({"plot", "--csv", (dir / "coupling" / "coupling.csv").string(), "--kind", "telescope",
                              "--out", (dir / "x.svg").string()});
  CHECK(mismatch.code == cli::kExitUsage);
  CHECK(mismatch.err.find("'n'") != std::string::npos);
}
