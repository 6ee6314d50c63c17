#include "flockmeter/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "flockmeter/error.hpp"

namespace flockmeter::config {
namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {"dim", "K",    "gamma", "rate_table",   "dt",           "T",           "J_list",
                                     "J_inf", "M", "seed",  "x_halfwidths", "v_halfwidths", "record_every"};

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key, "must be an integer");
  if (j.get<long long>() < 0) throw ConfigError(key, "must be nonnegative");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(number(e, key));
  return out;
}

std::vector<double> halfwidths(const json& j, const std::string& key, std::size_t dim) {
  if (j.is_number()) return std::vector<double>(dim, number(j, key));
  return numbers(j, key);
}

}  // namespace

ExperimentConfig from_json_text(const std::string& text, bool strict) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "top level must be an object");
  if (strict) {
    for (const auto& [key, value] : doc.items()) {
      if (!kKeys.contains(key)) throw ConfigError(key, "unknown key");
    }
  }

  ExperimentConfig c;
  if (doc.contains("dim")) {
    c.dim = count(doc["dim"], "dim");
    c.x_halfwidths.assign(c.dim, 3.0);
    c.v_halfwidths.assign(c.dim, 1.0);
  }
  if (doc.contains("K")) c.K = number(doc["K"], "K");
  if (doc.contains("gamma") && doc.contains("rate_table")) {
    throw ConfigError("rate_table", "give either gamma or rate_table, not both");
  }
  if (doc.contains("gamma")) c.rate = RateSpec::gamma_family(number(doc["gamma"], "gamma"));
  if (doc.contains("rate_table")) {
    const auto& t = doc["rate_table"];
    if (!t.is_object() || !t.contains("r") || !t.contains("psi")) {
      throw ConfigError("rate_table", "must be an object with arrays r and psi");
    }
    c.rate = RateSpec::tabulated(numbers(t["r"], "rate_table.r"), numbers(t["psi"], "rate_table.psi"));
  }
  if (doc.contains("dt")) c.dt = number(doc["dt"], "dt");
  if (doc.contains("T")) c.T = number(doc["T"], "T");
  if (doc.contains("J_list")) {
    const auto& js = doc["J_list"];
    if (!js.is_array()) throw ConfigError("J_list", "must be an array of integers");
    c.J_list.clear();
    for (const auto& e : js) c.J_list.push_back(count(e, "J_list"));
  }
  if (doc.contains("J_inf")) c.J_inf = count(doc["J_inf"], "J_inf");
  if (doc.contains("M")) c.M = count(doc["M"], "M");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
      throw ConfigError("seed", "must be a nonnegative 64-bit integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("x_halfwidths")) c.x_halfwidths = halfwidths(doc["x_halfwidths"], "x_halfwidths", c.dim);
  if (doc.contains("v_halfwidths")) c.v_halfwidths = halfwidths(doc["v_halfwidths"], "v_halfwidths", c.dim);
  if (doc.contains("record_every")) c.record_every = count(doc["record_every"], "record_every");
  c.validate();
  return c;
}

std::string to_json_text(const ExperimentConfig& c) {
  json doc = json::object();
  doc["dim"] = c.dim;
  doc["K"] = c.K;
  if (c.rate.kind == RateSpec::Kind::GammaFamily) {
    doc["gamma"] = c.rate.gamma;
  } else {
    doc["rate_table"] = {{"r", c.rate.r}, {"psi", c.rate.psi}};
  }
  doc["dt"] = c.dt;
  doc["T"] = c.T;
  doc["J_list"] = c.J_list;
  doc["J_inf"] = c.J_inf;
  doc["M"] = c.M;
  doc["seed"] = c.seed;
  doc["x_halfwidths"] = c.x_halfwidths;
  doc["v_halfwidths"] = c.v_halfwidths;
  doc["record_every"] = c.record_every;
  return doc.dump(2) + "\n";
}

ExperimentConfig load(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), strict);
}

void save(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json_text(config);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace flockmeter::config
