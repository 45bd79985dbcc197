#include "esm/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace esm {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  size_t pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int x = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "' expects an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    unsigned long long x = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "' expects an unsigned integer, got '" +
                         value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ParameterError("config key '" + key + "' expects a boolean, got '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ParameterError("config key '" + key + "' has an empty list item");
    out.push_back(parse(key, item));
  }
  if (out.empty()) throw ParameterError("config key '" + key + "' expects a nonempty list");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) +
                           " is not of the form key = value: '" + trim(line) + "'");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty())
      throw ParameterError("config line " + std::to_string(lineno) + " has an empty key");
    kv[key] = value;
  }
  return kv;
}

void apply_config(RunConfig& config, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "source") {
      if (value == "builtin")
        config.source = InstanceSource::builtin;
      else if (value == "file")
        config.source = InstanceSource::file;
      else if (value == "random")
        config.source = InstanceSource::random;
      else
        throw ParameterError("source must be builtin, file, or random, got '" + value + "'");
    } else if (key == "instance_file") {
      config.instance_file = value;
    } else if (key == "I") {
      config.I = parse_int(key, value);
    } else if (key == "instance_seed") {
      config.instance_seed = parse_u64(key, value);
    } else if (key == "profitable") {
      config.profitable = parse_bool(key, value);
    } else if (key == "a") {
      config.a = parse_double(key, value);
    } else if (key == "epsilon") {
      config.bidding.epsilon = parse_double(key, value);
    } else if (key == "max_iter") {
      config.bidding.max_iterations = parse_int(key, value);
    } else if (key == "mode") {
      if (value == "strategic")
        config.bidding.mode = BidMode::strategic;
      else if (value == "price-taker" || value == "price_taker")
        config.bidding.mode = BidMode::price_taker;
      else
        throw ParameterError("mode must be strategic or price-taker, got '" + value + "'");
    } else if (key == "schedule") {
      if (value == "sync")
        config.bidding.schedule = Schedule::sync;
      else if (value == "async")
        config.bidding.schedule = Schedule::async;
      else
        throw ParameterError("schedule must be sync or async, got '" + value + "'");
    } else if (key == "miss_prob") {
      config.bidding.miss_probability = parse_double(key, value);
    } else if (key == "max_delay") {
      config.bidding.max_delay = parse_int(key, value);
    } else if (key == "seed") {
      config.bidding.seed = parse_u64(key, value);
      config.instance_seed = config.bidding.seed;
    } else if (key == "async_seed") {
      config.bidding.seed = parse_u64(key, value);
    } else if (key == "initial_price") {
      config.bidding.initial_price = parse_double(key, value);
    } else if (key == "subproblem_tol") {
      config.bidding.subproblem_tol = parse_double(key, value);
    } else if (key == "experiment") {
      config.experiment = value;
    } else if (key == "target") {
      config.misreport_target = parse_int(key, value);
    } else if (key == "sizes") {
      config.sizes = parse_list<int>(key, value, parse_int);
    } else if (key == "n_seeds") {
      config.n_seeds = parse_int(key, value);
    } else if (key == "type_counts") {
      config.type_counts = parse_list<int>(key, value, parse_int);
    } else if (key == "n_draws") {
      config.n_draws = parse_int(key, value);
    } else if (key == "delays") {
      config.delays = parse_list<int>(key, value, parse_int);
    } else if (key == "a_values") {
      config.a_values = parse_list<double>(key, value, parse_double);
    } else if (key == "out") {
      config.out_dir = value;
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
}

std::vector<Prosumer> read_instance_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open instance file '" + path + "'");
  std::vector<Prosumer> prosumers;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    std::stringstream ss(body);
    int id;
    double a1, a2, b1, b2, pmin, pmax, dmin, dmax;
    if (!(ss >> id >> a1 >> a2 >> b1 >> b2 >> pmin >> pmax >> dmin >> dmax))
      throw ParameterError("instance file line " + std::to_string(lineno) +
                           " needs: id a1 a2 b1 b2 p_min p_max d_min d_max");
    std::string rest;
    if (ss >> rest)
      throw ParameterError("instance file line " + std::to_string(lineno) +
                           " has trailing data '" + rest + "'");
    prosumers.push_back(
        Prosumer{id, ConvexCurvePair::quadratic(a1, a2, b1, b2), pmin, pmax, dmin, dmax});
  }
  if (prosumers.empty()) throw ParameterError("instance file '" + path + "' has no rows");
  return prosumers;
}

void write_instance_rows(const std::string& path, const MarketInstance& instance) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write instance file '" + path + "'");
  out << "# id a1 a2 b1 b2 p_min p_max d_min d_max\n";
  for (const auto& q : instance.prosumers) {
    if (!q.curves.is_quadratic())
      throw ParameterError("instance files hold quadratic curves only");
    out << q.id << ' ' << format_number(q.curves.a1()) << ' ' << format_number(q.curves.a2())
        << ' ' << format_number(q.curves.b1()) << ' ' << format_number(q.curves.b2()) << ' '
        << format_number(q.p_min) << ' ' << format_number(q.p_max) << ' '
        << format_number(q.d_min) << ' ' << format_number(q.d_max) << '\n';
  }
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw ParameterError("csv row width " + std::to_string(row.size()) +
                           " does not match header width " + std::to_string(columns.size()));
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

void write_report_csv(const std::string& path, const ScenarioReport& report) {
  write_csv(path, report.columns, report.rows);
}

}  // namespace esm
