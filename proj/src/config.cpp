// Copyright 2026 The qwsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qwsample/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qwsample/error.hpp"

namespace qws {

namespace {

const std::pair<Task, const char*> kTaskNames[] = {
    {Task::kGenUniform, "gen-uniform"},   {Task::kGenProposal, "gen-proposal"},
    {Task::kReject, "reject"},            {Task::kVerify, "verify"},
    {Task::kMl, "ml"},                    {Task::kAcceptanceScan, "acceptance-scan"},
    {Task::kSlice, "slice"},              {Task::kHistogram, "histogram"},
    {Task::kFwhm, "fwhm"},                {Task::kShiftFraction, "shift-fraction"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorCode::kConfig, "invalid value '" + value + "' for " + key);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || v.empty()) bad_value(key, raw);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) bad_value(key, raw);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>)
      s += format_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field num(T RunConfig::*p) {
  return {[p](RunConfig& c, const std::string& k, const std::string& v) { c.*p = parse_number<T>(k, v); },
          [p](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return format_double(c.*p);
            else
              return std::to_string(c.*p);
          }};
}

Field str(std::string RunConfig::*p) {
  return {[p](RunConfig& c, const std::string&, const std::string& v) { c.*p = trim(v); },
          [p](const RunConfig& c) { return c.*p; }};
}

Field dlist(std::vector<double> RunConfig::*p) {
  return {[p](RunConfig& c, const std::string& k, const std::string& v) {
            try {
              c.*p = parse_double_list(v);
            } catch (const Error&) {
              bad_value(k, v);
            }
          },
          [p](const RunConfig& c) { return join(c.*p); }};
}

Field ilist(std::vector<int> RunConfig::*p) {
  return {[p](RunConfig& c, const std::string& k, const std::string& v) {
            try {
              c.*p = parse_int_list(v);
            } catch (const Error&) {
              bad_value(k, v);
            }
          },
          [p](const RunConfig& c) { return join(c.*p); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = {
      {"run.task", {[](RunConfig& c, const std::string&, const std::string& v) { c.task = parse_task(trim(v)); },
                    [](const RunConfig& c) { return std::string(to_string(c.task)); }}},
      {"run.seed", num(&RunConfig::seed)},
      {"run.out", str(&RunConfig::out)},
      {"run.threads", num(&RunConfig::threads)},
      {"run.N", num(&RunConfig::N)},
      {"run.chunk_size", num(&RunConfig::chunk_size)},
      {"proposal.m", num(&RunConfig::m)},
      {"proposal.n", num(&RunConfig::n)},
      {"proposal.kappa", num(&RunConfig::kappa)},
      {"proposal.x1", num(&RunConfig::x1)},
      {"proposal.x2", num(&RunConfig::x2)},
      {"proposal.delta_file", str(&RunConfig::delta_file)},
      {"proposal.split", str(&RunConfig::split)},
      {"proposal.log_C_offset", num(&RunConfig::log_C_offset)},
      {"target.counts", str(&RunConfig::counts)},
      {"target.counts_file", str(&RunConfig::counts_file)},
      {"target.pom", str(&RunConfig::pom)},
      {"target.pom_file", str(&RunConfig::pom_file)},
      {"verify.lambda_grid", str(&RunConfig::lambda_grid)},
      {"verify.n_ufm", num(&RunConfig::n_ufm)},
      {"verify.replicas", num(&RunConfig::replicas)},
      {"histogram.selector", str(&RunConfig::selector)},
      {"histogram.bins", num(&RunConfig::bins)},
      {"histogram.lo", num(&RunConfig::lo)},
      {"histogram.hi", num(&RunConfig::hi)},
      {"histogram.source", str(&RunConfig::source)},
      {"histogram.z_peak", num(&RunConfig::z_peak)},
      {"slice.directions", num(&RunConfig::directions)},
      {"fwhm.qubits", ilist(&RunConfig::qubits)},
      {"fwhm.z_grid", dlist(&RunConfig::z_grid)},
      {"shift.dz_grid", dlist(&RunConfig::dz_grid)},
      {"shift.n_offsets", ilist(&RunConfig::n_offsets)},
      {"scan.n", ilist(&RunConfig::scan_n)},
      {"scan.kappa", dlist(&RunConfig::scan_kappa)},
      {"scan.x1", dlist(&RunConfig::scan_x1)},
      {"scan.x2", dlist(&RunConfig::scan_x2)},
  };
  return f;
}

}  // namespace

Task parse_task(const std::string& name) {
  for (const auto& [t, s] : kTaskNames)
    if (name == s) return t;
  fail(ErrorCode::kConfig, "unknown task '" + name + "'");
}

const char* to_string(Task t) {
  for (const auto& [task, s] : kTaskNames)
    if (task == t) return s;
  return "unknown";
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) out.push_back(parse_number<double>("list", tok));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& tok : split_list(text)) out.push_back(parse_number<int>("list", tok));
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
  it->second.set(*this, key, value);
}

void RunConfig::load_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kConfig, std::string("config parse error: ") + e.message() + " at line " +
                                 std::to_string(e.line()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::kConfig, "key '" + section + "' outside a section");
    for (const auto& [key, value] : body) set(section + "." + key, value.data());
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  load_string(ss.str());
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorCode::kConfig, msg);
  };
  check(threads >= 1 && threads <= 1024, "run.threads must lie in [1, 1024]");
  check(N >= 1, "run.N must be positive");
  check(chunk_size >= 1, "run.chunk_size must be positive");
  check(!out.empty(), "run.out must not be empty");
  check(m >= 2 && m <= 16, "proposal.m must lie in [2, 16]");
  check(n == 0 || n >= m, "proposal.n must be at least proposal.m");
  check(kappa >= 0.0 && kappa <= 1.0, "proposal.kappa must lie in [0, 1]");
  check(x1 >= 0.0 && x1 < 1.0, "proposal.x1 must lie in [0, 1)");
  check(split == "exact" || split == "bernoulli", "proposal.split must be exact or bernoulli");
  check(log_C_offset >= 0.0, "proposal.log_C_offset must be nonnegative");
  check(counts.empty() || counts_file.empty(), "set target.counts or target.counts_file, not both");
  check(n_ufm >= 1, "verify.n_ufm must be positive");
  check(replicas >= 1, "verify.replicas must be positive");
  check(lambda_grid == "default" || lambda_grid == "dense" || !parse_double_list(lambda_grid).empty(),
        "verify.lambda_grid must be default, dense, or a list");
  check(bins >= 1 && bins <= 100000, "histogram.bins must lie in [1, 100000]");
  check(hi > lo, "histogram.hi must exceed histogram.lo");
  check(!selector.empty(), "histogram.selector must not be empty");
  check(source == "wishart" || source == "uniform" || source == "proposal" || source == "target",
        "histogram.source must be wishart, uniform, proposal or target");
  check(z_peak > -1.0 && z_peak < 1.0, "histogram.z_peak must lie in (-1, 1)");
  check(directions >= 1, "slice.directions must be positive");
  for (int q : qubits) check(q >= 1 && q <= 4, "fwhm.qubits entries must lie in [1, 4]");
  for (double z : z_grid) check(z > 0.0 && z < 1.0, "fwhm.z_grid entries must lie in (0, 1)");
  for (double d : dz_grid) check(d >= 0.0, "shift.dz_grid entries must be nonnegative");
  for (int o : n_offsets) check(o >= 0, "shift.n_offsets entries must be nonnegative");
  for (double k : scan_kappa) check(k >= 0.0 && k <= 1.0, "scan.kappa entries must lie in [0, 1]");
  for (double v : scan_x1) check(v >= 0.0 && v < 1.0, "scan.x1 entries must lie in [0, 1)");
  for (int v : scan_n) check(v >= m, "scan.n entries must be at least proposal.m");
}

std::map<std::string, std::string> RunConfig::entries() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, f] : fields()) out[k] = f.get(*this);
  return out;
}

}  // namespace qws
