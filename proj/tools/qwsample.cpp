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

// qwsample command line front end. Talks to the library through the C API only.

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwsample/qwsample.h"

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// One JSON line on stderr; exit status is the qws_status value.
int report_failure(qws_status st) {
  std::fprintf(stderr, "{\"status\":\"%s\",\"code\":%d,\"message\":\"%s\"}\n", qws_status_name(st),
               static_cast<int>(st), json_escape(qws_last_error()).c_str());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wishart proposal sampler for quantum state posteriors"};
  app.set_version_flag("--version", std::string(qws_version()));

  std::string task;
  std::string config_path;
  std::vector<std::string> sets;
  // flag -> config key; values stay strings so the library does the parsing
  const std::vector<std::pair<std::string, std::string>> overrides = {
      {"--seed", "run.seed"},          {"--out", "run.out"},
      {"--threads", "run.threads"},    {"--N", "run.N"},
      {"--chunk-size", "run.chunk_size"}, {"--m", "proposal.m"},
      {"--n", "proposal.n"},           {"--kappa", "proposal.kappa"},
      {"--x1", "proposal.x1"},         {"--x2", "proposal.x2"},
      {"--counts", "target.counts"},   {"--pom", "target.pom"},
      {"--lambda-grid", "verify.lambda_grid"},
  };
  std::map<std::string, std::optional<std::string>> values;
  for (const auto& [flag, key] : overrides) values[flag];

  app.add_option("task", task,
                 "gen-uniform | gen-proposal | reject | verify | ml | acceptance-scan | slice | histogram | fwhm | "
                 "shift-fraction (overrides run.task)");
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  for (const auto& [flag, key] : overrides) app.add_option(flag, values[flag], "sets " + key);
  app.add_option("--set", sets, "section.key=value, repeatable");

  CLI11_PARSE(app, argc, argv);

  qws_config* cfg = nullptr;
  qws_status st = qws_config_create(&cfg);
  if (st != QWS_OK) return report_failure(st);
  auto done = [&](qws_status s) {
    const int code = s == QWS_OK ? 0 : report_failure(s);
    qws_config_destroy(cfg);
    return code;
  };

  if (!config_path.empty() && (st = qws_config_load_file(cfg, config_path.c_str())) != QWS_OK) return done(st);
  if (!task.empty() && (st = qws_config_set(cfg, "run.task", task.c_str())) != QWS_OK) return done(st);
  for (const auto& [flag, key] : overrides) {
    const auto& v = values[flag];
    if (v && (st = qws_config_set(cfg, key.c_str(), v->c_str())) != QWS_OK) return done(st);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "{\"status\":\"config\",\"code\":%d,\"message\":\"--set expects key=value\"}\n",
                   static_cast<int>(QWS_ERR_CONFIG));
      qws_config_destroy(cfg);
      return QWS_ERR_CONFIG;
    }
    if ((st = qws_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != QWS_OK) return done(st);
  }

  char* manifest = nullptr;
  st = qws_run(cfg, &manifest);
  if (st == QWS_OK) {
    std::printf("%s\n", manifest);
    qws_string_free(manifest);
  }
  return done(st);
}
