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

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "qwsample/qwsample.h"

TEST_CASE("version and status names") {
  CHECK(std::string(qws_version()) == "0.1.0");
  CHECK(std::string(qws_status_name(QWS_ERR_CONFIG)) == "config");
  CHECK(std::string(qws_status_name(QWS_OK)) == "ok");
}

TEST_CASE("config handle") {
  qws_config* cfg = nullptr;
  REQUIRE(qws_config_create(&cfg) == QWS_OK);
  CHECK(qws_config_set(cfg, "proposal.kappa", "0.3") == QWS_OK);
  char* v = nullptr;
  REQUIRE(qws_config_get(cfg, "proposal.kappa", &v) == QWS_OK);
  CHECK(std::stod(v) == 0.3);
  qws_string_free(v);
  CHECK(qws_config_set(cfg, "proposal.bogus", "1") == QWS_ERR_CONFIG);
  CHECK(std::string(qws_last_error()).find("bogus") != std::string::npos);
  CHECK(qws_config_set(cfg, "proposal.kappa", "3") == QWS_OK);
  CHECK(qws_config_validate(cfg) == QWS_ERR_CONFIG);
  CHECK(qws_config_load_string(cfg, "[proposal]\nkappa = 0.1\n") == QWS_OK);
  CHECK(qws_config_validate(cfg) == QWS_OK);
  CHECK(std::string(qws_last_error()).empty());
  CHECK(qws_config_set(nullptr, "a", "b") == QWS_ERR_INVALID_ARGUMENT);
  qws_config_destroy(cfg);
}

TEST_CASE("run through the C API") {
  qws_config* cfg = nullptr;
  REQUIRE(qws_config_create(&cfg) == QWS_OK);
  qws_config_set(cfg, "run.task", "fwhm");
  qws_config_set(cfg, "run.out", "c_api_fwhm");
  char* man = nullptr;
  REQUIRE(qws_run(cfg, &man) == QWS_OK);
  CHECK(std::string(man).find("\"fwhm\"") != std::string::npos);
  qws_string_free(man);
  qws_config_destroy(cfg);
}

TEST_CASE("target, proposal and sample handles") {
  const double nu[] = {10, 20, 25, 45};
  qws_target* t = nullptr;
  REQUIRE(qws_target_create("tetra", nu, 4, &t) == QWS_OK);
  CHECK(qws_target_dim(t) == 2);
  double lay[4];
  double lf = 0;
  REQUIRE(qws_target_ml(t, lay, 4, &lf) == QWS_OK);
  const double rx = 2 * lay[2], ry = -2 * lay[3], rz = lay[0] - lay[1];
  CHECK(std::sqrt(rx * rx + ry * ry + rz * rz) == doctest::Approx(0.8832).epsilon(1e-3));
  double lf2 = 0;
  REQUIRE(qws_target_log_density(t, lay, 4, &lf2) == QWS_OK);
  CHECK(lf2 == doctest::Approx(lf));
  CHECK(qws_target_log_density(t, lay, 3, &lf2) == QWS_ERR_DIMENSION_MISMATCH);
  CHECK(qws_target_create("tetra", nu, 3, &t) == QWS_ERR_DIMENSION_MISMATCH);

  qws_proposal* p = nullptr;
  REQUIRE(qws_proposal_from_estimate(t, 13, 0.2, 0.0, 1.0, &p) == QWS_OK);
  double dl[4], lg = 0;
  int phys = -1;
  REQUIRE(qws_proposal_draw(p, 1, 100, 5, dl, 4, &lg, &phys) == QWS_OK);
  double lg2 = 0;
  if (phys) {
    REQUIRE(qws_proposal_log_density(p, dl, 4, &lg2) == QWS_OK);
    CHECK(lg2 == doctest::Approx(lg).epsilon(1e-9));
  }
  CHECK(qws_proposal_draw(p, 1, 100, 100, dl, 4, &lg, &phys) == QWS_ERR_INVALID_ARGUMENT);

  qws_sample* s = nullptr;
  REQUIRE(qws_sample_target(p, t, 20000, 1, 1, &s) == QWS_OK);
  qws_sample_info info;
  REQUIRE(qws_sample_info_get(s, &info) == QWS_OK);
  CHECK(info.m == 2);
  CHECK(info.proposed == 20000);
  CHECK(info.accepted > 0);
  CHECK(info.p_acc == doctest::Approx(double(info.accepted) / 20000));
  REQUIRE(qws_sample_state(s, 0, dl, 4) == QWS_OK);
  CHECK(dl[0] + dl[1] == doctest::Approx(1.0));
  CHECK(qws_sample_state(s, info.accepted, dl, 4) == QWS_ERR_INVALID_ARGUMENT);
  qws_sample_destroy(s);

  qws_proposal* q = nullptr;
  CHECK(qws_proposal_create(2, 4, 1.5, nullptr, 0, &q) == QWS_ERR_INVALID_ARGUMENT);
  CHECK(qws_proposal_create(1, 4, 0.1, nullptr, 0, &q) == QWS_ERR_INVALID_DIMENSION);
  const double bad_shift[] = {0.1, 0.1, 0.0, 0.0};
  CHECK(qws_proposal_create(2, 4, 0.1, bad_shift, 4, &q) == QWS_ERR_INVALID_ARGUMENT);
  qws_proposal_destroy(p);
  qws_target_destroy(t);
}
