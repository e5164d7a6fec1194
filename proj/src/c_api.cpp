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

#include "qwsample/qwsample.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "qwsample/config.hpp"
#include "qwsample/proposal.hpp"
#include "qwsample/rejection.hpp"
#include "qwsample/runner.hpp"
#include "qwsample/target.hpp"

struct qws_config {
  qws::RunConfig cfg;
};
struct qws_target {
  qws::TargetSpec spec;
};
struct qws_proposal {
  qws::ProposalSpec spec;
};
struct qws_sample {
  qws::RejectionResult result;
};

namespace {

thread_local std::string g_last_error;

template <class F>
qws_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return QWS_OK;
  } catch (const qws::Error& e) {
    g_last_error = e.what();
    return static_cast<qws_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QWS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QWS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return QWS_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) qws::fail(qws::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qws::HermitianMatrix in_layout(int m, const double* layout, std::size_t len) {
  need(layout, "layout");
  if (len != qws::HermitianMatrix::layout_size(m))
    qws::fail(qws::ErrorCode::kDimensionMismatch, "layout length must be m*m = " + std::to_string(m * m));
  return qws::HermitianMatrix::from_layout(m, {layout, len});
}

void out_layout(const qws::HermitianMatrix& h, double* layout, std::size_t len) {
  need(layout, "layout");
  if (len != qws::HermitianMatrix::layout_size(h.dim()))
    qws::fail(qws::ErrorCode::kDimensionMismatch, "layout length must be m*m = " + std::to_string(h.dim() * h.dim()));
  h.to_layout({layout, len});
}

}  // namespace

extern "C" {

const char* qws_version(void) { return "0.1.0"; }

const char* qws_last_error(void) { return g_last_error.c_str(); }

const char* qws_status_name(qws_status status) {
  switch (status) {
    case QWS_OK:
      return "ok";
    case QWS_ERR_INVALID_ARGUMENT:
      return "invalid-argument";
    case QWS_ERR_INVALID_DIMENSION:
      return "invalid-dimension";
    case QWS_ERR_DIMENSION_MISMATCH:
      return "dimension-mismatch";
    case QWS_ERR_NOT_POSITIVE:
      return "not-positive";
    case QWS_ERR_NUMERICAL:
      return "numerical";
    case QWS_ERR_CONVERGENCE:
      return "convergence";
    case QWS_ERR_IO:
      return "io";
    case QWS_ERR_FORMAT:
      return "format";
    case QWS_ERR_CONFIG:
      return "config";
    case QWS_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

void qws_string_free(char* s) { std::free(s); }

qws_status qws_config_create(qws_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new qws_config{};
  });
}

void qws_config_destroy(qws_config* cfg) { delete cfg; }

qws_status qws_config_load_file(qws_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    cfg->cfg.load_file(path);
  });
}

qws_status qws_config_load_string(qws_config* cfg, const char* text) {
  return guarded([&] {
    need(cfg, "cfg");
    need(text, "text");
    cfg->cfg.load_string(text);
  });
}

qws_status qws_config_set(qws_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

qws_status qws_config_get(const qws_config* cfg, const char* key, char** value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    const auto entries = cfg->cfg.entries();
    const auto it = entries.find(key);
    if (it == entries.end()) qws::fail(qws::ErrorCode::kConfig, std::string("unknown config key '") + key + "'");
    *value = dup(it->second);
  });
}

qws_status qws_config_validate(const qws_config* cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.validate();
  });
}

qws_status qws_run(const qws_config* cfg, char** manifest_json) {
  return guarded([&] {
    need(cfg, "cfg");
    const std::string m = qws::run(cfg->cfg);
    if (manifest_json) *manifest_json = dup(m);
  });
}

qws_status qws_target_create(const char* pom_name, const double* counts, size_t k, qws_target** out) {
  return guarded([&] {
    need(pom_name, "pom_name");
    need(counts, "counts");
    need(out, "out");
    qws::Counts c;
    c.nu.assign(counts, counts + k);
    *out = new qws_target{qws::TargetSpec(qws::Pom::from_name(pom_name), std::move(c))};
  });
}

void qws_target_destroy(qws_target* t) { delete t; }

int qws_target_dim(const qws_target* t) { return t ? t->spec.dim() : 0; }

qws_status qws_target_log_density(const qws_target* t, const double* layout, size_t len, double* out) {
  return guarded([&] {
    need(t, "target");
    need(out, "out");
    *out = qws::log_target_density(in_layout(t->spec.dim(), layout, len), t->spec);
  });
}

qws_status qws_target_ml(const qws_target* t, double* layout, size_t len, double* log_f_max) {
  return guarded([&] {
    need(t, "target");
    const qws::MlResult r = qws::ml_estimator(t->spec);
    out_layout(r.rho_ml.matrix(), layout, len);
    if (log_f_max) *log_f_max = r.log_f_max;
  });
}

qws_status qws_proposal_create(int m, int n, double kappa, const double* delta_layout, size_t len,
                               qws_proposal** out) {
  return guarded([&] {
    need(out, "out");
    qws::check_dimension(m);
    qws::HermitianMatrix delta(m);
    if (delta_layout) delta = in_layout(m, delta_layout, len);
    *out = new qws_proposal{qws::ProposalSpec(qws::WishartParams::identity(m, n), delta, kappa)};
  });
}

qws_status qws_proposal_from_estimate(const qws_target* t, int n, double kappa, double x1, double x2,
                                      qws_proposal** out) {
  return guarded([&] {
    need(t, "target");
    need(out, "out");
    const qws::MlResult r = qws::ml_estimator(t->spec);
    *out = new qws_proposal{qws::proposal_from_estimate(r.rho_ml, n, kappa, x1, x2)};
  });
}

void qws_proposal_destroy(qws_proposal* p) { delete p; }

qws_status qws_proposal_log_density(const qws_proposal* p, const double* layout, size_t len, double* out) {
  return guarded([&] {
    need(p, "proposal");
    need(out, "out");
    *out = qws::log_proposal_density(in_layout(p->spec.m(), layout, len), p->spec);
  });
}

qws_status qws_proposal_draw(const qws_proposal* p, uint64_t seed, uint64_t total, uint64_t index, double* layout,
                             size_t len, double* log_g, int* physical) {
  return guarded([&] {
    need(p, "proposal");
    if (index >= total) qws::fail(qws::ErrorCode::kInvalidArgument, "index must be below total");
    const qws::ProposalGenerator gen(p->spec, seed, total);
    const qws::ProposalDraw d = gen.draw(index);
    out_layout(d.state, layout, len);
    if (log_g) *log_g = d.log_g;
    if (physical) *physical = d.physical ? 1 : 0;
  });
}

qws_status qws_sample_target(const qws_proposal* p, const qws_target* t, uint64_t total, uint64_t seed, int threads,
                             qws_sample** out) {
  return guarded([&] {
    need(p, "proposal");
    need(t, "target");
    need(out, "out");
    qws::RejectionOptions o;
    o.total = total;
    o.seed = seed;
    o.threads = threads;
    *out = new qws_sample{qws::sample_target(p->spec, t->spec, o)};
  });
}

void qws_sample_destroy(qws_sample* s) { delete s; }

qws_status qws_sample_info_get(const qws_sample* s, qws_sample_info* info) {
  return guarded([&] {
    need(s, "sample");
    need(info, "info");
    const auto& r = s->result.report;
    *info = {s->result.sample.m, r.proposed, r.physical, r.accepted, r.p_acc, r.log_C};
  });
}

qws_status qws_sample_state(const qws_sample* s, uint64_t k, double* layout, size_t len) {
  return guarded([&] {
    need(s, "sample");
    if (k >= s->result.sample.states.size()) qws::fail(qws::ErrorCode::kInvalidArgument, "state index out of range");
    out_layout(s->result.sample.states[k], layout, len);
  });
}

}  // extern "C"
