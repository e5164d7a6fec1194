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

#include "qwsample/runner.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "parallel.hpp"
#include "qwsample/chunk_io.hpp"
#include "qwsample/proposal.hpp"
#include "qwsample/rejection.hpp"
#include "qwsample/target.hpp"
#include "qwsample/verify.hpp"
#include "qwsample/wishart.hpp"

namespace qws {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Tracks created files so a failed run leaves nothing behind.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create output directory " + dir_ + ": " + ec.message());
  }
  std::string add(const std::string& name) {
    const std::string p = (fs::path(dir_) / name).string();
    files_.push_back(p);
    return p;
  }
  const std::vector<std::string>& files() const { return files_; }
  void remove_all() {
    for (const auto& f : files_) std::remove(f.c_str());
    files_.clear();
  }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

// RFC-4180 table; header first, CRLF line ends.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorCode::kIo, "cannot create " + path);
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(cells[i]);
    }
    out_ << "\r\n";
    if (!out_) fail(ErrorCode::kIo, "write to " + path_ + " failed");
  }
  void close() {
    out_.close();
    if (out_.fail()) fail(ErrorCode::kIo, "closing " + path_ + " failed");
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  std::string path_;
  std::ofstream out_;
};

class Run {
 public:
  explicit Run(const RunConfig& cfg) : cfg_(cfg), out_(cfg.out) {}

  std::string execute() {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      report_path_ = out_.add("report.jsonl");
      report_.open(report_path_, std::ios::binary | std::ios::trunc);
      if (!report_) fail(ErrorCode::kIo, "cannot create " + report_path_);
      dispatch();
      report_.close();
      if (report_.fail()) fail(ErrorCode::kIo, "closing " + report_path_ + " failed");
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return write_manifest(wall);
    } catch (...) {
      report_.close();
      out_.remove_all();
      throw;
    }
  }

 private:
  void dispatch() {
    switch (cfg_.task) {
      case Task::kGenUniform:
        return gen_uniform();
      case Task::kGenProposal:
        return gen_proposal();
      case Task::kReject:
        return reject();
      case Task::kVerify:
        return verify();
      case Task::kMl:
        return ml();
      case Task::kAcceptanceScan:
        return scan();
      case Task::kSlice:
        return slice();
      case Task::kHistogram:
        return histogram();
      case Task::kFwhm:
        return fwhm();
      case Task::kShiftFraction:
        return shift_fraction();
    }
  }

  void report(const json& j) {
    report_ << j.dump() << '\n';
    if (!report_) fail(ErrorCode::kIo, "write to " + report_path_ + " failed");
  }

  std::string chunk_name(const std::string& prefix, std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%05zu.qws", k);
    return prefix + buf;
  }

  // ---- inputs

  const TargetSpec& target() {
    if (target_) return *target_;
    std::string text = cfg_.counts;
    if (!cfg_.counts_file.empty()) {
      text = read_text(cfg_.counts_file);
      inputs_["counts_file"] = hex64(fnv1a64(text));
    }
    if (text.empty()) fail(ErrorCode::kConfig, std::string("task ") + to_string(cfg_.task) + " needs target.counts");
    std::optional<Pom> pom;
    if (!cfg_.pom_file.empty()) {
      inputs_["pom_file"] = hex64(fnv1a64(read_text(cfg_.pom_file)));
      pom.emplace(read_chunk(cfg_.pom_file).states);
    } else {
      pom.emplace(Pom::from_name(cfg_.pom));
    }
    target_.emplace(std::move(*pom), Counts::parse(text));
    if (target_->dim() != cfg_.m)
      fail(ErrorCode::kConfig, "POM dimension " + std::to_string(target_->dim()) + " differs from proposal.m");
    digests_["target"] = spec_digest(*target_);
    return *target_;
  }

  const MlResult& ml_result() {
    if (!ml_) {
      ml_ = ml_estimator(target());
      report({{"event", "ml"},
              {"log_f_max", ml_->log_f_max},
              {"iterations", ml_->iterations},
              {"converged", ml_->converged},
              {"rank", ml_->rank},
              {"kkt_residual", ml_->kkt_residual}});
    }
    return *ml_;
  }

  SplitMode split() const { return cfg_.split == "bernoulli" ? SplitMode::kBernoulli : SplitMode::kExactCount; }

  ProposalSpec proposal() {
    const int n = cfg_.effective_n();
    std::optional<ProposalSpec> spec;
    if (cfg_.x1 != 0.0 || cfg_.x2 != 0.0) {
      if (!cfg_.delta_file.empty()) fail(ErrorCode::kConfig, "proposal.delta_file excludes proposal.x1 and proposal.x2");
      spec.emplace(proposal_from_estimate(ml_result().rho_ml, n, cfg_.kappa, cfg_.x1, cfg_.x2, split()));
    } else {
      HermitianMatrix delta(cfg_.m);
      if (!cfg_.delta_file.empty()) {
        inputs_["delta_file"] = hex64(fnv1a64(read_text(cfg_.delta_file)));
        const ChunkData d = read_chunk(cfg_.delta_file);
        if (d.states.size() != 1 || d.m != cfg_.m)
          fail(ErrorCode::kConfig, "proposal.delta_file must hold one m x m matrix");
        delta = d.states[0];
      }
      spec.emplace(WishartParams::identity(cfg_.m, n), delta, cfg_.kappa, split());
    }
    digests_["proposal"] = spec_digest(*spec);
    return *spec;
  }

  RejectionOptions rejection_options(std::uint64_t seed) {
    RejectionOptions o;
    o.total = cfg_.N;
    o.seed = seed;
    o.threads = cfg_.threads;
    o.chunk_size = cfg_.chunk_size;
    o.log_C_offset = cfg_.log_C_offset;
    // spill ratios once they outgrow one chunk
    if (cfg_.N > cfg_.chunk_size) o.ratio_file = (fs::path(cfg_.out) / "ratios.tmp").string();
    return o;
  }

  std::vector<double> lambda_grid() const {
    if (cfg_.lambda_grid == "default") return default_lambda_grid();
    if (cfg_.lambda_grid == "dense") return dense_lambda_grid();
    return parse_double_list(cfg_.lambda_grid);
  }

  // ---- tasks

  // Streams per-index states into chunk files through one writer.
  // Returns the number of files; physical flags are tallied into *physical.
  template <class Produce>
  std::size_t write_chunks(const std::string& prefix, std::uint8_t flags, Produce produce,
                           std::uint64_t* physical = nullptr) {
    std::size_t files = 0;
    std::vector<ProposalDraw> buf;
    for (std::uint64_t begin = 0; begin < cfg_.N; begin += cfg_.chunk_size) {
      const std::uint64_t end = std::min(cfg_.N, begin + cfg_.chunk_size);
      buf.assign(end - begin, ProposalDraw{});
      detail::parallel_for(begin, end, cfg_.threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
        for (std::uint64_t i = lo; i < hi; ++i) buf[i - begin] = produce(i);
      });
      ChunkWriter w(out_.add(chunk_name(prefix, files++)), cfg_.m, flags);
      for (const auto& d : buf) {
        w.append(d.state, d.log_g, d.physical);
        if (physical && d.physical) ++*physical;
      }
      w.close();
    }
    return files;
  }

  void gen_uniform() {
    const std::uint64_t key = derive_key(cfg_.seed, "uniform");
    const int m = cfg_.m;
    const std::size_t files = write_chunks("uniform", 0, [&](std::uint64_t i) {
      RngStream rng(key, i);
      return ProposalDraw{sample_uniform_state(m, rng).matrix(), 0.0, true, true};
    });
    report({{"event", "gen-uniform"}, {"m", m}, {"N", cfg_.N}, {"chunks", files}});
  }

  void gen_proposal() {
    const ProposalSpec spec = proposal();
    const ProposalGenerator gen(spec, cfg_.seed, cfg_.N);
    std::uint64_t physical = 0;
    const std::size_t files = write_chunks(
        "proposal", kChunkHasLogG | kChunkHasPhysical, [&](std::uint64_t i) { return gen.draw(i); }, &physical);
    report({{"event", "gen-proposal"},
            {"m", cfg_.m},
            {"n", spec.n()},
            {"kappa", spec.kappa()},
            {"N", cfg_.N},
            {"uniform_count", gen.uniform_count()},
            {"physical", physical},
            {"chunks", files}});
  }

  void reject() {
    const TargetSpec& tgt = target();
    const ProposalSpec spec = proposal();
    const RejectionResult r = sample_target(spec, tgt, rejection_options(cfg_.seed));
    // at least one file, even for an empty sample
    const std::size_t accepted = r.sample.states.size();
    std::size_t files = 0;
    std::size_t begin = 0;
    do {
      const std::size_t end = std::min<std::size_t>(accepted, begin + cfg_.chunk_size);
      ChunkWriter w(out_.add(chunk_name("target", files++)), cfg_.m, 0);
      for (std::size_t i = begin; i < end; ++i) w.append(r.sample.states[i]);
      w.close();
      begin = end;
    } while (begin < accepted);
    CsvWriter idx(out_.add("target_indices.csv"), {"proposal_index"});
    for (auto i : r.sample.indices) idx.row({std::to_string(i)});
    idx.close();
    CsvWriter csv(out_.add("acceptance.csv"), {"chunk", "begin", "proposed", "physical", "accepted", "p_acc"});
    for (std::size_t k = 0; k < r.report.chunks.size(); ++k) {
      const auto& c = r.report.chunks[k];
      csv.row({std::to_string(k), std::to_string(c.begin), std::to_string(c.proposed), std::to_string(c.physical),
               std::to_string(c.accepted), fmt(static_cast<double>(c.accepted) / static_cast<double>(c.proposed))});
    }
    csv.close();
    report({{"event", "reject"},
            {"proposed", r.report.proposed},
            {"physical", r.report.physical},
            {"accepted", r.report.accepted},
            {"p_acc", r.report.p_acc},
            {"p_acc_se", r.report.standard_error()},
            {"log_C", r.report.log_C},
            {"chunks", files}});
  }

  LambdaValues uniform_lambdas(const TargetSpec& tgt, double log_f_ml, std::uint64_t count) {
    LambdaValues lv;
    lv.lambdas.assign(count, 0.0);
    const std::uint64_t key = derive_key(cfg_.seed, "verify-uniform");
    const int m = cfg_.m;
    detail::parallel_for(0, count, cfg_.threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
      for (std::uint64_t i = lo; i < hi; ++i) {
        RngStream rng(key, i);
        const QuantumState s = sample_uniform_state(m, rng);
        lv.lambdas[i] = std::min(1.0, std::exp(log_target_density_trusted(s.matrix(), tgt) - log_f_ml));
      }
    });
    return lv;
  }

  void verify() {
    const TargetSpec& tgt = target();
    const double log_f_ml = ml_result().log_f_max;
    const ProposalSpec spec = proposal();
    const LambdaValues ufm = uniform_lambdas(tgt, log_f_ml, cfg_.n_ufm);
    const std::vector<double> grid = lambda_grid();
    const std::vector<double> dense = dense_lambda_grid();
    const std::vector<double> s = size_estimate(ufm, grid);
    const std::vector<double> c_ref = credibility_from_size(ufm, grid);
    const std::vector<double> c_ref_dense = credibility_from_size(ufm, dense);
    const double correction = ufm_deviation_estimate(ufm, dense);

    CsvWriter qcsv(out_.add("q_replicas.csv"), {"replica", "seed", "n_tgt", "q", "expected_q", "sd_q", "verdict"});
    for (int rep = 0; rep < cfg_.replicas; ++rep) {
      const std::uint64_t seed = rep == 0 ? cfg_.seed : derive_key(cfg_.seed, "replica-" + std::to_string(rep));
      RejectionOptions o = rejection_options(seed);
      const RejectionResult r = sample_target(spec, tgt, o);
      if (r.sample.states.empty()) fail(ErrorCode::kNumerical, "rejection produced an empty target sample");
      const LambdaValues tl = lambda_values(r.sample.states, tgt, log_f_ml);
      const double n_tgt = static_cast<double>(tl.size());
      const double q = q_statistic(dense, credibility_estimate(tl, dense), c_ref_dense);
      const QExpectation e = expected_q(dense, c_ref_dense, n_tgt, correction);
      const Verdict v = quality_verdict(q, e.mean, e.variance);
      qcsv.row({std::to_string(rep), std::to_string(seed), std::to_string(tl.size()), fmt(q), fmt(e.mean), fmt(e.sd()),
                to_string(v)});
      if (rep == 0) {
        const std::vector<double> c_hat = credibility_estimate(tl, grid);
        CsvWriter csv(out_.add("credibility.csv"), {"lambda", "s", "c_ref", "c_hat", "se"});
        for (std::size_t i = 0; i < grid.size(); ++i)
          csv.row({fmt(grid[i]), fmt(s[i]), fmt(c_ref[i]), fmt(c_hat[i]),
                   fmt(std::sqrt(c_ref[i] * (1.0 - c_ref[i]) / n_tgt))});
        csv.close();
        const json qj = {{"q", q},
                         {"expected_q", e.mean},
                         {"var_q", e.variance},
                         {"integral_c1mc", e.integral_c1mc},
                         {"correction", e.correction},
                         {"n_ufm", cfg_.n_ufm},
                         {"n_tgt", tl.size()},
                         {"p_acc", r.report.p_acc},
                         {"q_grid_points", dense.size()},
                         {"verdict", to_string(v)}};
        std::ofstream qf(out_.add("q.json"), std::ios::binary);
        qf << qj.dump(2) << '\n';
        if (!qf) fail(ErrorCode::kIo, "write to q.json failed");
        json ev = {{"event", "verify"}};
        ev.update(qj);
        report(ev);
      }
    }
    qcsv.close();
  }

  void ml() {
    const MlResult& r = ml_result();
    json j = {{"m", cfg_.m},
              {"log_f_max", r.log_f_max},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"rank", r.rank},
              {"kkt_residual", r.kkt_residual},
              {"diagnostics", r.diagnostics},
              {"layout", r.rho_ml.matrix().to_layout()}};
    std::vector<double> ev(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    j["eigenvalues"] = ev;
    if (cfg_.m == 2) {
      const BlochVector b = to_bloch(r.rho_ml.matrix());
      j["bloch"] = {b.x, b.y, b.z};
      j["bloch_length"] = b.length();
    }
    std::ofstream f(out_.add("ml.json"), std::ios::binary);
    f << j.dump(2) << '\n';
    if (!f) fail(ErrorCode::kIo, "write to ml.json failed");
    ChunkWriter w(out_.add("ml_state.qws"), cfg_.m, 0);
    w.append(r.rho_ml.matrix());
    w.close();
  }

  void scan() {
    const TargetSpec& tgt = target();
    auto or_default = [](auto list, auto v) {
      if (list.empty()) list.push_back(v);
      return list;
    };
    const auto ns = or_default(cfg_.scan_n, cfg_.effective_n());
    const auto ks = or_default(cfg_.scan_kappa, cfg_.kappa);
    const auto x1s = or_default(cfg_.scan_x1, cfg_.x1);
    const auto x2s = or_default(cfg_.scan_x2, cfg_.x2);
    std::vector<ScanPoint> grid;
    for (int n : ns)
      for (double k : ks)
        for (double a : x1s)
          for (double b : x2s) grid.push_back({n, k, a, b});
    const auto rows = acceptance_scan(grid, tgt, ml_result().rho_ml, rejection_options(cfg_.seed));
    CsvWriter csv(out_.add("scan.csv"),
                  {"n", "kappa", "x1", "x2", "proposed", "accepted", "p_acc", "se", "log_C", "best"});
    for (const auto& r : rows)
      csv.row({std::to_string(r.point.n), fmt(r.point.kappa), fmt(r.point.x1), fmt(r.point.x2),
               std::to_string(r.proposed), std::to_string(r.accepted), fmt(r.p_acc), fmt(r.standard_error),
               fmt(r.log_C), r.best ? "1" : "0"});
    csv.close();
    for (const auto& r : rows)
      if (r.best)
        report({{"event", "acceptance-scan"},
                {"points", rows.size()},
                {"best", {{"n", r.point.n}, {"kappa", r.point.kappa}, {"x1", r.point.x1}, {"x2", r.point.x2}}},
                {"p_acc", r.p_acc}});
  }

  void slice() {
    if (cfg_.m != 2) fail(ErrorCode::kConfig, "slice needs proposal.m = 2");
    const TargetSpec& tgt = target();
    const ProposalSpec spec = proposal();
    const std::uint64_t key = derive_key(cfg_.seed, "slice");
    CsvWriter sum(out_.add("slice.csv"), {"direction", "ex", "ey", "ez", "p_e", "log_max_ratio", "t_at_max"});
    CsvWriter cur(out_.add("slice_curves.csv"), {"direction", "t", "f", "cg"});
    const HermitianMatrix center = HermitianMatrix::identity(2) * 0.5;
    double mean_pe = 0.0;
    for (int d = 0; d < cfg_.directions; ++d) {
      RngStream rng(key, static_cast<std::uint64_t>(d));
      BlochVector e{rng.normal(), rng.normal(), rng.normal()};
      const double len = e.length();
      e = {e.x / len, e.y / len, e.z / len};
      const SliceResult r = line_slice_acceptance(e, tgt, spec);
      mean_pe += r.p_e / cfg_.directions;
      sum.row({std::to_string(d), fmt(e.x), fmt(e.y), fmt(e.z), fmt(r.p_e), fmt(r.log_max_ratio), fmt(r.t_at_max)});
      // f normalized on the line, and the envelope C_e g in the same units
      const HermitianMatrix dir = from_bloch(e) - center;
      constexpr int kPoints = 200;
      for (int i = 0; i <= kPoints; ++i) {
        const double t = -1.0 + 2.0 * i / kPoints;
        const HermitianMatrix rho = center + dir * t;
        const double lf = log_target_density(rho, tgt);
        const double lg = log_proposal_density(rho, spec);
        const double f = std::isinf(lf) ? 0.0 : std::exp(lf - r.log_f_ref) / r.integral_f;
        const double cg = std::isinf(lg) ? 0.0 : std::exp(r.log_max_ratio + lg - r.log_f_ref) / r.integral_f;
        cur.row({std::to_string(d), fmt(t), fmt(f), fmt(cg)});
      }
    }
    sum.close();
    cur.close();
    report({{"event", "slice"}, {"directions", cfg_.directions}, {"mean_p_e", mean_pe}});
  }

  void histogram() {
    const std::string& sel = cfg_.selector;
    const bool bloch = sel == "x" || sel == "y" || sel == "z" || sel == "s" || sel == "phi";
    int coord = -1;
    if (!bloch) {
      if (sel.size() < 2 || sel[0] != 'c') fail(ErrorCode::kConfig, "unknown histogram selector '" + sel + "'");
      coord = static_cast<int>(parse_int_list(sel.substr(1)).at(0));
      if (coord < 0 || coord >= cfg_.m * cfg_.m - 1) fail(ErrorCode::kConfig, "coordinate selector out of range");
    }
    if (bloch && cfg_.m != 2) fail(ErrorCode::kConfig, "Bloch selectors need proposal.m = 2");

    // the sample
    std::vector<HermitianMatrix> states;
    std::optional<QubitMarginals> expected;
    const int n = cfg_.effective_n();
    if (cfg_.source == "wishart" || cfg_.source == "uniform") {
      std::optional<WishartParams> wp;
      double theta = 0.0;
      if (cfg_.source == "uniform") {
        wp.emplace(WishartParams::identity(cfg_.m, cfg_.m));
      } else if (cfg_.z_peak != 0.0) {
        if (cfg_.m != 2) fail(ErrorCode::kConfig, "histogram.z_peak needs proposal.m = 2");
        theta = qubit_theta_for_peak(n, cfg_.z_peak);
        const double diag[2] = {std::exp(theta), std::exp(-theta)};
        wp.emplace(n, HermitianMatrix::diagonal(diag));
      } else {
        wp.emplace(WishartParams::identity(cfg_.m, n));
      }
      if (cfg_.m == 2) expected.emplace(wp->n(), theta);
      const std::uint64_t key = derive_key(cfg_.seed, "histogram");
      states.resize(cfg_.N);
      detail::parallel_for(0, cfg_.N, cfg_.threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
        for (std::uint64_t i = lo; i < hi; ++i) {
          RngStream rng(key, i);
          states[i] = sample_wishart_state(*wp, rng).matrix();
        }
      });
    } else if (cfg_.source == "proposal") {
      const ProposalSpec spec = proposal();
      const ProposalGenerator gen(spec, cfg_.seed, cfg_.N);
      states.resize(cfg_.N);
      detail::parallel_for(0, cfg_.N, cfg_.threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
        for (std::uint64_t i = lo; i < hi; ++i) states[i] = gen.draw(i).state;
      });
    } else {
      const TargetSpec& tgt = target();
      states = sample_target(proposal(), tgt, rejection_options(cfg_.seed)).sample.states;
    }

    std::optional<TracelessBasis> basis;
    if (!bloch) basis.emplace(generalized_pauli_basis(cfg_.m));
    auto value = [&](const HermitianMatrix& h) {
      if (!bloch) return to_coordinates(h, *basis).coords(coord);
      const BlochVector b = to_bloch(h);
      if (sel == "x") return b.x;
      if (sel == "y") return b.y;
      if (sel == "z") return b.z;
      if (sel == "s") return std::sqrt(b.x * b.x + b.y * b.y) / std::sqrt(std::max(1e-300, 1.0 - b.z * b.z));
      const double phi = std::atan2(b.y, b.x);
      return phi < 0.0 ? phi + 2.0 * std::numbers::pi : phi;
    };
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(cfg_.bins), 0);
    std::uint64_t outside = 0;
    const double width = (cfg_.hi - cfg_.lo) / cfg_.bins;
    for (const auto& h : states) {
      const double v = value(h);
      const double k = std::floor((v - cfg_.lo) / width);
      if (!(k >= 0.0 && k < cfg_.bins)) {
        ++outside;
        continue;
      }
      ++counts[static_cast<std::size_t>(k)];
    }
    auto probability = [&](double a, double b) -> std::optional<double> {
      if (!expected || !bloch) return std::nullopt;
      if (sel == "z") return expected->z_probability(a, b);
      if (sel == "x" || sel == "y") return expected->x_probability(a, b);
      if (sel == "s") {
        auto cdf = [&](double s) {
          s = std::clamp(s, 0.0, 1.0);
          return 1.0 - std::pow(1.0 - s * s, expected->n() - 1);
        };
        return cdf(b) - cdf(a);
      }
      const double two_pi = 2.0 * std::numbers::pi;
      return std::max(0.0, std::min(b, two_pi) - std::max(a, 0.0)) / two_pi;
    };
    CsvWriter csv(out_.add("histogram.csv"), {"bin_lo", "bin_hi", "observed", "expected"});
    double chi2 = 0.0;
    int dof = 0;
    const double total = static_cast<double>(states.size());
    for (int k = 0; k < cfg_.bins; ++k) {
      const double a = cfg_.lo + k * width;
      const double b = cfg_.lo + (k + 1) * width;
      const auto p = probability(a, b);
      std::string exp_cell;
      if (p) {
        const double e = total * *p;
        exp_cell = fmt(e);
        if (e > 0.0) {
          chi2 += (counts[k] - e) * (counts[k] - e) / e;
          ++dof;
        }
      }
      csv.row({fmt(a), fmt(b), std::to_string(counts[k]), exp_cell});
    }
    csv.close();
    json j = {{"event", "histogram"}, {"selector", sel}, {"source", cfg_.source}, {"samples", states.size()},
              {"outside", outside}};
    if (expected) {
      j["theta"] = expected->theta();
      j["chi2"] = chi2;
      j["bins_with_expectation"] = dof;
    }
    report(j);
  }

  void fwhm() {
    std::vector<double> zs = cfg_.z_grid;
    if (zs.empty())
      for (int i = 1; i <= 19; ++i) zs.push_back(0.05 * i);
    CsvWriter csv(out_.add("fwhm.csv"), {"qubits", "m", "n", "z_peak", "approx", "exact", "relative_error"});
    double lo = 1.0;
    double hi = -1.0;
    for (int q : cfg_.qubits) {
      const int m = 1 << q;
      const int n = m + 16 / m + 1;
      for (double z : zs) {
        const FwhmResult r = fwhm_longitudinal(m, n, z);
        lo = std::min(lo, r.relative_error());
        hi = std::max(hi, r.relative_error());
        csv.row({std::to_string(q), std::to_string(m), std::to_string(n), fmt(z), fmt(r.approx), fmt(r.exact),
                 fmt(r.relative_error())});
      }
    }
    csv.close();
    report({{"event", "fwhm"}, {"min_relative_error", lo}, {"max_relative_error", hi}});
  }

  void shift_fraction() {
    int k = 0;
    while ((1 << k) < cfg_.m) ++k;
    if ((1 << k) != cfg_.m) fail(ErrorCode::kConfig, "shift-fraction needs proposal.m = 2^k");
    std::vector<double> dz = cfg_.dz_grid;
    if (dz.empty())
      for (int i = 0; i <= 20; ++i) dz.push_back(0.05 * i);
    const HermitianMatrix zk = sigma_z_power(k);
    CsvWriter csv(out_.add("shift_fraction.csv"), {"m", "n", "kappa", "dz", "N", "physical", "fraction", "se"});
    std::size_t point = 0;
    for (int off : cfg_.n_offsets) {
      const int n = cfg_.m + off;
      for (double d : dz) {
        const ProposalSpec spec(WishartParams::identity(cfg_.m, n), zk * (0.5 * d), cfg_.kappa, split());
        const ProposalGenerator gen(spec, derive_key(cfg_.seed, "shift-" + std::to_string(point++)), cfg_.N);
        std::vector<std::uint64_t> phys(static_cast<std::size_t>(std::max(cfg_.threads, 1)), 0);
        detail::parallel_for(0, cfg_.N, cfg_.threads, [&](std::uint64_t lo, std::uint64_t hi, int w) {
          for (std::uint64_t i = lo; i < hi; ++i) phys[w] += gen.draw(i).physical ? 1 : 0;
        });
        std::uint64_t total = 0;
        for (auto p : phys) total += p;
        const double f = static_cast<double>(total) / static_cast<double>(cfg_.N);
        csv.row({std::to_string(cfg_.m), std::to_string(n), fmt(cfg_.kappa), fmt(d), std::to_string(cfg_.N),
                 std::to_string(total), fmt(f), fmt(std::sqrt(f * (1.0 - f) / static_cast<double>(cfg_.N)))});
      }
    }
    csv.close();
    report({{"event", "shift-fraction"}, {"points", point}});
  }

  // ---- manifest

  std::string write_manifest(double wall) {
    json outputs = json::array();
    for (const auto& f : out_.files()) {
      if (!fs::exists(f)) continue;
      const std::string body = read_text(f);
      outputs.push_back({{"file", fs::path(f).filename().string()}, {"bytes", body.size()},
                         {"fnv1a64", hex64(fnv1a64(body))}});
    }
    json config = json::object();
    std::string canon;
    for (const auto& [k, v] : cfg_.entries()) {
      config[k] = v;
      canon += k + "=" + v + "\n";
    }
    json m = {{"qwsample_version", "0.1.0"},
              {"task", to_string(cfg_.task)},
              {"seed", cfg_.seed},
              {"config", config},
              {"config_digest", hex64(fnv1a64(canon))},
              {"spec_digests", digests_},
              {"input_digests", inputs_},
              {"outputs", outputs},
              {"wall_time_s", wall},
              {"max_rss_kib", max_rss_kib()}};
    const std::string text = m.dump(2);
    const std::string path = out_.add("manifest.json");
    std::ofstream f(path, std::ios::binary);
    f << text << '\n';
    f.close();
    if (f.fail()) fail(ErrorCode::kIo, "write to " + path + " failed");
    return text;
  }

  const RunConfig& cfg_;
  Outputs out_;
  std::string report_path_;
  std::ofstream report_;
  std::optional<TargetSpec> target_;
  std::optional<MlResult> ml_;
  std::map<std::string, std::string> digests_;
  std::map<std::string, std::string> inputs_;
};

}  // namespace

long max_rss_kib() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

std::string run(const RunConfig& cfg) {
  cfg.validate();
  return Run(cfg).execute();
}

}  // namespace qws
