// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// Benchmark driver behind the cmauth_bench command: parses a JSON spec,
// sweeps its parameter grid and emits one CSV row per metric.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmauth/sim.hpp"
#include "cmauth/table1.hpp"

namespace cmauth {

enum class BenchMode { kTreeBench, kProtocolBench, kSim, kTable1Check };

constexpr std::string_view to_string(BenchMode m) {
  switch (m) {
    case BenchMode::kTreeBench: return "tree-bench";
    case BenchMode::kProtocolBench: return "protocol-bench";
    case BenchMode::kSim: return "sim";
    case BenchMode::kTable1Check: return "table1-check";
  }
  return "?";
}

inline BenchMode bench_mode_from_string(std::string_view s) {
  for (auto m : {BenchMode::kTreeBench, BenchMode::kProtocolBench, BenchMode::kSim,
                 BenchMode::kTable1Check}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown mode '" + std::string(s) + "'");
}

struct BenchGrid {
  std::vector<std::size_t> subscribers;
  std::vector<unsigned> ks;
  std::vector<Scheme> schemes;
  std::vector<TreeKind> tree_kinds;
  std::vector<DistributionKind> distributions;
};

struct BenchSpec {
  BenchMode mode = BenchMode::kTreeBench;
  BenchGrid grid;
  std::uint32_t repetitions = 500;
  std::uint64_t seed = 1;
  std::string output = "bench_out";
  bool wall_clock = false;  // adds timing rows; those are not reproducible
  std::optional<unsigned> k_u;
  CostModel cost_model{};
  SimConfig sim{};
  std::vector<Adversary> adversaries;
  bool write_traces = false;
};

namespace detail {

template <class T, class F>
std::vector<T> list_of(const nlohmann::json& j, const char* key, F convert) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorCode::kConfigInvalid, std::string("grid.") + key + " must be a non-empty list");
  }
  std::vector<T> out;
  for (const auto& v : j) out.push_back(convert(v));
  return out;
}

}  // namespace detail

/// Missing grid lists take mode-specific defaults; in sim mode they fall back
/// to the embedded sim config's own values.
inline BenchSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, "spec must be a JSON object");
  BenchSpec s;
  try {
    if (!j.contains("mode")) throw Error(ErrorCode::kConfigInvalid, "spec.mode is required");
    nlohmann::json grid = nlohmann::json::object();
    for (const auto& [key, v] : j.items()) {
      if (key == "mode") s.mode = bench_mode_from_string(v.get<std::string>());
      else if (key == "grid") grid = v;
      else if (key == "repetitions") s.repetitions = v.get<std::uint32_t>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "output") s.output = v.get<std::string>();
      else if (key == "wall_clock") s.wall_clock = v.get<bool>();
      else if (key == "k_u") s.k_u = v.get<unsigned>();
      else if (key == "cost_model") {
        s.cost_model.hash = v.value("hash", s.cost_model.hash);
        s.cost_model.hmac = v.value("hmac", s.cost_model.hmac);
        s.cost_model.derive_key = v.value("derive_key", s.cost_model.derive_key);
      } else if (key == "sim") {
        s.sim = config_from_json(v);
      } else if (key == "adversaries") {
        for (const auto& a : v) s.adversaries.push_back(adversary_from_string(a.get<std::string>()));
      } else if (key == "write_traces") {
        s.write_traces = v.get<bool>();
      } else {
        throw Error(ErrorCode::kConfigInvalid, "unknown spec key '" + key + "'");
      }
    }
    if (!j.contains("sim") || !j["sim"].contains("seed")) s.sim.seed = s.seed;
    if (s.repetitions < 1) throw Error(ErrorCode::kConfigInvalid, "repetitions must be >= 1");
    if (!grid.is_object()) throw Error(ErrorCode::kConfigInvalid, "grid must be an object");

    const bool sim = s.mode == BenchMode::kSim;
    auto& g = s.grid;
    g.subscribers = grid.contains("N")
                        ? detail::list_of<std::size_t>(grid["N"], "N", [](const auto& v) { return v.template get<std::size_t>(); })
                        : sim ? std::vector<std::size_t>{s.sim.subscribers}
                        : s.mode == BenchMode::kTable1Check ? std::vector<std::size_t>{1, 2, 10, 50}
                                                            : std::vector<std::size_t>{1};
    g.ks = grid.contains("k")
               ? detail::list_of<unsigned>(grid["k"], "k", [](const auto& v) { return v.template get<unsigned>(); })
               : sim ? std::vector<unsigned>{s.sim.k}
               : s.mode == BenchMode::kTable1Check ? std::vector<unsigned>{0, 1, 2, 3, 4, 5}
                                                   : std::vector<unsigned>{1, 2, 3, 4, 5};
    g.schemes = grid.contains("scheme")
                    ? detail::list_of<Scheme>(grid["scheme"], "scheme", [](const auto& v) {
                        return scheme_from_string(v.template get<std::string>());
                      })
                    : sim ? std::vector<Scheme>{s.sim.scheme}
                          : std::vector<Scheme>{Scheme::kCma, Scheme::kCmma};
    g.tree_kinds = grid.contains("tree_kind")
                       ? detail::list_of<TreeKind>(grid["tree_kind"], "tree_kind", [](const auto& v) {
                           return tree_kind_from_string(v.template get<std::string>());
                         })
                       : sim ? std::vector<TreeKind>{s.sim.tree_kind}
                             : std::vector<TreeKind>{TreeKind::kMht, TreeKind::kHht};
    g.distributions =
        grid.contains("distribution")
            ? detail::list_of<DistributionKind>(grid["distribution"], "distribution",
                                                [](const auto& v) {
                                                  return distribution_from_string(
                                                      v.template get<std::string>());
                                                })
            : sim ? std::vector<DistributionKind>{s.sim.distribution}
                  : std::vector<DistributionKind>{DistributionKind::kGeometric};
    for (auto k : g.ks) {
      if (k > kMaxEnumerableK) {
        throw Error(ErrorCode::kKTooLarge, "grid k=" + std::to_string(k) + " exceeds " +
                                               std::to_string(kMaxEnumerableK));
      }
    }
    for (const auto& [key, v] : grid.items()) {
      if (key != "N" && key != "k" && key != "scheme" && key != "tree_kind" && key != "distribution") {
        throw Error(ErrorCode::kConfigInvalid, "unknown grid key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("spec: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader =
    "scheme,tree_kind,N,k,distribution,metric,mean,stddev,units";

struct CsvRow {
  std::string scheme;
  std::string tree_kind;
  std::size_t n = 0;  // 0 where the metric does not depend on subscribers
  unsigned k = 0;
  std::string distribution;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  std::string units;
};

inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::kConfigInvalid, "non-finite metric value");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.scheme << ',' << r.tree_kind << ',' << r.n << ',' << r.k << ',' << r.distribution
       << ',' << r.metric << ',' << format_number(r.mean) << ',' << format_number(r.stddev) << ','
       << r.units << '\n';
  }
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and sample standard deviation (0 for a single sample).
template <class Range>
Stats stats_of(const Range& xs) {
  Stats s;
  std::size_t n = 0;
  for (auto x : xs) {
    s.mean += static_cast<double>(x);
    ++n;
  }
  if (n == 0) return s;
  s.mean /= static_cast<double>(n);
  if (n > 1) {
    double acc = 0.0;
    for (auto x : xs) acc += (static_cast<double>(x) - s.mean) * (static_cast<double>(x) - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(n - 1));
  }
  return s;
}

struct BenchResult {
  std::vector<CsvRow> rows;
  bool ok = true;
  std::string summary;
  std::vector<nlohmann::json> sim_reports;
  std::vector<EventTrace> traces;
};

namespace detail {

inline Design design_of(Scheme s, TreeKind t) {
  switch (s) {
    case Scheme::kCma: return t == TreeKind::kMht ? Design::kCmaMht : Design::kCmaHht;
    case Scheme::kCmma: return t == TreeKind::kMht ? Design::kCmmaMht : Design::kCmmaHht;
    case Scheme::kNoPrecompute: return Design::kNoPrecompute;
    case Scheme::kPredictOne: return Design::kPredictOne;
    case Scheme::kPrecomputeAll: return Design::kPrecomputeAll;
    case Scheme::kStateChange: return Design::kStateChange;
  }
  return Design::kNoPrecompute;
}

inline std::pair<std::string, std::string> scheme_columns(Design d) {
  switch (d) {
    case Design::kCmaMht: return {"CMA", "MHT"};
    case Design::kCmaHht: return {"CMA", "HHT"};
    case Design::kCmmaMht: return {"CMMA", "MHT"};
    case Design::kCmmaHht: return {"CMMA", "HHT"};
    default: return {std::string(to_string(d)), "NONE"};
  }
}

}  // namespace detail

/// Build cost, proof replay cost and expected depth per (k, tree kind,
/// distribution), over `repetitions` independently drawn trees and messages.
inline BenchResult cmd_tree_bench(const BenchSpec& spec) {
  BenchResult res;
  NonceSource rng(spec.seed);
  std::mt19937_64 gen(spec.seed);
  for (auto k : spec.grid.ks) {
    for (auto kind : spec.grid.tree_kinds) {
      for (auto dist : spec.grid.distributions) {
        std::vector<std::uint64_t> build, verify, values;
        std::vector<double> depth, micros;
        for (std::uint32_t r = 0; r < spec.repetitions; ++r) {
          auto tpl = sample_template(k);
          auto set = prioritize(tpl, {dist, k, spec.seed + r}, 1);
          OpCounter ctr(spec.cost_model);
          const auto t0 = std::chrono::steady_clock::now();
          auto tree = build_tree(kind, set, rng, ctr);
          const auto t1 = std::chrono::steady_clock::now();
          build.push_back(ctr.hash_ops());
          micros.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
          depth.push_back(expected_depth(tree, set.weights));
          const auto pick = detail::sample_from(set.weights, gen);
          OpCounter v(spec.cost_model);
          auto proof = prove(tree, pick, v);
          root_from_proof(set.messages[pick], proof, v);
          verify.push_back(v.hash_ops());
          values.push_back(proof.transmitted_values());
        }
        auto row = [&](const char* metric, Stats s, const char* units) {
          res.rows.push_back({"TREE", std::string(to_string(kind)), 0, k,
                              std::string(to_string(dist)), metric, s.mean, s.stddev, units});
        };
        row("build_ops", stats_of(build), "hash_ops");
        row("verify_ops", stats_of(verify), "hash_ops");
        row("expected_depth", stats_of(depth), "levels");
        row("proof_values", stats_of(values), "values32");
        if (spec.wall_clock) row("build_time", stats_of(micros), "us");
      }
    }
  }
  return res;
}

/// Per-interval costs of each scheme when the true message is drawn from the
/// distribution, over `repetitions` intervals.
inline BenchResult cmd_protocol_bench(const BenchSpec& spec) {
  BenchResult res;
  NonceSource rng(spec.seed);
  std::mt19937_64 gen(spec.seed);
  for (auto scheme : spec.grid.schemes) {
    std::vector<TreeKind> kinds = spec.grid.tree_kinds;
    if (!is_tree_scheme(scheme)) kinds = {TreeKind::kMht};
    for (auto kind : kinds) {
      const auto design = detail::design_of(scheme, kind);
      const auto [scheme_col, kind_col] = detail::scheme_columns(design);
      for (auto n : spec.grid.subscribers) {
        for (auto k : spec.grid.ks) {
          for (auto dist : spec.grid.distributions) {
            const auto weights = make_weights({dist, k, 7});
            std::vector<std::uint64_t> picks(spec.repetitions);
            for (auto& p : picks) p = detail::sample_from(weights, gen);
            MeasureOptions opt{n, k, spec.k_u.value_or(default_k_u(k)), dist, spec.cost_model};
            const auto t0 = std::chrono::steady_clock::now();
            auto measured = measure_design(design, opt, picks, rng);
            const auto t1 = std::chrono::steady_clock::now();
            std::vector<std::uint64_t> pre, post, sub, comm, total;
            for (const auto& m : measured) {
              pre.push_back(m.costs.publisher_pre);
              post.push_back(m.costs.publisher_post);
              sub.push_back(m.costs.subscriber);
              comm.push_back(m.costs.communication);
              total.push_back(m.costs.publisher_pre + m.costs.publisher_post);
              if (!m.subscribers_agree) res.ok = false;
            }
            auto row = [&](const char* metric, Stats s, const char* units) {
              res.rows.push_back({scheme_col, kind_col, n, k, std::string(to_string(dist)), metric,
                                  s.mean, s.stddev, units});
            };
            row("publisher_precompute_ops", stats_of(pre), "hash_ops");
            row("post_message_ops", stats_of(post), "hash_ops");
            row("publisher_total_ops", stats_of(total), "hash_ops");
            row("subscriber_verify_ops", stats_of(sub), "hash_ops");
            row("communication_values", stats_of(comm), "values32");
            if (spec.wall_clock) {
              const double per = std::chrono::duration<double, std::micro>(t1 - t0).count() /
                                 static_cast<double>(spec.repetitions);
              row("interval_time", {per, 0.0}, "us");
            }
          }
        }
      }
    }
  }
  return res;
}

/// Runs the embedded sim config once per grid point (and once per requested
/// adversary strategy). Fails on invariant violations, false rejections or
/// adversarial acceptances.
inline BenchResult cmd_sim(const BenchSpec& spec) {
  BenchResult res;
  for (auto scheme : spec.grid.schemes) {
    std::vector<TreeKind> kinds = spec.grid.tree_kinds;
    if (!is_tree_scheme(scheme)) kinds = {TreeKind::kMht};
    for (auto kind : kinds) {
      for (auto n : spec.grid.subscribers) {
        for (auto k : spec.grid.ks) {
          for (auto dist : spec.grid.distributions) {
            SimConfig cfg = spec.sim;
            cfg.scheme = scheme;
            cfg.tree_kind = kind;
            cfg.subscribers = n;
            cfg.k = k;
            cfg.distribution = dist;
            cfg.record_trace = spec.write_traces;
            auto [report, trace] = run_sim(cfg);
            const auto [scheme_col, kind_col] =
                detail::scheme_columns(detail::design_of(scheme, kind));
            auto row = [&](const std::string& metric, Stats s, const char* units) {
              res.rows.push_back({scheme_col, kind_col, n, k, std::string(to_string(dist)), metric,
                                  s.mean, s.stddev, units});
            };
            std::vector<std::uint64_t> verify, latency;
            for (const auto& d : report.deliveries) {
              verify.push_back(d.verify_ops);
              latency.push_back(static_cast<std::uint64_t>(d.latency_us));
            }
            row("verify_ops", stats_of(verify), "hash_ops");
            row("post_message_ops", stats_of(report.post_message_ops), "hash_ops");
            row("publisher_ops_per_interval",
                {static_cast<double>(report.publisher_total_ops()) / cfg.horizon, 0.0}, "hash_ops");
            row("communication_values", stats_of(report.communication_values), "values32");
            row("latency", stats_of(latency), "us");
            row("hit_rate", {report.hit_rate(), 0.0}, "ratio");
            row("false_rejects", {static_cast<double>(report.false_rejects), 0.0}, "count");
            row("invariant_violations", {static_cast<double>(report.invariant_violations), 0.0},
                "count");
            if (report.false_rejects != 0 || report.invariant_violations != 0) res.ok = false;
            auto j = report_to_json(report);
            if (is_tree_scheme(scheme)) {
              for (auto a : spec.adversaries) {
                auto adv = inject_adversary(cfg, a);
                j["adversaries"][std::string(to_string(a))] = {
                    {"attempts", adv.adversarial_attempts},
                    {"acceptances", adv.adversarial_acceptances}};
                row("adversary_" + std::string(to_string(a)) + "_acceptances",
                    {static_cast<double>(adv.adversarial_acceptances), 0.0}, "count");
                if (adv.adversarial_acceptances != 0 || adv.invariant_violations != 0) res.ok = false;
              }
            }
            res.sim_reports.push_back(std::move(j));
            if (spec.write_traces) res.traces.push_back(std::move(trace));
          }
        }
      }
    }
  }
  return res;
}

/// Measured counters against the closed forms for every design over the
/// N x k grid. Any mismatch fails the run.
inline BenchResult cmd_table1_check(const BenchSpec& spec) {
  BenchResult res;
  Table1Grid grid;
  grid.subscribers = spec.grid.subscribers;
  grid.ks = spec.grid.ks;
  grid.seed = spec.seed;
  grid.cost_model = spec.cost_model;
  auto report = table1_check(grid);
  res.ok = report.pass();
  std::ostringstream os;
  os << "table1-check: " << report.grid_points << " grid points, " << report.checks
     << " checks, " << report.mismatches.size() << " mismatches\n";
  for (const auto& m : report.mismatches) {
    os << "  MISMATCH " << to_string(m.design) << " N=" << m.subscribers << " k=" << m.k
       << " interval=" << m.interval << " " << m.metric << ": expected " << m.expected
       << ", measured " << m.measured << " (delta " << (m.measured - m.expected) << ")\n";
  }
  res.summary = os.str();
  for (auto d : kAllDesigns) {
    const auto [scheme_col, kind_col] = detail::scheme_columns(d);
    for (auto n : grid.subscribers) {
      for (auto k : grid.ks) {
        std::size_t bad = 0;
        for (const auto& m : report.mismatches) {
          if (m.design == d && m.subscribers == n && m.k == k) ++bad;
        }
        res.rows.push_back({scheme_col, kind_col, n, k, "GEOMETRIC", "mismatches",
                            static_cast<double>(bad), 0.0, "count"});
      }
    }
  }
  return res;
}

inline BenchResult run_bench(const BenchSpec& spec) {
  switch (spec.mode) {
    case BenchMode::kTreeBench: return cmd_tree_bench(spec);
    case BenchMode::kProtocolBench: return cmd_protocol_bench(spec);
    case BenchMode::kSim: return cmd_sim(spec);
    case BenchMode::kTable1Check: return cmd_table1_check(spec);
  }
  return {};
}

inline std::string csv_file_name(BenchMode m) {
  switch (m) {
    case BenchMode::kTreeBench: return "tree_bench.csv";
    case BenchMode::kProtocolBench: return "protocol_bench.csv";
    case BenchMode::kSim: return "sim_summary.csv";
    case BenchMode::kTable1Check: return "table1_check.csv";
  }
  return "out.csv";
}

/// Writes the CSV (and, in sim mode, the JSON reports and optional traces)
/// under `dir`.
inline std::vector<std::filesystem::path> write_outputs(const BenchSpec& spec,
                                                        const BenchResult& res,
                                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + p.string());
    written.push_back(p);
    return f;
  };
  {
    auto f = open(dir / csv_file_name(spec.mode));
    write_csv(f, res.rows);
    if (!f) throw Error(ErrorCode::kIo, "write failed: " + written.back().string());
  }
  if (spec.mode == BenchMode::kSim) {
    auto f = open(dir / "sim_reports.json");
    f << nlohmann::json(res.sim_reports).dump(2) << '\n';
    for (std::size_t i = 0; i < res.traces.size(); ++i) {
      auto t = open(dir / ("trace_" + std::to_string(i) + ".jsonl"));
      write_trace_jsonl(t, res.traces[i]);
    }
  }
  return written;
}

}  // namespace cmauth
