#pragma once

// Replica runner, per-cell aggregation and run outputs (results.csv,
// aggregate.json, manifest.json) shared by every experiment.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "heavytail/common.hpp"
#include "heavytail/stats.hpp"

namespace heavytail::harness {

inline constexpr const char* kCodeVersion = "heavytail-lab 1.0.0";
inline constexpr const char* kOutputDirEnv = "HEAVYTAIL_OUTPUT_DIR";

using json = nlohmann::json;

/// Named per-replica measurements, in column order.
using Values = std::vector<std::pair<std::string, double>>;

struct Cell {
  std::string label;
  json params;
};

struct Row {
  std::size_t cell = 0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  Values values;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Cell> cells;
  std::vector<Row> rows;
  json summary = json::object();  // experiment-level statistics
};

/// Stream index of (cell, replica): the cell in the high 32 bits.
inline std::uint64_t replica_stream(std::size_t cell, std::size_t replica) {
  return (std::uint64_t(cell) << 32) | std::uint64_t(replica);
}

inline std::uint64_t replica_seed(std::uint64_t master, std::size_t cell, std::size_t replica) {
  return derive_seed(master, replica_stream(cell, replica));
}

inline std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(cell, replica, rng) for cells first_cell .. first_cell+cells-1 on a
/// bounded pool. Each call gets its own engine seeded by replica_seed, so
/// results do not depend on the worker count or scheduling. Results come back
/// in (cell, replica) order; the first exception thrown by any replica is
/// rethrown.
template <class Fn>
auto run_replicas(std::size_t first_cell, std::size_t cells, std::size_t replicas, std::uint64_t master,
                  std::size_t workers, Fn&& fn) {
  using R = std::invoke_result_t<Fn&, std::size_t, std::size_t, Rng&>;
  const std::size_t total = cells * replicas;
  std::vector<std::optional<R>> slots(total);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total || failed.load()) return;
      const std::size_t c = first_cell + i / replicas, r = i % replicas;
      Rng rng(replica_seed(master, c, r));
      try {
        slots[i].emplace(fn(c, r, rng));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, total));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(total);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Appends rows for values produced by run_replicas starting at first_cell.
inline void append_rows(std::vector<Row>& rows, std::size_t first_cell, std::size_t replicas, std::uint64_t master,
                        std::vector<Values> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = first_cell + i / replicas, r = i % replicas;
    rows.push_back({c, r, replica_seed(master, c, r), std::move(values[i])});
  }
}

// ---- aggregation -------------------------------------------------------------

/// Column of `key` over the rows of one cell, in replica order.
inline std::vector<double> column(const ExperimentResult& res, std::size_t cell, const std::string& key) {
  std::vector<double> out;
  for (const auto& row : res.rows) {
    if (row.cell != cell) continue;
    for (const auto& [k, v] : row.values)
      if (k == key) out.push_back(v);
  }
  return out;
}

struct MetricSummary {
  std::size_t count = 0;
  double mean = 0.0, stderr_ = 0.0, median = 0.0;
  stats::Interval ci95;
};

inline MetricSummary summarize(const std::vector<double>& v, Rng& rng, std::size_t resamples = 1000) {
  require(!v.empty(), "summarize: no values");
  MetricSummary s;
  s.count = v.size();
  s.mean = stats::mean(v);
  s.stderr_ = stats::stderr_of_mean(v);
  s.median = stats::median(v);
  if (v.size() >= 2) s.ci95 = stats::bootstrap_ci(v, stats::mean, resamples, 0.95, rng);
  else s.ci95 = {s.mean, s.mean};
  return s;
}

/// Per-cell mean, stderr, bootstrap 95% interval and median of every column,
/// followed by the experiment summary. Bootstrap draws use a stream of the
/// master seed, so the document is reproducible.
inline json aggregate(const ExperimentResult& res, std::uint64_t master) {
  json cells = json::array();
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    std::vector<std::string> keys;
    std::size_t replicas = 0;
    for (const auto& row : res.rows) {
      if (row.cell != c) continue;
      ++replicas;
      for (const auto& kv : row.values)
        if (std::find(keys.begin(), keys.end(), kv.first) == keys.end()) keys.push_back(kv.first);
    }
    Rng rng = make_rng(master, replica_stream(c, 0xFFFFFFFFu));
    json metrics = json::object();
    for (const auto& k : keys) {
      const auto s = summarize(column(res, c, k), rng);
      metrics[k] = {{"mean", s.mean}, {"stderr", s.stderr_}, {"ci95", {s.ci95.lo, s.ci95.hi}}, {"median", s.median}};
    }
    cells.push_back({{"label", res.cells[c].label},
                     {"params", res.cells[c].params},
                     {"replicas", replicas},
                     {"metrics", metrics}});
  }
  return {{"experiment", res.experiment}, {"cells", cells}, {"summary", res.summary}};
}

// ---- output files -------------------------------------------------------------

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// experiment,cell,label,replica,seed followed by the union of value columns
/// in first-seen order; missing values are left empty.
inline void write_results_csv(std::ostream& out, const ExperimentResult& res) {
  std::vector<std::string> keys;
  for (const auto& row : res.rows)
    for (const auto& kv : row.values)
      if (std::find(keys.begin(), keys.end(), kv.first) == keys.end()) keys.push_back(kv.first);
  out << "experiment,cell,label,replica,seed";
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  for (const auto& row : res.rows) {
    out << res.experiment << ',' << row.cell << ',' << res.cells.at(row.cell).label << ',' << row.replica << ','
        << row.seed;
    for (const auto& k : keys) {
      out << ',';
      for (const auto& [name, v] : row.values)
        if (name == k) {
          out << format_double(v);
          break;
        }
    }
    out << '\n';
  }
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256: digest computation failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << data;
}

struct RunOutputs {
  std::string results_csv;
  std::string aggregate_json;
};

inline RunOutputs render(const ExperimentResult& res, std::uint64_t master) {
  std::ostringstream csv;
  write_results_csv(csv, res);
  return {csv.str(), aggregate(res, master).dump(2) + "\n"};
}

}  // namespace heavytail::harness
