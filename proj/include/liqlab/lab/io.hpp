#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liqlab/analysis/flux.hpp"
#include "liqlab/lab/config.hpp"

namespace liqlab::lab {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
  /// Column index, or -1.
  int column(const std::string& name) const;
};

/// Header-first comma-separated file (no quoting). Throws std::runtime_error
/// "path:line: ..." on ragged rows.
CsvTable read_csv(const std::string& path);

/// Event-stream CSV: time,type,side,price_ticks,mid_change_ticks[,queue_after]
/// with optional hawkes_sum,hawkes_diff columns. type in {LO,C,MO}, side in {B,A}.
std::vector<analysis::StreamEvent> read_event_stream(const std::string& path);
void write_event_stream(const std::string& path, std::span<const analysis::StreamEvent> events);

struct ResultRow {
  std::size_t cell = 0;
  int replica = 0;
  std::vector<double> params;  // aligned with model_parameters(model)
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::optional<double> tau_c;
  int max_spread = 0;
  std::uint64_t n_events = 0;
  double realized_var = 0.0;
  bool aborted = false;
};

/// model, parameters..., seed, stream_id, tau_c, max_spread, n_events, realized_var, aborted
void write_results(const std::string& path, Model model, std::span<const ResultRow> rows);

struct ResultFile {
  Model model = Model::santafe;
  std::vector<ResultRow> rows;  // cell and replica are not stored; rows keep file order
};

ResultFile read_results(const std::string& path);

void write_text(const std::string& path, const std::string& text);

}  // namespace liqlab::lab
