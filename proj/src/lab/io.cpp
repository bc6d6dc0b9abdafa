#include "liqlab/lab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace liqlab::lab {

using analysis::BookSide;
using analysis::OrderType;
using analysis::StreamEvent;

namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

double to_double(const CsvTable& t, std::size_t row, int col) {
  const auto& s = t.rows[row][static_cast<std::size_t>(col)];
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    fail_at(t.path, t.lines[row], "column '" + t.header[static_cast<std::size_t>(col)] + "': '" + s + "' is not a number");
  }
  return v;
}

std::uint64_t to_u64(const CsvTable& t, std::size_t row, int col) {
  const auto& s = t.rows[row][static_cast<std::size_t>(col)];
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail_at(t.path, t.lines[row], "column '" + t.header[static_cast<std::size_t>(col)] + "': '" + s + "' is not an integer");
  }
  return v;
}

int require_column(const CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  if (c < 0) fail_at(t.path, 1, "missing required column '" + name + "'");
  return c;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  CsvTable t;
  t.path = path;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto fields = split(line);
    if (fields.size() != t.header.size()) {
      fail_at(path, n, "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(n);
  }
  if (t.header.empty()) fail_at(path, 1, "missing header");
  return t;
}

std::vector<StreamEvent> read_event_stream(const std::string& path) {
  const auto t = read_csv(path);
  const int c_time = require_column(t, "time");
  const int c_type = require_column(t, "type");
  const int c_side = require_column(t, "side");
  const int c_price = require_column(t, "price_ticks");
  const int c_mid = require_column(t, "mid_change_ticks");
  const int c_queue = t.column("queue_after");
  const int c_hs = t.column("hawkes_sum");
  const int c_hd = t.column("hawkes_diff");
  if ((c_hs < 0) != (c_hd < 0)) fail_at(path, 1, "hawkes_sum and hawkes_diff must be given together");
  if (t.rows.empty()) fail_at(path, 2, "empty stream (no events after the header)");
  std::vector<StreamEvent> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    StreamEvent e;
    e.time = to_double(t, i, c_time);
    if (!std::isfinite(e.time)) fail_at(path, t.lines[i], "non-finite time");
    if (i > 0 && e.time < out.back().time) fail_at(path, t.lines[i], "time goes backwards");
    const auto& ty = r[static_cast<std::size_t>(c_type)];
    if (ty == "LO") {
      e.type = OrderType::limit;
    } else if (ty == "C") {
      e.type = OrderType::cancel;
    } else if (ty == "MO") {
      e.type = OrderType::market;
    } else {
      fail_at(path, t.lines[i], "type must be LO, C or MO, got '" + ty + "'");
    }
    const auto& sd = r[static_cast<std::size_t>(c_side)];
    if (sd == "B") {
      e.side = BookSide::bid;
    } else if (sd == "A") {
      e.side = BookSide::ask;
    } else {
      fail_at(path, t.lines[i], "side must be B or A, got '" + sd + "'");
    }
    const auto& ps = r[static_cast<std::size_t>(c_price)];
    long long price = 0;
    const auto [pp, pec] = std::from_chars(ps.data(), ps.data() + ps.size(), price);
    if (pec != std::errc() || pp != ps.data() + ps.size()) fail_at(path, t.lines[i], "price_ticks must be an integer");
    e.price_ticks = price;
    e.mid_change = r[static_cast<std::size_t>(c_mid)].empty() ? 0.0 : to_double(t, i, c_mid);
    if (c_queue >= 0 && !r[static_cast<std::size_t>(c_queue)].empty()) {
      e.queue_after = static_cast<long long>(to_u64(t, i, c_queue));
    }
    if (c_hs >= 0) {
      e.hawkes_sum = to_double(t, i, c_hs);
      e.hawkes_diff = to_double(t, i, c_hd);
    }
    out.push_back(e);
  }
  return out;
}

void write_event_stream(const std::string& path, std::span<const StreamEvent> events) {
  bool hawkes = !events.empty() && events.front().hawkes_sum.has_value();
  std::ostringstream os;
  os << "time,type,side,price_ticks,mid_change_ticks,queue_after";
  if (hawkes) os << ",hawkes_sum,hawkes_diff";
  os << '\n';
  for (const auto& e : events) {
    os << format_double(e.time) << ','
       << (e.type == OrderType::limit ? "LO" : e.type == OrderType::cancel ? "C" : "MO") << ','
       << (e.side == BookSide::bid ? 'B' : 'A') << ',' << e.price_ticks << ',' << format_double(e.mid_change) << ',';
    if (e.queue_after) os << *e.queue_after;
    if (hawkes) os << ',' << format_double(e.hawkes_sum.value_or(0.0)) << ',' << format_double(e.hawkes_diff.value_or(0.0));
    os << '\n';
  }
  write_text(path, os.str());
}

void write_results(const std::string& path, Model model, std::span<const ResultRow> rows) {
  const auto& names = model_parameters(model);
  std::ostringstream os;
  os << "model";
  for (const auto& [n, _] : names) os << ',' << n;
  os << ",seed,stream_id,tau_c,max_spread,n_events,realized_var,aborted\n";
  const std::string m = to_string(model);
  for (const auto& r : rows) {
    os << m;
    for (double v : r.params) os << ',' << format_double(v);
    os << ',' << r.seed << ',' << r.stream_id << ',';
    if (r.tau_c) os << format_double(*r.tau_c);
    os << ',' << r.max_spread << ',' << r.n_events << ',' << format_double(r.realized_var) << ','
       << (r.aborted ? "true" : "false") << '\n';
  }
  write_text(path, os.str());
}

ResultFile read_results(const std::string& path) {
  const auto t = read_csv(path);
  const int c_model = require_column(t, "model");
  ResultFile f;
  if (t.rows.empty()) fail_at(path, 2, "no result rows");
  try {
    f.model = model_from_string(t.rows[0][static_cast<std::size_t>(c_model)]);
  } catch (const std::invalid_argument& e) {
    fail_at(path, t.lines[0], e.what());
  }
  std::vector<int> pcols;
  for (const auto& [n, _] : model_parameters(f.model)) pcols.push_back(require_column(t, n));
  const int c_seed = require_column(t, "seed"), c_stream = require_column(t, "stream_id");
  const int c_tau = require_column(t, "tau_c"), c_max = require_column(t, "max_spread");
  const int c_n = require_column(t, "n_events"), c_rv = require_column(t, "realized_var");
  const int c_ab = require_column(t, "aborted");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r[static_cast<std::size_t>(c_model)] != to_string(f.model)) fail_at(path, t.lines[i], "mixed models in one file");
    ResultRow row;
    for (int c : pcols) row.params.push_back(to_double(t, i, c));
    row.seed = to_u64(t, i, c_seed);
    row.stream_id = to_u64(t, i, c_stream);
    if (!r[static_cast<std::size_t>(c_tau)].empty()) row.tau_c = to_double(t, i, c_tau);
    row.max_spread = static_cast<int>(to_double(t, i, c_max));
    row.n_events = to_u64(t, i, c_n);
    row.realized_var = to_double(t, i, c_rv);
    const auto& ab = r[static_cast<std::size_t>(c_ab)];
    if (ab != "true" && ab != "false") fail_at(path, t.lines[i], "aborted must be true or false");
    row.aborted = ab == "true";
    f.rows.push_back(std::move(row));
  }
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace liqlab::lab
