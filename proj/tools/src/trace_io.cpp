#include "panelmi_cli/trace_io.hpp"

#include <algorithm>
#include <cmath>

#include "panelmi/csv.hpp"
#include "panelmi/error.hpp"

namespace panelmi::cli {

namespace {

ChainTrace trace_from(const csv::Table& t) {
  const char* names[] = {"chain", "iteration", "variable", "mean", "sd"};
  std::size_t cols[5];
  for (int c = 0; c < 5; ++c) {
    auto idx = t.column(names[c]);
    if (!idx) throw ParseError("trace file lacks a column", 1, names[c]);
    cols[c] = *idx;
  }
  struct Row {
    int chain, iteration;
    std::string variable;
    double mean, sd;
  };
  std::vector<Row> rows;
  std::vector<std::string> vars;
  int chains = 0, iterations = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    auto num = [&](int c) {
      auto v = csv::parse_real(f.at(cols[c]));
      if (!v) throw ParseError("not a number", r + 2, names[c]);
      return *v;
    };
    if (f.size() != t.header.size()) throw ParseError("wrong field count", r + 2, "");
    Row row{static_cast<int>(num(0)), static_cast<int>(num(1)), f[cols[2]], 0.0, 0.0};
    // Empty mean/sd cells stand for steps that produced no statistics.
    row.mean = f[cols[3]].empty() ? std::nan("") : num(3);
    row.sd = f[cols[4]].empty() ? std::nan("") : num(4);
    if (row.chain < 1 || row.iteration < 1) throw ParseError("chain and iteration are 1-based", r + 2, "");
    chains = std::max(chains, row.chain);
    iterations = std::max(iterations, row.iteration);
    if (std::find(vars.begin(), vars.end(), row.variable) == vars.end()) vars.push_back(row.variable);
    rows.push_back(std::move(row));
  }
  ChainTrace trace(vars, chains, iterations);
  for (const auto& r : rows) {
    const auto v = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), r.variable) - vars.begin());
    trace.set(r.chain - 1, r.iteration - 1, v, r.mean, r.sd);
  }
  return trace;
}

}  // namespace

ChainTrace parse_trace_csv(std::string_view text) { return trace_from(csv::parse(text)); }
ChainTrace read_trace_csv(const std::filesystem::path& path) { return trace_from(csv::read_file(path)); }

}  // namespace panelmi::cli
