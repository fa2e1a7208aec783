#include "schwarznet/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace schwarznet::io {

using nlohmann::json;

namespace {

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw input_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void save_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error("bad number '" + s + "' in " + where);
  }
}

}  // namespace

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Graph read_graph(const fs::path& path) {
  json j = load_json(path);
  if (!j.contains("n") || !j.contains("edges"))
    throw input_error(path.string() + ": graph file needs \"n\" and \"edges\"");
  std::vector<std::array<Index, 2>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2)
      throw input_error(path.string() + ": each edge must be [i, j]");
    edges.push_back({e[0].get<Index>(), e[1].get<Index>()});
  }
  return Graph(j["n"].get<Index>(), edges);
}

void write_graph(const fs::path& path, const Graph& g) {
  json j;
  j["n"] = g.n_vertices();
  j["edges"] = json::array();
  for (auto [i, k] : g.edges()) j["edges"].push_back({i, k});
  save_text(path, j.dump());
}

Partition read_partition(const fs::path& path) {
  json j = load_json(path);
  if (!j.contains("k") || !j.contains("assignment"))
    throw input_error(path.string() + ": partition file needs \"k\" and \"assignment\"");
  Partition p;
  p.k_blocks = j["k"].get<Index>();
  p.assignment = j["assignment"].get<std::vector<Index>>();
  return p;
}

void write_partition(const fs::path& path, const Partition& p) {
  json j;
  j["k"] = p.k_blocks;
  j["assignment"] = p.assignment;
  save_text(path, j.dump());
}

StructuredMatrix read_matrix_market(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw input_error(path.string() + ": missing MatrixMarket header");
  const bool symmetric = line.find("symmetric") != std::string::npos;
  if (line.find("coordinate") == std::string::npos ||
      line.find("real") == std::string::npos)
    throw input_error(path.string() + ": only coordinate real matrices supported");
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream head(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(head >> rows >> cols >> nnz) || rows != cols)
    throw input_error(path.string() + ": bad size line (square matrix required)");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz) * (symmetric ? 2 : 1));
  for (long e = 0; e < nnz; ++e) {
    long i = 0, j = 0;
    double v = 0;
    if (!(in >> i >> j >> v))
      throw input_error(path.string() + ": truncated entry list");
    t.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    if (symmetric && i != j)
      t.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
  }
  return StructuredMatrix::from_triplets(static_cast<Index>(rows), std::move(t),
                                         symmetric);
}

void write_matrix_market(const fs::path& path, const StructuredMatrix& m) {
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate real "
      << (m.symmetric() ? "symmetric" : "general") << "\n";
  std::size_t count = 0;
  for (Index i = 0; i < m.n(); ++i) {
    auto cols = m.row_cols(i);
    for (Index j : cols)
      if (!m.symmetric() || j <= i) ++count;
  }
  out << m.n() << " " << m.n() << " " << count << "\n";
  for (Index i = 0; i < m.n(); ++i) {
    auto cols = m.row_cols(i);
    auto vals = m.row_vals(i);
    for (std::size_t e = 0; e < cols.size(); ++e)
      if (!m.symmetric() || cols[e] <= i)
        out << (i + 1) << " " << (cols[e] + 1) << " " << format_full(vals[e])
            << "\n";
  }
  save_text(path, out.str());
}

std::vector<double> read_vector(const fs::path& path) {
  if (path.extension() == ".json") {
    json j = load_json(path);
    if (!j.is_array()) throw input_error(path.string() + ": expected JSON array");
    return j.get<std::vector<double>>();
  }
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    v.push_back(parse_double(line, path.string()));
  }
  return v;
}

void write_vector(const fs::path& path, std::span<const double> v) {
  if (path.extension() == ".json") {
    json j = json::array();
    for (double x : v) j.push_back(x);
    save_text(path, j.dump());
    return;
  }
  std::ostringstream out;
  for (double x : v) out << format_full(x) << "\n";
  save_text(path, out.str());
}

void write_bundle(const fs::path& dir, const EstimationProblem& p) {
  fs::create_directories(dir);
  write_graph(dir / "graph.json", p.g);

  std::ostringstream ycsv;
  ycsv << "edge,i,j,y,measured\n";
  for (Index e = 0; e < p.g.n_edges(); ++e) {
    const auto [i, j] = p.g.edges()[e];
    ycsv << e << "," << i << "," << j << "," << format_full(p.y[e]) << ","
         << int(p.measured[e]) << "\n";
  }
  save_text(dir / "y.csv", ycsv.str());

  std::ostringstream meas;
  meas << "kind,id,value\n";
  for (Index e = 0; e < p.g.n_edges(); ++e)
    meas << "edge," << e << "," << format_full(p.p_meas[e]) << "\n";
  for (Index i = 0; i < p.g.n_vertices(); ++i)
    meas << "vertex," << i << "," << format_full(p.delta_meas[i]) << "\n";
  save_text(dir / "meas.csv", meas.str());

  json cfg;
  cfg["c"] = p.c;
  if (!p.truth.empty()) {
    cfg["truth"] = json::array();
    for (double v : p.truth) cfg["truth"].push_back(v);
  }
  save_text(dir / "config.json", cfg.dump());
}

EstimationProblem read_bundle(const fs::path& dir) {
  EstimationProblem p;
  p.g = read_graph(dir / "graph.json");
  const Index m = p.g.n_edges();
  const Index n = p.g.n_vertices();
  p.y.assign(m, 0.0);
  p.measured.assign(m, 0);
  p.p_meas.assign(m, 0.0);
  p.delta_meas.assign(n, 0.0);

  std::ifstream ycsv(dir / "y.csv");
  if (!ycsv) throw input_error("cannot open " + (dir / "y.csv").string());
  std::string line;
  std::getline(ycsv, line);  // header
  while (std::getline(ycsv, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5) throw input_error("y.csv: expected 5 columns");
    const Index e = static_cast<Index>(std::stol(fields[0]));
    if (e < 0 || e >= m) throw input_error("y.csv: edge index out of range");
    const Index i = static_cast<Index>(std::stol(fields[1]));
    const Index j = static_cast<Index>(std::stol(fields[2]));
    if (p.g.edges()[e] != std::array<Index, 2>{std::min(i, j), std::max(i, j)})
      throw input_error("y.csv: edge endpoints disagree with graph.json");
    p.y[e] = parse_double(fields[3], "y.csv");
    p.measured[e] = fields[4] == "1";
  }

  std::ifstream meas(dir / "meas.csv");
  if (!meas) throw input_error("cannot open " + (dir / "meas.csv").string());
  std::getline(meas, line);  // header
  while (std::getline(meas, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) throw input_error("meas.csv: expected 3 columns");
    const Index id = static_cast<Index>(std::stol(fields[1]));
    const double v = parse_double(fields[2], "meas.csv");
    if (fields[0] == "edge") {
      if (id < 0 || id >= m) throw input_error("meas.csv: edge id out of range");
      p.p_meas[id] = v;
    } else if (fields[0] == "vertex") {
      if (id < 0 || id >= n) throw input_error("meas.csv: vertex id out of range");
      p.delta_meas[id] = v;
    } else {
      throw input_error("meas.csv: unknown kind '" + fields[0] + "'");
    }
  }

  json cfg = load_json(dir / "config.json");
  if (!cfg.contains("c")) throw input_error("config.json: missing \"c\"");
  p.c = cfg["c"].get<double>();
  if (p.c <= 0) throw input_error("config.json: c must be positive");
  if (cfg.contains("truth")) p.truth = cfg["truth"].get<std::vector<double>>();

  p.sigma_p.resize(m);
  for (Index e = 0; e < m; ++e)
    p.sigma_p[e] = p.measured[e] ? p.y[e] : std::sqrt(10.0) * p.y[e];
  return p;
}

BoundsFile read_bounds(const fs::path& path, const Graph& g) {
  json j = load_json(path);
  if (!j.is_array()) throw input_error(path.string() + ": expected a JSON array");
  BoundsFile out;
  for (const auto& row : j) {
    if (!row.contains("edge") || !row.contains("lo") || !row.contains("hi"))
      throw input_error(path.string() + ": each row needs edge, lo, hi");
    BoxRow br;
    br.i = row["edge"][0].get<Index>();
    br.j = row["edge"][1].get<Index>();
    if (g.edge_index(br.i, br.j) < 0)
      throw input_error(path.string() + ": (" + std::to_string(br.i) + "," +
                        std::to_string(br.j) + ") is not an edge");
    br.lo = row["lo"].get<double>();
    br.hi = row["hi"].get<double>();
    out.rows.push_back(br);
    if (row.contains("mu")) out.mu = row["mu"].get<double>();
  }
  return out;
}

DelaySchedule read_delay_trace(const fs::path& path) {
  json j = load_json(path);
  DelaySchedule s;
  s.kind = DelaySchedule::Kind::trace;
  if (!j.contains("events"))
    throw input_error(path.string() + ": missing \"events\"");
  for (const auto& e : j["events"]) {
    DelaySchedule::Event ev;
    ev.t = e["t"].get<int>();
    ev.k = e["k"].get<Index>();
    ev.tau = e["tau"].get<std::vector<int>>();
    s.events.push_back(std::move(ev));
  }
  std::sort(s.events.begin(), s.events.end(),
            [](const auto& a, const auto& b) {
              return a.t != b.t ? a.t < b.t : a.k < b.k;
            });
  return s;
}

void write_delay_trace(const fs::path& path, const DelaySchedule& schedule) {
  json j;
  j["events"] = json::array();
  for (const auto& e : schedule.events)
    j["events"].push_back({{"t", e.t}, {"k", e.k}, {"tau", e.tau}});
  save_text(path, j.dump());
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace,
                     bool threaded_columns, bool err_column) {
  std::ostringstream out;
  out << "iter,time_s,residual_inf";
  if (err_column) out << ",err_inf";
  if (threaded_columns) out << ",worker_id,local_iter";
  out << "\n";
  for (const auto& row : trace) {
    out << row.iter << "," << format_full(row.time_s) << ","
        << format_full(row.residual);
    if (err_column) out << "," << format_full(row.err_ref);
    if (threaded_columns) out << "," << row.worker_id << "," << row.local_iter;
    out << "\n";
  }
  save_text(path, out.str());
}

void write_admm_trace_csv(const fs::path& path,
                          const std::vector<AdmmTraceRow>& trace) {
  std::ostringstream out;
  out << "iter,time_s,primal_residual_inf,dual_residual_inf,err_inf\n";
  for (const auto& row : trace)
    out << row.iter << "," << format_full(row.time_s) << ","
        << format_full(row.primal_residual) << ","
        << format_full(row.dual_residual) << "," << format_full(row.err_ref)
        << "\n";
  save_text(path, out.str());
}

}  // namespace schwarznet::io
