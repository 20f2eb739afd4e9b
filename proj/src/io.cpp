#include "spikereg/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spikereg/config.hpp"
#include "spikereg/errors.hpp"

namespace spikereg {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV primitives
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& cell, const fs::path& path) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw config_error("bad numeric cell '" + cell + "' in " + path.string());
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw config_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot read " + path.string());
  return is;
}

std::vector<std::string> numbered(const std::string& stem, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

}  // namespace

void write_matrix_csv(const fs::path& path,
                      const std::vector<std::string>& header,
                      const Mat& data) {
  if (static_cast<Eigen::Index>(header.size()) != data.cols()) {
    throw config_error("header width does not match data for " +
                       path.string());
  }
  std::ofstream os = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) {
    os << (j ? "," : "") << header[j];
  }
  os << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      os << (j ? "," : "") << fmt_double(data(i, j));
    }
    os << '\n';
  }
}

Mat load_matrix_csv(const fs::path& path,
                    std::vector<std::string>* header_out) {
  std::ifstream is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) {
    throw config_error("empty csv " + path.string());
  }
  const std::vector<std::string> header = split_csv_line(line);
  std::vector<double> cells;
  Eigen::Index rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto parts = split_csv_line(line);
    if (parts.size() != header.size()) {
      throw config_error("ragged row in " + path.string());
    }
    for (const auto& p : parts) cells.push_back(parse_double(p, path));
    ++rows;
  }
  Mat out(rows, static_cast<Eigen::Index>(header.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = cells[static_cast<std::size_t>(i * out.cols() + j)];
    }
  }
  if (header_out) *header_out = header;
  return out;
}

// ---------------------------------------------------------------------------
// Run storage
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> trajectory_header(int n_x, int n_u, int n_z) {
  std::vector<std::string> h{"t"};
  for (const auto& name : numbered("x", n_x)) h.push_back(name);
  for (const auto& name : numbered("xhat", n_x)) h.push_back(name);
  for (const auto& name : numbered("u", n_u)) h.push_back(name);
  for (const auto& name : numbered("z", n_z)) h.push_back(name);
  for (const auto& name : numbered("p_diag", n_x)) h.push_back(name);
  return h;
}

json metrics_json(const RunResult& r) {
  json m;
  m["tail_error"] = std::vector<double>(
      r.tail_error.data(), r.tail_error.data() + r.tail_error.size());
  m["spike_fraction_pct"] = r.spike_fraction_pct;
  m["cost_control"] = r.cost_control;
  m["cost_spike"] = r.cost_spike;
  return m;
}

}  // namespace

void write_run(const fs::path& dir, const ExperimentConfig& cfg,
               const RunResult& result) {
  fs::create_directories(dir);
  const int n_x = static_cast<int>(result.x.cols());
  const int n_u = static_cast<int>(result.u.cols());
  const int n_z = static_cast<int>(result.z.cols());
  const Eigen::Index rows = result.x.rows();

  Mat table(rows, 1 + 3 * n_x + n_u + n_z);
  for (Eigen::Index k = 0; k < rows; ++k) table(k, 0) = result.t[k];
  Eigen::Index col = 1;
  table.middleCols(col, n_x) = result.x;
  col += n_x;
  table.middleCols(col, n_x) = result.xhat;
  col += n_x;
  table.middleCols(col, n_u) = result.u;
  col += n_u;
  table.middleCols(col, n_z) = result.z;
  col += n_z;
  table.middleCols(col, n_x) = result.p_diag;
  write_matrix_csv(dir / "trajectories.csv", trajectory_header(n_x, n_u, n_z),
                   table);

  if (cfg.framework == Framework::snn_lqr_msif) {
    std::ofstream os = open_out(dir / "raster.csv");
    os << "step,neuron\n";
    for (const auto& rec : result.raster) {
      for (int nrn : rec.neurons) os << rec.step << ',' << nrn << '\n';
    }
  }

  json summary;
  summary["config"] = config_to_json(cfg);
  summary["master_seed"] = result.master_seed;
  summary["metrics"] = metrics_json(result);
  summary["conventions"] = {
      {"time_base", "row k is t_k = k * dt, k = 0..steps"},
      {"control", "u in row k is applied over [t_k, t_k + dt)"},
      {"estimate", "xhat in row k is the estimate before the update at t_k"},
      {"measurement", "z in row k is drawn at t_k and drives the update"},
      {"raster", "one row per spike, firing order, step indexes the time base"},
  };
  summary["correction_log"] = {
      "innovation covariance carries the measurement noise: P_zz = C P C' + R",
      "estimator drift carries the control feedthrough: "
      "d(xhat) = A xhat + B u + K (z - C xhat)",
  };
  std::ofstream os = open_out(dir / "summary.json");
  os << summary.dump(2) << '\n';
}

StoredRun load_run(const fs::path& dir) {
  StoredRun out;
  {
    std::ifstream is = open_in(dir / "summary.json");
    is >> out.summary;
  }
  std::vector<std::string> header;
  const Mat table = load_matrix_csv(dir / "trajectories.csv", &header);
  int n_x = 0, n_u = 0, n_z = 0;
  for (const auto& name : header) {
    if (name.rfind("xhat", 0) == 0) ++n_x;
    else if (name.rfind("u", 0) == 0) ++n_u;
    else if (name.rfind("z", 0) == 0) ++n_z;
  }
  const auto expect = trajectory_header(n_x, n_u, n_z);
  if (header != expect) {
    throw config_error("unexpected trajectories.csv header in " +
                       dir.string());
  }
  RunResult& r = out.result;
  const Eigen::Index rows = table.rows();
  r.t.resize(rows);
  for (Eigen::Index k = 0; k < rows; ++k) r.t[k] = table(k, 0);
  Eigen::Index col = 1;
  r.x = table.middleCols(col, n_x);
  col += n_x;
  r.xhat = table.middleCols(col, n_x);
  col += n_x;
  r.u = table.middleCols(col, n_u);
  col += n_u;
  r.z = table.middleCols(col, n_z);
  col += n_z;
  r.p_diag = table.middleCols(col, n_x);

  if (fs::exists(dir / "raster.csv")) {
    std::ifstream is = open_in(dir / "raster.csv");
    std::string line;
    if (!std::getline(is, line) || split_csv_line(line) !=
                                       std::vector<std::string>{"step",
                                                                "neuron"}) {
      throw config_error("unexpected raster.csv header in " + dir.string());
    }
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto parts = split_csv_line(line);
      if (parts.size() != 2) {
        throw config_error("ragged row in " + (dir / "raster.csv").string());
      }
      const std::int64_t step = std::stoll(parts[0]);
      const int nrn = std::stoi(parts[1]);
      if (!r.raster.empty() && r.raster.back().step == step) {
        r.raster.back().neurons.push_back(nrn);
      } else {
        r.raster.push_back(SpikeRecord{step, {nrn}});
      }
    }
  }

  const json& m = out.summary.at("metrics");
  const auto tail = m.at("tail_error").get<std::vector<double>>();
  r.tail_error = Eigen::Map<const Vec>(tail.data(),
                                       static_cast<Eigen::Index>(tail.size()));
  r.spike_fraction_pct = m.at("spike_fraction_pct").get<double>();
  r.cost_control = m.at("cost_control").get<double>();
  r.cost_spike = m.at("cost_spike").get<double>();
  r.master_seed = out.summary.at("master_seed").get<std::uint64_t>();
  return out;
}

// ---------------------------------------------------------------------------
// Comparison and sweep tables
// ---------------------------------------------------------------------------

void write_compare_csv(const fs::path& path, const CompareResult& result,
                       const std::vector<std::string>& state_labels) {
  if (result.frameworks.empty()) throw config_error("empty comparison");
  const int n_states =
      static_cast<int>(result.cells[0].mean_tail_error.size());
  if (static_cast<int>(state_labels.size()) != n_states) {
    throw config_error("state label count does not match comparison");
  }
  std::ofstream os = open_out(path);
  os << "framework,state,mean_tail_error,std_tail_error,spike_fraction_pct\n";
  for (std::size_t j = 0; j < result.frameworks.size(); ++j) {
    const auto& cell = result.cells[j];
    const std::string fw = to_string(result.frameworks[j]);
    const bool spiking = result.frameworks[j] == Framework::snn_lqr_msif;
    for (int i = 0; i < n_states; ++i) {
      os << fw << ',' << state_labels[i] << ','
         << fmt_double(cell.mean_tail_error[i]) << ','
         << fmt_double(cell.std_tail_error[i]) << ','
         << (spiking ? fmt_double(cell.spike_fraction_pct) : "") << '\n';
    }
  }
}

void write_neuron_sweep_csv(const fs::path& path,
                            const std::vector<NeuronSweepRow>& rows) {
  std::ofstream os = open_out(path);
  os << "n_neurons,tail_error,diverged\n";
  for (const auto& row : rows) {
    os << row.n_neurons << ',' << fmt_double(row.tail_error) << ','
       << (row.diverged ? 1 : 0) << '\n';
  }
}

void write_firing_sweep_csv(const fs::path& path,
                            const std::vector<FiringSweepRow>& rows) {
  std::ofstream os = open_out(path);
  os << "mu,nu,norm_error,spike_pct\n";
  for (const auto& row : rows) {
    os << fmt_double(row.mu) << ',' << fmt_double(row.nu) << ','
       << fmt_double(row.norm_error) << ',' << fmt_double(row.spike_pct)
       << '\n';
  }
}

// ---------------------------------------------------------------------------
// Plot-ready derivations
// ---------------------------------------------------------------------------

std::vector<fs::path> emit_plots(const fs::path& run_dir) {
  const StoredRun stored = load_run(run_dir);
  const RunResult& r = stored.result;
  const int n_x = static_cast<int>(r.x.cols());
  const Eigen::Index rows = r.x.rows();
  std::vector<fs::path> written;

  Mat err(rows, 1 + n_x);
  for (Eigen::Index k = 0; k < rows; ++k) err(k, 0) = r.t[k];
  err.rightCols(n_x) = r.x - r.xhat;
  std::vector<std::string> eh{"t"};
  for (const auto& name : numbered("e", n_x)) eh.push_back(name);
  write_matrix_csv(run_dir / "error.csv", eh, err);
  written.push_back(run_dir / "error.csv");

  const Mat sigma = three_sigma_bounds(r.p_diag);
  Mat bounds(rows, 1 + 2 * n_x);
  for (Eigen::Index k = 0; k < rows; ++k) bounds(k, 0) = r.t[k];
  bounds.middleCols(1, n_x) = -sigma;
  bounds.rightCols(n_x) = sigma;
  std::vector<std::string> bh{"t"};
  for (const auto& name : numbered("lo", n_x)) bh.push_back(name);
  for (const auto& name : numbered("hi", n_x)) bh.push_back(name);
  write_matrix_csv(run_dir / "bounds.csv", bh, bounds);
  written.push_back(run_dir / "bounds.csv");

  if (fs::exists(run_dir / "raster.csv")) {
    const json& cfg = stored.summary.at("config");
    const int n_neurons = cfg.at("neurons").get<int>();
    const int window = cfg.at("metrics_window").get<int>();
    const auto active = active_fraction_timeseries(r.raster, n_neurons,
                                                   rows - 1, window);
    Mat act(rows, 2);
    for (Eigen::Index k = 0; k < rows; ++k) {
      act(k, 0) = r.t[k];
      act(k, 1) = active[static_cast<std::size_t>(k)];
    }
    write_matrix_csv(run_dir / "active.csv", {"t", "pct"}, act);
    written.push_back(run_dir / "active.csv");
  }
  return written;
}

}  // namespace spikereg
