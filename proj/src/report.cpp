#include "ocl/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ocl/errors.hpp"
#include "wire.hpp"

namespace ocl {

std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

double round_sig6(double v) {
  return std::strtod(format_sig6(v).c_str(), nullptr);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out.good()) throw IoError("write failed for " + path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string matrix_csv(const AccuracyMatrix& m) {
  std::ostringstream out;
  out << "task_i,task_j,accuracy\n";
  for (std::size_t i = 0; i < m.num_tasks(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out << (i + 1) << "," << (j + 1) << "," << format_exact(m.at(i, j)) << "\n";
    }
  }
  return out.str();
}

void dump_buffer_files(const SeedResult& seed, const std::string& stem) {
  Dataset ds;
  ds.num_classes = seed.num_classes;
  ds.features = Matrix(seed.final_buffer.size(), seed.final_buffer.front().x.size());
  ds.labels.resize(seed.final_buffer.size());
  for (std::size_t i = 0; i < seed.final_buffer.size(); ++i) {
    ds.features.set_row(i, seed.final_buffer[i].x);
    ds.labels[i] = seed.final_buffer[i].label;
  }
  save_dataset(ds, stem + ".ocld");
  std::ostringstream scores;
  for (const BufferEntry& e : seed.final_buffer) {
    scores << format_exact(e.score) << "\n";
  }
  write_text_file(stem + ".ocld.scores", scores.str());
}

}  // namespace

void emit_report(const ExperimentConfig& cfg, const RunResult& result,
                 const std::string& out_dir) {
  if (result.per_seed.empty()) throw IoError("emit_report: no results to write");
  ensure_dir(out_dir);

  for (const SeedResult& seed : result.per_seed) {
    write_text_file(out_dir + "/accuracy_matrix_seed" + std::to_string(seed.seed) + ".csv",
                    matrix_csv(seed.matrix));
    if (!seed.diagnostics.empty()) {
      std::ostringstream diag;
      diag << "step,task,loss,quadratic_model\n";
      for (const DiagnosticRow& row : seed.diagnostics) {
        diag << row.step << "," << row.task << "," << format_exact(row.loss) << ","
             << format_exact(row.quadratic_model) << "\n";
      }
      write_text_file(out_dir + "/diagnostics_seed" + std::to_string(seed.seed) + ".csv",
                      diag.str());
    }
    if (!seed.final_buffer.empty()) {
      dump_buffer_files(seed, out_dir + "/buffer_seed" + std::to_string(seed.seed));
    }
  }

  // Aggregates are recomputed from the rounded per-seed values so the
  // summary file is self-consistent at its own precision.
  std::vector<double> acc;
  std::vector<double> fgt;
  std::ostringstream summary;
  summary << config_echo(cfg);
  for (const SeedResult& seed : result.per_seed) {
    const double a = round_sig6(seed.end_average_accuracy);
    const double f = round_sig6(seed.average_forgetting);
    acc.push_back(a);
    fgt.push_back(f);
    summary << "seed." << seed.seed << ".A_T = " << format_sig6(a) << "\n";
    summary << "seed." << seed.seed << ".F_T = " << format_sig6(f) << "\n";
  }
  auto mean_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };
  auto std_of = [&](const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  const double mean_a = mean_of(acc);
  const double mean_f = mean_of(fgt);
  summary << "mean.A_T = " << format_sig6(mean_a) << "\n";
  summary << "std.A_T = " << format_sig6(std_of(acc, mean_a)) << "\n";
  summary << "mean.F_T = " << format_sig6(mean_f) << "\n";
  summary << "std.F_T = " << format_sig6(std_of(fgt, mean_f)) << "\n";
  write_text_file(out_dir + "/summary.txt", summary.str());
}

void emit_sweep_report(const SweepReport& report, const std::string& out_dir) {
  if (report.cells.empty()) throw IoError("emit_sweep_report: no cells to write");
  ensure_dir(out_dir);
  std::ostringstream table;
  table << "method,trick,lambda,buffer_capacity,mean_A_T,std_A_T,mean_F_T,std_F_T\n";
  for (const SweepCell& cell : report.cells) {
    table << to_string(cell.config.method) << "," << to_string(cell.config.trick) << ","
          << format_sig6(cell.config.lambda) << "," << cell.config.buffer_capacity << ","
          << format_sig6(cell.result.mean_accuracy) << ","
          << format_sig6(cell.result.std_accuracy) << ","
          << format_sig6(cell.result.mean_forgetting) << ","
          << format_sig6(cell.result.std_forgetting) << "\n";
    std::ostringstream cell_dir;
    cell_dir << out_dir << "/cell_" << to_string(cell.config.method) << "_"
             << to_string(cell.config.trick) << "_lam" << format_sig6(cell.config.lambda)
             << "_M" << cell.config.buffer_capacity;
    emit_report(cell.config, cell.result, cell_dir.str());
  }
  write_text_file(out_dir + "/sweep.csv", table.str());
}

AccuracyMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw TruncatedFile(path + ": empty file");
  if (line != "task_i,task_j,accuracy") {
    throw BadMagic(path + ": unexpected CSV header \"" + line + "\"");
  }
  struct Entry {
    std::size_t i, j;
    double v;
  };
  std::vector<Entry> entries;
  std::size_t max_i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t c1 = line.find(',');
    std::size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw TruncatedFile(path + ": malformed row \"" + line + "\"");
    }
    Entry e;
    e.i = static_cast<std::size_t>(std::strtoull(line.substr(0, c1).c_str(), nullptr, 10));
    e.j = static_cast<std::size_t>(
        std::strtoull(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr, 10));
    e.v = std::strtod(line.substr(c2 + 1).c_str(), nullptr);
    if (e.i == 0 || e.j == 0 || e.j > e.i) {
      throw TruncatedFile(path + ": invalid matrix entry (" + line + ")");
    }
    max_i = std::max(max_i, e.i);
    entries.push_back(e);
  }
  AccuracyMatrix m(max_i);
  std::vector<std::vector<double>> rows(max_i);
  for (std::size_t i = 0; i < max_i; ++i) rows[i].assign(i + 1, -1.0);
  for (const Entry& e : entries) rows[e.i - 1][e.j - 1] = e.v;
  for (std::size_t i = 0; i < max_i; ++i) {
    for (double v : rows[i]) {
      if (v < 0.0) throw TruncatedFile(path + ": matrix row " + std::to_string(i + 1) +
                                       " is incomplete");
    }
    m.set_row(i, rows[i]);
  }
  return m;
}

std::map<std::string, std::string> read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    };
    strip(key);
    strip(value);
    out[key] = value;
  }
  return out;
}

}  // namespace ocl
