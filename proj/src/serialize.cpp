#include "rsc/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef ROUGHCALC_GIT_DESCRIBE
#define ROUGHCALC_GIT_DESCRIBE "untracked"
#endif

namespace rsc {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string build_id() { return ROUGHCALC_GIT_DESCRIBE; }

namespace {

void write_file(const std::string& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << content;
}

std::string read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string grid_csv(const GridPath& p) {
  std::string s = "node,t";
  for (Eigen::Index i = 0; i < p.rows() * p.cols(); ++i) s += ",v" + std::to_string(i);
  s += "\n";
  for (int k = 0; k <= p.grid.n_steps; ++k) {
    s += std::to_string(k) + "," + format_double(p.grid.time(k));
    const Mat& m = p.values[k];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) s += "," + format_double(m(i, j));
    s += "\n";
  }
  return s;
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json grid_header(const TimeGrid& g, Eigen::Index rows, Eigen::Index cols,
                         const char* kind) {
  ordered_json j;
  j["kind"] = kind;
  j["t0"] = g.t0;
  j["T"] = g.T;
  j["n_steps"] = g.n_steps;
  j["rows"] = rows;
  j["cols"] = cols;
  return j;
}

}  // namespace

void save_grid_path(const std::string& base, const GridPath& p) {
  write_file(base + ".csv", grid_csv(p));
  write_file(base + ".json", grid_header(p.grid, p.rows(), p.cols(), "grid_path").dump(2) + "\n");
}

GridPath load_grid_path(const std::string& base) {
  ordered_json h = ordered_json::parse(read_file(base + ".json"));
  TimeGrid g(h.at("t0").get<double>(), h.at("T").get<double>(), h.at("n_steps").get<int>());
  const Eigen::Index rows = h.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = h.at("cols").get<Eigen::Index>();
  auto table = parse_csv(read_file(base + ".csv"));
  if (static_cast<int>(table.size()) != g.nodes())
    throw std::runtime_error("load_grid_path: row count mismatch");
  std::vector<Mat> vals;
  vals.reserve(table.size());
  for (const auto& row : table) {
    if (static_cast<Eigen::Index>(row.size()) != 2 + rows * cols)
      throw std::runtime_error("load_grid_path: column count mismatch");
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[2 + i * cols + j];
    vals.push_back(std::move(m));
  }
  return GridPath(g, std::move(vals));
}

void save_two_param(const std::string& base, const TwoParamGrid& a) {
  std::string s = "interval,t_left,t_right";
  for (Eigen::Index i = 0; i < a.rows() * a.cols(); ++i) s += ",a" + std::to_string(i);
  s += "\n";
  for (int k = 0; k < a.grid.n_steps; ++k) {
    s += std::to_string(k) + "," + format_double(a.grid.time(k)) + "," +
         format_double(a.grid.time(k + 1));
    const Mat& m = a.consecutive[k];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) s += "," + format_double(m(i, j));
    s += "\n";
  }
  write_file(base + ".csv", s);
  ordered_json h = grid_header(a.grid, a.rows(), a.cols(), "two_param_grid");
  h["chen_rule"] = a.rule == TwoParamGrid::Rule::Chen ? "chen" : "additive";
  write_file(base + ".json", h.dump(2) + "\n");
  if (a.rule == TwoParamGrid::Rule::Chen) {
    save_grid_path(base + ".left", a.left);
    save_grid_path(base + ".right", a.right);
  }
}

TwoParamGrid load_two_param(const std::string& base) {
  ordered_json h = ordered_json::parse(read_file(base + ".json"));
  TimeGrid g(h.at("t0").get<double>(), h.at("T").get<double>(), h.at("n_steps").get<int>());
  const Eigen::Index rows = h.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = h.at("cols").get<Eigen::Index>();
  auto table = parse_csv(read_file(base + ".csv"));
  if (static_cast<int>(table.size()) != g.n_steps)
    throw std::runtime_error("load_two_param: row count mismatch");
  std::vector<Mat> blocks;
  blocks.reserve(table.size());
  for (const auto& row : table) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[3 + i * cols + j];
    blocks.push_back(std::move(m));
  }
  if (h.at("chen_rule").get<std::string>() == "chen") {
    return make_chen(g, std::move(blocks), load_grid_path(base + ".left"),
                     load_grid_path(base + ".right"));
  }
  TwoParamGrid a;
  a.grid = g;
  a.consecutive = std::move(blocks);
  a.rule = TwoParamGrid::Rule::Additive;
  return a;
}

void save_lift_manifest(const std::string& file, std::uint64_t seed, int refine, double alpha) {
  ordered_json j;
  j["kind"] = "lift_manifest";
  j["seed"] = seed;
  j["refine"] = refine;
  j["alpha"] = alpha;
  j["convention"] = "area(a,b) ~ int deltaX^a dX^b; transpose reverses factors";
  j["version"] = 1;
  write_file(file, j.dump(2) + "\n");
}

void save_report_csv(const std::string& file, const ConvergenceReport& rep) {
  std::string s = "mesh,median,p90,order_so_far\n";
  for (std::size_t i = 0; i < rep.meshes.size(); ++i) {
    std::string order = "nan";
    if (i >= 2) {
      std::vector<double> m(rep.meshes.begin(), rep.meshes.begin() + i + 1);
      std::vector<double> r(rep.median.begin(), rep.median.begin() + i + 1);
      try {
        order = format_double(convergence_rate(m, r).slope);
      } catch (const std::exception&) {
        order = rep.exact ? "inf" : "nan";
      }
    }
    s += format_double(rep.meshes[i]) + "," + format_double(rep.median[i]) + "," +
         format_double(rep.p90[i]) + "," + order + "\n";
  }
  write_file(file, s);
}

void save_report_json(const std::string& file, const ConvergenceReport& rep,
                      const std::string& config_echo) {
  ordered_json j;
  j["name"] = rep.name;
  j["build"] = build_id();
  j["meshes"] = rep.meshes;
  j["median"] = rep.median;
  j["p90"] = rep.p90;
  if (rep.exact)
    j["fitted_order"] = "exact";
  else
    j["fitted_order"] = rep.fitted_order;
  j["order_threshold"] = rep.order_threshold;
  j["pass"] = rep.pass;
  if (!config_echo.empty()) j["config"] = ordered_json::parse(config_echo);
  write_file(file, j.dump(2) + "\n");
}

}  // namespace rsc
