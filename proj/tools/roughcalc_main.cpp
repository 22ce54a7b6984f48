#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rsc/scenarios.hpp"
#include "rsc/serialize.hpp"

namespace {

int cmd_run(const std::string& config, const rsc::RunOptions& opt) {
  rsc::ScenarioResult res = rsc::run_scenario_file(config, opt);
  for (const auto& rep : res.reports) {
    std::printf("%-32s %s  order=%s  finest_median=%s\n", rep.name.c_str(),
                rep.pass ? "pass" : "FAIL",
                rep.exact ? "exact" : rsc::format_double(rep.fitted_order).c_str(),
                rep.median.empty() ? "-" : rsc::format_double(rep.median.back()).c_str());
  }
  return res.exit_code;
}

int cmd_fit_rate(const std::string& csv) {
  std::ifstream in(csv);
  if (!in) {
    std::fprintf(stderr, "cannot read %s\n", csv.c_str());
    return 2;
  }
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> mesh, resid;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double m, r;
    if (std::sscanf(line.c_str(), "%lf,%lf", &m, &r) != 2) {
      std::fprintf(stderr, "bad csv row: %s\n", line.c_str());
      return 2;
    }
    mesh.push_back(m);
    resid.push_back(r);
  }
  try {
    rsc::RateFit fit = rsc::convergence_rate(mesh, resid);
    std::printf("slope=%s intercept=%s r2=%s n_used=%d%s\n",
                rsc::format_double(fit.slope).c_str(),
                rsc::format_double(fit.intercept).c_str(), rsc::format_double(fit.r2).c_str(),
                fit.n_used, fit.zeros_excluded ? " zeros_excluded" : "");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fit-rate: %s\n", e.what());
    return 2;
  }
  return 0;
}

int cmd_kolmogorov(const std::string& dir, int level, double q) {
  namespace fs = std::filesystem;
  std::vector<rsc::GridPath> paths;
  std::vector<rsc::TwoParamGrid> grids;
  try {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      std::string base = entry.path().parent_path() / entry.path().stem();
      if (base.size() > 5 && (base.ends_with(".left") || base.ends_with(".right"))) continue;
      std::ifstream in(entry.path());
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (text.find("two_param_grid") != std::string::npos)
        grids.push_back(rsc::load_two_param(base));
      else if (text.find("grid_path") != std::string::npos)
        paths.push_back(rsc::load_grid_path(base));
    }
    rsc::ScalingFit fit;
    if (!grids.empty())
      fit = rsc::kolmogorov_scaling_fit(grids, level, q);
    else
      fit = rsc::kolmogorov_scaling_fit(paths, level, q);
    std::printf("samples=%zu level=%d q=%s slope=%s\n", grids.empty() ? paths.size() : grids.size(),
                level, rsc::format_double(q).c_str(), rsc::format_double(fit.slope).c_str());
    for (std::size_t i = 0; i < fit.scales.size(); ++i)
      std::printf("scale=%s norm=%s\n", rsc::format_double(fit.scales[i]).c_str(),
                  rsc::format_double(fit.norms[i]).c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "kolmogorov: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rough-stochastic calculus verification suite"};
  app.require_subcommand(1);

  rsc::RunOptions opt;
  std::string config, csv, samples_dir;
  int level = 1;
  double q = 4.0;

  CLI::App* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config, "JSON config file")->required();
  run->add_option("--seed", opt.seed, "master seed");
  run->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
  run->add_option("--out", opt.out_dir, "output directory for reports");

  CLI::App* fit = app.add_subcommand("fit-rate", "OLS convergence order of a residual CSV");
  fit->add_option("csv", csv, "CSV with mesh,residual columns")->required();

  CLI::App* kol = app.add_subcommand("kolmogorov", "moment-scaling fit over stored samples");
  kol->add_option("samples-dir", samples_dir, "directory of serialized samples")->required();
  kol->add_option("--level", level, "object level 1..3");
  kol->add_option("--q", q, "moment order");

  CLI::App* list = app.add_subcommand("list-scenarios", "list registered scenario names");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config, opt);
  if (fit->parsed()) return cmd_fit_rate(csv);
  if (kol->parsed()) return cmd_kolmogorov(samples_dir, level, q);
  if (list->parsed()) {
    for (const auto& name : rsc::list_scenarios()) std::printf("%s\n", name.c_str());
    return 0;
  }
  return 2;
}
