// Command-line driver: stationarity sweeps, shape optimization runs and the
// analytic self-test. Talks to the library only through the C interface.

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapeopt.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using MeshPtr = std::unique_ptr<so_mesh, decltype(&so_mesh_free)>;
using ReportPtr = std::unique_ptr<so_report, decltype(&so_report_free)>;

void check(so_status status) {
  if (status == SO_OK) return;
  if (status == SO_ERR_PARAM || status == SO_ERR_IO) throw ConfigError(so_last_error());
  throw SolverFailure(so_last_error());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw ConfigError("bad number '" + text + "' in " + what);
  return v;
}

/// Initial shape descriptor. Polygons are refined uniformly; disks are
/// rebuilt per level so that boundary midpoints land on the circle.
struct Shape {
  std::string label;
  bool disk = false;
  int sides = 0;
  double size = 0.0;  // polygon area or disk radius

  MeshPtr at_level(int level) const {
    so_mesh* raw = nullptr;
    if (disk) {
      check(so_mesh_disk(size, level, &raw));
      return MeshPtr(raw, so_mesh_free);
    }
    check(so_mesh_regular_polygon(sides, size, &raw));
    MeshPtr mesh(raw, so_mesh_free);
    for (int i = 0; i < level; ++i) {
      check(so_mesh_refine(mesh.get(), &raw));
      mesh.reset(raw);
    }
    return mesh;
  }
};

Shape parse_shape(const std::string& text) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (text == "square") return {text, false, 4, two_pi};
  if (text == "octagon") return {text, false, 8, two_pi};
  if (text == "hexadecagon") return {text, false, 16, two_pi};
  if (text == "tetragon") return {text, false, 4, 2.0};
  if (text == "disk") return {text, true, 0, std::numbers::sqrt2};
  if (text == "unit-disk") return {text, true, 0, 1.0};
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  std::string label = text;
  for (char& c : label)
    if (c == ':') c = '_';
  if (parts.size() == 2 && parts[0] == "disk") return {label, true, 0, parse_number(parts[1], "shape")};
  if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "polygon") {
    const double sides = parse_number(parts[1], "shape");
    if (sides != std::floor(sides)) throw ConfigError("polygon side count must be an integer");
    const double area = parts.size() == 3 ? parse_number(parts[2], "shape") : two_pi;
    return {label, false, static_cast<int>(sides), area};
  }
  throw ConfigError("unknown shape '" + text + "'");
}

/// "3", "0-4" or "0,2,3".
std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  const auto to_int = [&](const std::string& s) {
    const double v = parse_number(s, "levels");
    if (v < 0 || v != std::floor(v) || v > 12) throw ConfigError("levels must be integers in 0..12");
    return static_cast<int>(v);
  };
  const auto dash = text.find('-');
  if (dash != std::string::npos) {
    const int a = to_int(text.substr(0, dash));
    const int b = to_int(text.substr(dash + 1));
    if (a > b) throw ConfigError("empty level range '" + text + "'");
    for (int l = a; l <= b; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(to_int(item));
  return out;
}

std::filesystem::path output_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

std::string p_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  std::string s = buf;
  for (char& c : s)
    if (c == '.') c = '_';
  return s;
}

struct Options {
  std::string problem = "example1";
  double p = 2.0;
  std::string levels;
  std::vector<std::string> shapes;
  std::string mesh_file;
  std::string out = ".";
  int max_iters = 200;
  int k_min = -20;
  int k_max = 4;
  double eta_rel_stop = 1e-4;
  double min_angle_deg = 2.0;
  bool no_translation = false;
  bool quiet = false;
};

int run_stationarity(const Options& opt) {
  const std::vector<int> levels = parse_levels(opt.levels.empty() ? "0-5" : opt.levels);
  const auto shapes = opt.shapes.empty() ? std::vector<std::string>{"square"} : opt.shapes;
  const auto dir = output_dir(opt.out);
  bool failed = false;
  for (const std::string& name : shapes) {
    const Shape shape = parse_shape(name);
    const auto path = dir / ("stationarity_" + shape.label + "_" + opt.problem + "_p" + p_label(opt.p) + ".csv");
    std::ofstream csv(path);
    if (!csv) throw ConfigError("cannot write '" + path.string() + "'");
    csv << "level,n_triangles,eta_ph,J,wall_time\n";
    for (int level : levels) {
      const auto start = std::chrono::steady_clock::now();
      MeshPtr mesh = shape.at_level(level);
      so_mesh_info info{};
      check(so_mesh_get_info(mesh.get(), &info));
      so_stationarity_result r{};
      const so_status status = so_stationarity(mesh.get(), opt.problem.c_str(), opt.p, &r);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (status == SO_ERR_PARAM) throw ConfigError(so_last_error());
      if (status != SO_OK) {
        failed = true;
        std::cerr << shape.label << " level " << level << ": " << so_last_error() << '\n';
        csv << level << ',' << info.num_triangles << ",nan,nan," << fmt(seconds) << '\n';
        continue;
      }
      csv << level << ',' << info.num_triangles << ',' << fmt(r.eta) << ',' << fmt(r.J) << ','
          << fmt(seconds) << '\n';
      if (!opt.quiet) {
        std::fprintf(stderr, "%-12s level %d  %7d triangles  eta %.6e  J %.8e\n", shape.label.c_str(),
                     level, info.num_triangles, r.eta, r.J);
      }
    }
    if (!opt.quiet) std::cerr << "wrote " << path.string() << '\n';
  }
  return failed ? kExitSolver : kExitOk;
}

void print_record(const so_iteration_record* r, void*) {
  std::fprintf(stderr, "iter %3d  J %.10e  eta %.6e  alpha %.4g  min angle %.2f deg\n", r->iter, r->J,
               r->eta, r->alpha, r->min_angle * 180.0 / std::numbers::pi);
}

int run_optimize(const Options& opt) {
  if (opt.shapes.size() > 1) throw ConfigError("optimize takes a single --shape");
  MeshPtr initial(nullptr, so_mesh_free);
  std::string label;
  if (!opt.mesh_file.empty()) {
    if (!opt.shapes.empty()) throw ConfigError("--mesh and --shape are exclusive");
    so_mesh* raw = nullptr;
    check(so_mesh_read(opt.mesh_file.c_str(), &raw));
    initial.reset(raw);
    label = std::filesystem::path(opt.mesh_file).stem().string();
  } else {
    const Shape shape = parse_shape(opt.shapes.empty() ? "tetragon" : opt.shapes.front());
    const std::vector<int> levels = parse_levels(opt.levels.empty() ? "4" : opt.levels);
    if (levels.size() != 1) throw ConfigError("optimize takes a single refinement level");
    initial = shape.at_level(levels.front());
    label = shape.label;
  }

  so_optimizer_config cfg;
  so_optimizer_config_default(&cfg);
  cfg.p = opt.p;
  cfg.max_outer_iters = opt.max_iters;
  cfg.k_min = opt.k_min;
  cfg.k_max = opt.k_max;
  cfg.eta_rel_stop = opt.eta_rel_stop;
  cfg.min_angle_floor_deg = opt.min_angle_deg;
  cfg.enable_translation_step = opt.no_translation ? 0 : 1;

  const auto dir = output_dir(opt.out);
  so_report* raw_report = nullptr;
  so_mesh* raw_mesh = nullptr;
  check(so_optimize(initial.get(), opt.problem.c_str(), &cfg, opt.quiet ? nullptr : print_record, nullptr,
                    &raw_report, &raw_mesh));
  ReportPtr report(raw_report, so_report_free);
  MeshPtr final_mesh(raw_mesh, so_mesh_free);

  const std::string stem = "optimize_" + label + "_" + opt.problem + "_p" + p_label(opt.p);
  check(so_report_write_csv(report.get(), (dir / (stem + ".csv")).string().c_str()));
  check(so_mesh_write(final_mesh.get(), (dir / (stem + "_final.mesh")).string().c_str()));
  for (int i = 0; i < so_report_num_messages(report.get()); ++i) {
    std::cerr << "note: " << so_report_message(report.get(), i) << '\n';
  }
  const std::string termination = so_report_termination(report.get());
  if (!opt.quiet) std::cerr << "termination=" << termination << '\n';
  return termination == "line_search_failed" ? kExitSolver : kExitOk;
}

int run_analytic_check() {
  int count = 0;
  check(so_analytic_check(nullptr, 0, &count));
  std::vector<so_check_result> results(count);
  check(so_analytic_check(results.data(), count, &count));
  int failures = 0;
  for (const so_check_result& r : results) {
    std::printf("%-4s %-48s value %-24s expected %-24s tol %.1e\n", r.pass ? "PASS" : "FAIL", r.name,
                fmt(r.value).c_str(), fmt(r.expected).c_str(), r.tolerance);
    if (!r.pass) ++failures;
  }
  std::printf("%d of %d checks passed\n", count - failures, count);
  return failures == 0 ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization by L^p best approximation of the shape tensor"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with option defaults");
  Options opt;
  app.add_option("--problem", opt.problem, "example1 | gingerbread | kidney");
  app.add_option("--p", opt.p, "exponent in (1, 2]");
  app.add_option("--levels", opt.levels, "refinement levels: N, A-B or A,B,C");
  app.add_option("--shape", opt.shapes,
                 "square | octagon | hexadecagon | tetragon | disk | unit-disk | polygon:N[:area] | disk:R")
      ->delimiter(',');
  app.add_option("--mesh", opt.mesh_file, "initial mesh file (optimize)");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--max-iters", opt.max_iters, "outer iterations (optimize)");
  app.add_option("--k-min", opt.k_min, "smallest step exponent");
  app.add_option("--k-max", opt.k_max, "largest step exponent");
  app.add_option("--eta-rel-stop", opt.eta_rel_stop, "relative eta stagnation threshold");
  app.add_option("--min-angle", opt.min_angle_deg, "mesh degeneracy floor in degrees");
  app.add_flag("--no-translation", opt.no_translation, "skip the barycenter translation half-step");
  app.add_flag("--quiet", opt.quiet, "no progress output");
  auto* stationarity = app.add_subcommand("stationarity", "eta_{p,h} and J over refinement levels");
  auto* optimize = app.add_subcommand("optimize", "shape gradient iteration");
  auto* analytic = app.add_subcommand("analytic-check", "closed-form oracle self-test");
  for (auto* sub : {stationarity, optimize, analytic}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!(opt.p > 1.0 && opt.p <= 2.0)) throw ConfigError("--p must lie in (1, 2]");
    if (opt.max_iters < 0) throw ConfigError("--max-iters must be non-negative");
    if (*stationarity) return run_stationarity(opt);
    if (*optimize) return run_optimize(opt);
    return run_analytic_check();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}
