#include "traffic/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "traffic/riemann.hpp"

namespace traffic::experiments {

namespace {

std::string format_double(double v, int precision = 17) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": cannot parse number '" << s << "'";
    throw IoError(os.str());
  }
  return v;
}

bool is_extremum(double left, double mid, double right) {
  const double a = mid - left;
  const double b = right - mid;
  return a * b < 0.0 || ((a == 0.0) != (b == 0.0));
}

// Coarse-grid mask of cells far enough from every local extremum of rho and u.
std::vector<bool> smooth_mask(const std::vector<Primitive>& cells, double dx, double radius) {
  const std::size_t n = cells.size();
  std::vector<double> extrema;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = cells[(i + n - 1) % n];
    const auto& c = cells[i];
    const auto& r = cells[(i + 1) % n];
    if (is_extremum(l.rho, c.rho, r.rho) || is_extremum(l.u, c.u, r.u))
      extrema.push_back((static_cast<double>(i) + 0.5) * dx);
  }
  std::vector<bool> keep(n, true);
  const double length = static_cast<double>(n) * dx;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * dx;
    for (double e : extrema) {
      const double d = std::abs(x - e);
      if (std::min(d, length - d) <= radius) {
        keep[i] = false;
        break;
      }
    }
  }
  return keep;
}

}  // namespace

ExperimentPreset preset(std::string_view id) {
  ExperimentPreset p;
  p.id = std::string(id);
  const std::vector<ModelKind> momentum{ModelKind::AwRascleType, ModelKind::HamiltonJacobi};
  if (id == "ex1") {
    p.data = {{0.5, 1.0}, {0.5, 0.0}, 0.5};
    p.t_end = 0.2;
    p.models = {ModelKind::ConservativeAwRascle, ModelKind::HamiltonJacobi};
  } else if (id == "ex2") {
    p.data = {{0.0, 1.0}, {0.5, 1.0}, 0.5};
    p.t_end = 0.2;
    p.models = momentum;
  } else if (id == "ex3") {
    p.data = {{0.5, 0.0}, {0.9, 0.5}, 0.5};
    p.t_end = 0.4;
    p.models = momentum;
  } else if (id == "ex4") {
    p.data = {{0.5, 0.0}, {0.1, 1.0}, 0.25};
    p.t_end = 0.5;
    p.models = momentum;
  } else {
    throw ConfigError("unknown preset '" + std::string(id) + "' (expected ex1..ex4)");
  }
  return p;
}

std::vector<std::string> preset_ids() { return {"ex1", "ex2", "ex3", "ex4"}; }

SimulationConfig make_config(const ExperimentPreset& p, ModelKind model, double dx, double cfl,
                             const ModelParameters& params) {
  SimulationConfig c;
  c.model = model;
  c.params = params;
  c.x_lo = p.x_lo;
  c.x_hi = p.x_hi;
  c.n_cells = static_cast<int>(std::lround((p.x_hi - p.x_lo) / dx));
  c.t_end = p.t_end;
  c.cfl_number = cfl;
  c.initial_condition = p.data;
  return c;
}

std::string RunRecord::label() const {
  return std::string(model_name(model)) + "@" + format_dx(dx);
}

std::string OracleRecord::label() const { return "oracle@" + format_dx(dx); }

const RunRecord* ComparisonReport::find(ModelKind model, double dx) const {
  for (const auto& r : runs)
    if (r.model == model && r.dx == dx) return &r;
  return nullptr;
}

const OracleRecord* ComparisonReport::oracle(double dx) const {
  for (const auto& o : oracles)
    if (o.dx == dx) return &o;
  return nullptr;
}

ComparisonReport run_comparison(const ExperimentPreset& p, const std::vector<ModelKind>& models,
                                const std::vector<double>& resolutions,
                                const std::optional<std::filesystem::path>& out_dir,
                                double cfl) {
  ComparisonReport report;
  report.preset_id = p.id;
  report.t_end = p.t_end;
  const ModelParameters params;

  for (double dx : resolutions) {
    for (ModelKind model : models) {
      RunRecord rec;
      rec.model = model;
      rec.dx = dx;
      rec.x_lo = p.x_lo;
      try {
        const SimulationConfig config = make_config(p, model, dx, cfl, params);
        auto result = macro::run_macro(config);
        rec.cells = to_primitive(result.snapshots.back(), params);
        rec.t = result.snapshots.back().t;
        rec.steps = std::move(result.steps);
        rec.wall_seconds = result.wall_seconds;
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.error = e.what();
        report.partial = true;
      }
      report.runs.push_back(std::move(rec));
    }
    const auto ws = riemann::solve_riemann(p.data.left, p.data.right, params);
    const auto n = static_cast<std::size_t>(std::lround((p.x_hi - p.x_lo) / dx));
    report.oracles.push_back({dx, p.x_lo, riemann::sample_grid(ws, p.data.x0, p.t_end, p.x_lo, dx, n)});
  }

  struct Entry {
    std::string label;
    double dx;
    double x_lo;
    const std::vector<Primitive>* cells;
  };
  std::vector<Entry> entries;
  for (const auto& r : report.runs)
    if (r.ok) entries.push_back({r.label(), r.dx, r.x_lo, &r.cells});
  for (const auto& o : report.oracles) entries.push_back({o.label(), o.dx, o.x_lo, &o.cells});

  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      const Entry* coarse = &entries[i];
      const Entry* fine = &entries[j];
      if (coarse->dx < fine->dx) std::swap(coarse, fine);
      const auto on_coarse = resample(*fine->cells, fine->x_lo, fine->dx, coarse->x_lo,
                                      coarse->dx, coarse->cells->size());
      report.distances.push_back({entries[i].label, entries[j].label,
                                  l1_distance(*coarse->cells, on_coarse, coarse->dx),
                                  linf_distance(*coarse->cells, on_coarse)});
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    for (const auto& r : report.runs) {
      if (!r.ok) continue;
      const auto path = *out_dir / (p.id + "_" + std::string(model_name(r.model)) + "_" +
                                    format_dx(r.dx) + ".csv");
      write_csv(path, csv_rows(model_name(r.model), r.dx, r.t, r.x_lo, r.cells));
      report.csv_paths.push_back(path);
    }
    for (const auto& o : report.oracles) {
      const auto path = *out_dir / (p.id + "_oracle_" + format_dx(o.dx) + ".csv");
      write_csv(path, csv_rows("oracle", o.dx, p.t_end, o.x_lo, o.cells));
      report.csv_paths.push_back(path);
    }
  }
  return report;
}

Primitive sine_profile(double x) {
  const double s = std::sin(2.0 * std::numbers::pi * x);
  return {0.5 + 0.2 * s, 0.5 + 0.1 * s};
}

ConvergenceResult convergence_study(const ConvergenceSetup& setup) {
  if (setup.levels < 3) throw ConfigError("convergence_study: need at least 3 levels");
  if (setup.n0 < 10) throw ConfigError("convergence_study: n0 must be at least 10");

  ConvergenceResult out;
  std::vector<std::vector<Primitive>> solutions;
  for (int level = 0; level < setup.levels; ++level) {
    SimulationConfig c;
    c.model = setup.model;
    c.params = setup.params;
    c.n_cells = setup.n0 << level;
    c.t_end = setup.t_end;
    c.cfl_number = setup.cfl;
    c.boundary = Boundary::Periodic;
    c.initial_condition = SmoothData{setup.profile ? setup.profile : sine_profile};
    out.n_cells.push_back(c.n_cells);
    solutions.push_back(to_primitive(macro::run_macro(c).snapshots.back(), c.params));
  }

  for (int level = 0; level + 1 < setup.levels; ++level) {
    const auto& coarse = solutions[static_cast<std::size_t>(level)];
    const auto& fine = solutions[static_cast<std::size_t>(level) + 1];
    const double dx = 1.0 / out.n_cells[static_cast<std::size_t>(level)];
    const auto keep = smooth_mask(coarse, dx, setup.exclusion_radius);
    double e = 0.0;
    double e_ex = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      // Fine cells 2i and 2i+1 straddle coarse centre i.
      const double restricted = 0.5 * (fine[2 * i].rho + fine[2 * i + 1].rho);
      const double d = std::abs(coarse[i].rho - restricted) * dx;
      e += d;
      if (keep[i]) e_ex += d;
    }
    out.errors.push_back(e);
    out.errors_excluded.push_back(e_ex);
  }

  auto orders = [](const std::vector<double>& errs, std::vector<double>& dst) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
      dst.push_back(std::log2(errs[i] / errs[i + 1]));
      sum += dst.back();
    }
    return dst.empty() ? 0.0 : sum / static_cast<double>(dst.size());
  };
  out.mean_order = orders(out.errors, out.orders);
  out.mean_order_excluded = orders(out.errors_excluded, out.orders_excluded);
  return out;
}

double l1_distance(const std::vector<Primitive>& a, const std::vector<Primitive>& b, double dx) {
  if (a.size() != b.size()) throw ConfigError("l1_distance: grids differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i].rho - b[i].rho);
  return s * dx;
}

double linf_distance(const std::vector<Primitive>& a, const std::vector<Primitive>& b) {
  if (a.size() != b.size()) throw ConfigError("linf_distance: grids differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i].rho - b[i].rho));
  return s;
}

std::vector<Primitive> resample(const std::vector<Primitive>& cells, double x_lo, double dx,
                                double to_x_lo, double to_dx, std::size_t to_n) {
  std::vector<Primitive> out(to_n);
  if (cells.empty()) return out;
  const double last = static_cast<double>(cells.size() - 1);
  for (std::size_t j = 0; j < to_n; ++j) {
    const double x = to_x_lo + (static_cast<double>(j) + 0.5) * to_dx;
    const double s = std::clamp((x - x_lo) / dx - 0.5, 0.0, last);
    const auto i = static_cast<std::size_t>(std::floor(s));
    const double f = s - static_cast<double>(i);
    if (i + 1 >= cells.size()) {
      out[j] = cells.back();
    } else {
      out[j] = {(1.0 - f) * cells[i].rho + f * cells[i + 1].rho,
                (1.0 - f) * cells[i].u + f * cells[i + 1].u};
    }
  }
  return out;
}

double steepest_gradient_position(const std::vector<Primitive>& cells, double x_lo, double dx) {
  std::size_t best = 0;
  double jump = -1.0;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double d = std::abs(cells[i + 1].rho - cells[i].rho);
    if (d > jump) {
      jump = d;
      best = i;
    }
  }
  return x_lo + (static_cast<double>(best) + 1.0) * dx;
}

std::vector<CsvRow> csv_rows(std::string_view model, double dx, double t, double x_lo,
                             const std::vector<Primitive>& cells) {
  std::vector<CsvRow> rows;
  rows.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    rows.push_back({x_lo + (static_cast<double>(i) + 0.5) * dx, cells[i].rho, cells[i].u,
                    std::string(model), dx, t});
  return rows;
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvRow>& rows) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "x,rho,u,model,dx,t\n";
  for (const auto& r : rows) {
    os << format_double(r.x) << ',' << format_double(r.rho) << ',' << format_double(r.u) << ','
       << r.model << ',' << format_double(r.dx) << ',' << format_double(r.t) << '\n';
  }
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(is, line) || line != "x,rho,u,model,dx,t")
    throw IoError(path.string() + ": missing or unexpected header");
  std::vector<CsvRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 6) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": expected 6 fields";
      throw IoError(os.str());
    }
    rows.push_back({parse_double(fields[0], path, lineno), parse_double(fields[1], path, lineno),
                    parse_double(fields[2], path, lineno), std::string(fields[3]),
                    parse_double(fields[4], path, lineno), parse_double(fields[5], path, lineno)});
  }
  return rows;
}

std::string format_dx(double dx) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, dx);
  return std::string(buf, res.ptr);
}

}  // namespace traffic::experiments
