#pragma once

#include <atomic>
#include <filesystem>
#include <iostream>
#include <random>

#include "mixray/config.hpp"
#include "mixray/inversion.hpp"
#include "mixray/io.hpp"
#include "mixray/symbol_lab.hpp"

namespace mixray::app {

constexpr int kDim = 3;
using Chart = MetricChart<kDim>;
using Grid = GridSpec<kDim>;

inline Vec<kDim> vec3(const std::vector<double>& v) { return Vec<kDim>(v[0], v[1], v[2]); }

inline Grid make_grid(const ExperimentConfig& c) {
  Grid g;
  const auto nodes = c.integers("grid", "nodes");
  for (int a = 0; a < kDim; ++a) g.nodes[a] = static_cast<int>(nodes.size() == 1 ? nodes[0] : nodes[a]);
  g.box.lo = vec3(c.reals("grid", "lo"));
  g.box.hi = vec3(c.reals("grid", "hi"));
  return g;
}

inline Chart make_chart(const ExperimentConfig& c) {
  const std::string kind = c.text("chart", "kind");
  Box<kDim> box;
  box.lo = vec3(c.reals("chart", "lo"));
  box.hi = vec3(c.reals("chart", "hi"));
  if (kind == "euclidean-ball-shell")
    return Chart::ball_shell(c.real("chart", "radius"), c.real("chart", "depth"), c.real("chart", "y_half"),
                             c.flag("chart", "concave"));
  if (kind == "euclidean") return Chart::euclidean(box);
  if (kind == "conformal")
    return Chart::conformal(box, c.real("chart", "phi0"), vec3(c.reals("chart", "phi_lin")),
                            vec3(c.reals("chart", "phi_quad")));
  const FieldFile f = read_field(c.path("chart", "metric_file"));
  constexpr int ncomp = kDim * (kDim + 1) / 2;
  if (f.n != kDim || f.dims.size() != kDim || f.components != ncomp || f.lo.size() != kDim || f.hi.size() != kDim)
    throw ConfigError("config: " + c.at("chart", "metric_file") +
                      ": metric file needs 3 dims, 6 components and lo/hi header lines");
  Grid mg;
  for (int a = 0; a < kDim; ++a) mg.nodes[a] = static_cast<int>(f.dims[a]);
  mg.box.lo = vec3(f.lo);
  mg.box.hi = vec3(f.hi);
  return Chart::grid_sampled(mg, f.data);
}

inline TransformKind transform_kind(const ExperimentConfig& c) {
  return c.text("experiment", "kind") == "T1" ? TransformKind::T1 : TransformKind::L11;
}

inline int sigma_of(const ExperimentConfig& c, const Chart& chart) {
  const std::string s = c.text("experiment", "sigma");
  return s == "auto" ? conjugation_sign(chart) : std::stoi(s);
}

inline VolumeWeight weight_of(const ExperimentConfig& c) {
  return c.text("experiment", "weight") == "chart" ? VolumeWeight::Chart : VolumeWeight::Scattering;
}

inline NormalOptions normal_options(const ExperimentConfig& c, const Chart& chart) {
  NormalOptions o;
  o.kind = transform_kind(c);
  o.F = c.real("experiment", "F");
  o.sigma = sigma_of(c, chart);
  if (c.text("cutoff", "profile") == "bump") {
    o.chi = CutoffProfile::bump(c.real("cutoff", "width"));
  } else if (c.real("cutoff", "nu") > 0) {
    o.chi = CutoffProfile::gaussian(c.real("cutoff", "nu"));
  } else {
    const Vec<kDim - 1> y = 0.5 * (chart.box.lo.tail(kDim - 1) + chart.box.hi.tail(kDim - 1));
    const auto conv = boundary_convexity_alpha(chart, y);
    const double alpha = conv.isotropic ? conv.alpha : conv.metric_max;
    o.chi = CutoffProfile::gaussian_from_alpha(alpha, o.F);
  }
  o.radial_order = static_cast<int>(c.integer("quadrature", "radial"));
  o.angular_order = static_cast<int>(c.integer("quadrature", "angular"));
  o.geodesic.step = c.real("quadrature", "step");
  o.geodesic.max_steps = static_cast<int>(c.integer("quadrature", "max_steps"));
  o.threads = static_cast<int>(c.integer("experiment", "threads"));
  return o;
}

inline SolveOptions solve_options(const ExperimentConfig& c) {
  SolveOptions o;
  const std::string m = c.text("solver", "method");
  o.method = m == "cg" ? SolveMethod::CG : m == "direct" ? SolveMethod::Direct : SolveMethod::Auto;
  o.reg_relative = c.real("solver", "regularization");
  o.tolerance = c.real("solver", "tolerance");
  o.max_iterations = static_cast<int>(c.integer("solver", "max_iterations"));
  o.threads = static_cast<int>(c.integer("experiment", "threads"));
  return o;
}

// Gaussian envelope of the analytic truth, zero outside the grid box.
inline std::function<double(const Vec<kDim>&)> envelope(const ExperimentConfig& c, const Grid& g) {
  Vec<kDim> center = 0.5 * (g.box.lo + g.box.hi);
  Vec<kDim> width = 0.45 * (g.box.hi - g.box.lo);
  const auto cv = c.reals("field", "center");
  if (!cv.empty()) center = vec3(cv);
  const auto wv = c.reals("field", "width");
  if (wv.size() == 1) width.setConstant(wv[0]);
  if (wv.size() == 3) width = vec3(wv);
  return [center, width, box = g.box](const Vec<kDim>& p) {
    if (!box.contains(p, 1e-12)) return 0.0;
    return std::exp(-(p - center).cwiseQuotient(width).squaredNorm());
  };
}

inline Mat<kDim> tensor_of(const ExperimentConfig& c) {
  const auto t = c.reals("field", "tensor");
  Mat<kDim> A;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) A(i, j) = t[i * kDim + j];
  return trace_free<kDim>(A);
}

// Vector field vanishing on the grid boundary and outside the grid box.
inline std::function<Vec<kDim>(const Vec<kDim>&)> interior_potential(const Grid& g) {
  return [box = g.box](const Vec<kDim>& p) {
    if (!box.contains(p, 0.0)) return Vec<kDim>::Zero().eval();
    double s = 1.0;
    for (int a = 0; a < kDim; ++a) s *= std::sin(kPi * (p[a] - box.lo[a]) / (box.hi[a] - box.lo[a]));
    return Vec<kDim>(s * Vec<kDim>(0.4, -0.2, 0.3));
  };
}

struct Truth {
  TransformKind kind = TransformKind::T1;
  Eigen::VectorXd values;                                // grid samples
  std::function<Vec<kDim>(const Vec<kDim>&)> vector;    // T1 evaluation
  std::function<Mat<kDim>(const Vec<kDim>&)> tensor;    // L11 evaluation
};

// Ground truth of the forward run. Analytic profiles are evaluated exactly
// along rays; file fields and the added potential enter through their
// multilinear interpolant.
inline Truth make_truth(const ExperimentConfig& c, const Chart& chart, const Grid& g, int sigma) {
  Truth t;
  t.kind = transform_kind(c);
  const std::string profile = c.text("field", "profile");
  const int C = value_size(t.kind, kDim);
  if (t.kind == TransformKind::T1) {
    VectorField<kDim> grid_part(g);
    std::function<Vec<kDim>(const Vec<kDim>&)> analytic = [](const Vec<kDim>&) { return Vec<kDim>::Zero(); };
    if (profile == "gaussian") {
      const auto env = envelope(c, g);
      const Vec<kDim> dir = vec3(c.reals("field", "direction"));
      analytic = [env, dir](const Vec<kDim>& p) { return Vec<kDim>(env(p) * dir); };
    } else if (profile == "file") {
      const FieldFile f = read_field(c.path("field", "file"));
      if (f.expected_size() != g.count() * C || f.components != C)
        throw ConfigError("config: " + c.at("field", "file") + ": field does not match the grid");
      grid_part.data = f.data;
    }
    VectorField<kDim> sampled = sample_vector_field(g, analytic);
    t.values = sampled.vec() + grid_part.vec();
    t.vector = [analytic, grid_part](const Vec<kDim>& p) { return Vec<kDim>(analytic(p) + grid_part(p)); };
    return t;
  }
  TensorField11<kDim> grid_part(g);
  std::function<Mat<kDim>(const Vec<kDim>&)> analytic = [](const Vec<kDim>&) { return Mat<kDim>::Zero(); };
  if (profile == "gaussian") {
    const auto env = envelope(c, g);
    const Mat<kDim> A = tensor_of(c);
    analytic = [env, A](const Vec<kDim>& p) { return Mat<kDim>(env(p) * A); };
  } else if (profile == "file") {
    const FieldFile f = read_field(c.path("field", "file"));
    if (f.expected_size() != g.count() * C || f.components != C)
      throw ConfigError("config: " + c.at("field", "file") + ": field does not match the grid");
    grid_part.vec() = trace_free_stack(Eigen::Map<const Eigen::VectorXd>(f.data.data(), f.data.size()), kDim);
  }
  const double amp = c.real("field", "potential");
  if (amp > 0) {
    // analytic d^B_F u, scaled to amp times the norm of the remaining truth
    const double F = c.real("experiment", "F");
    const auto u = interior_potential(g);
    auto pot = [chart, u, F, sigma, box = g.box](const Vec<kDim>& p) {
      if (!box.contains(p, 1e-4)) return Mat<kDim>::Zero().eval();  // u and its derivatives vanish there
      return covariant_dB_at<kDim>(chart, u, p, F, sigma);
    };
    const double base = std::max(sample_tensor_field(g, analytic).vec().norm() + grid_part.vec().norm(), 1e-300);
    const double scale = amp * base / sample_tensor_field(g, pot).vec().norm();
    analytic = [analytic, pot, scale](const Vec<kDim>& p) { return Mat<kDim>(analytic(p) + scale * pot(p)); };
  }
  TensorField11<kDim> sampled = sample_tensor_field(g, analytic);
  t.values = sampled.vec() + grid_part.vec();
  t.tensor = [analytic, grid_part](const Vec<kDim>& p) { return Mat<kDim>(analytic(p) + grid_part(p)); };
  return t;
}

inline FieldFile grid_file(const Grid& g, int components, const Eigen::VectorXd& v, const std::string& hash) {
  FieldFile f;
  f.config_hash = hash;
  f.dims = {g.nodes[0], g.nodes[1], g.nodes[2]};
  f.n = kDim;
  f.components = components;
  f.lo = {g.box.lo[0], g.box.lo[1], g.box.lo[2]};
  f.hi = {g.box.hi[0], g.box.hi[1], g.box.hi[2]};
  f.data.assign(v.data(), v.data() + v.size());
  return f;
}

inline Json header_json(const ExperimentConfig& c) {
  Json j;
  j["tool"] = "mixray";
  j["version"] = kVersion;
  j["config_hash"] = c.hash();
  return j;
}

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;
  Json summary;
};

inline std::string out_path(const ExperimentConfig& c, const std::string& name) {
  return (std::filesystem::path(c.text("experiment", "output")) / name).string();
}

// ---- forward ----------------------------------------------------------------

// Traces every backprojection ray of every node through the truth and
// applies L: the data vector L T f on the grid.
inline Eigen::VectorXd simulate(const Chart& chart, const Grid& g, const NormalOptions& o, const Truth& truth,
                                std::vector<std::vector<RayRecord<kDim>>>* records = nullptr,
                                std::atomic<long>* warnings = nullptr) {
  const int C = value_size(o.kind, kDim);
  const std::size_t nn = g.count();
  if (records) records->assign(nn, {});
  Eigen::VectorXd data = Eigen::VectorXd::Zero(nn * C);
  parallel_for(nn, o.threads, [&](std::size_t k) {
    const Vec<kDim> z = g.point(k);
    auto rec = o.kind == TransformKind::T1 ? forward_dataset(chart, truth.vector, z, o, warnings)
                                           : forward_dataset(chart, truth.tensor, z, o, warnings);
    std::size_t r = 0;
    data.segment(k * C, C) =
        apply_backprojection_L(chart, z, o, [&](const BackRay<kDim>&) { return rec[r++].value; });
    if (records) (*records)[k] = std::move(rec);
  });
  return data;
}

inline RunResult run_forward(const ExperimentConfig& c) {
  const Chart chart = make_chart(c);
  const Grid g = make_grid(c);
  NormalOptions o = normal_options(c, chart);
  const Truth truth = make_truth(c, chart, g, o.sigma);
  const int C = value_size(o.kind, kDim);
  const std::size_t nn = g.count();
  std::vector<std::vector<RayRecord<kDim>>> records;
  std::atomic<long> warnings{0};
  Eigen::VectorXd data = simulate(chart, g, o, truth, &records, &warnings);
  const double noise = c.real("field", "noise");
  if (noise > 0) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("experiment", "seed")));
    std::normal_distribution<double> nd;
    const double s = noise * data.norm() / std::sqrt(static_cast<double>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) data[i] += s * nd(rng);
  }
  const std::string hash = c.hash();
  std::string csv = csv_banner(hash);
  csv += "ray,node,z0,z1,z2,zeta0,zeta1,zeta2,theta0,theta1,theta2,value0,value1,value2\n";
  std::size_t id = 0;
  for (std::size_t k = 0; k < nn; ++k)
    for (const auto& r : records[k]) {
      csv += std::to_string(id++) + "," + std::to_string(k);
      for (const Vec<kDim>* v : {&r.z, &r.zeta, &r.theta, &r.value})
        for (int a = 0; a < kDim; ++a) csv += "," + csv_real((*v)[a]);
      csv += "\n";
    }
  RunResult res;
  const std::string rays = out_path(c, "rays.csv"), dpath = out_path(c, "data.mrayf"),
                    tpath = out_path(c, "truth.mrayf");
  write_text(rays, csv);
  write_field(dpath, grid_file(g, C, data, hash));
  write_field(tpath, grid_file(g, C, truth.values, hash));
  res.artifacts = {rays, dpath, tpath};
  res.summary = header_json(c);
  res.summary["command"] = "forward";
  res.summary["mode"] = to_string(o.kind);
  res.summary["rays"] = id;
  res.summary["data_norm"] = data.norm();
  res.summary["truth_norm"] = truth.values.norm();
  res.summary["weight_warnings"] = warnings.load();
  return res;
}

// ---- normal -------------------------------------------------------------------

inline Json normal_sidecar(const ExperimentConfig& c, const NormalMatrix& nm) {
  Json j = header_json(c);
  j["kind"] = to_string(nm.kind);
  j["dim"] = nm.dim;
  j["grid"] = nm.nodes;
  j["box_lo"] = nm.box_lo;
  j["box_hi"] = nm.box_hi;
  j["F"] = nm.F;
  j["sigma"] = nm.sigma;
  j["chi"] = {{"profile", nm.chi_kind}, {"width", nm.chi_width}, {"nu", nm.chi_nu}};
  j["quadrature"] = {{"radial", nm.radial_order}, {"angular", nm.angular_order}, {"step", nm.step}};
  j["rows"] = nm.M.rows();
  j["cols"] = nm.M.cols();
  j["asymmetry"] = nm.asymmetry();
  j["zero_columns"] = nm.zero_columns.size();
  j["weight_warnings"] = nm.weight_warnings;
  return j;
}

inline RunResult run_normal(const ExperimentConfig& c) {
  const Chart chart = make_chart(c);
  const Grid g = make_grid(c);
  const NormalOptions o = normal_options(c, chart);
  const NormalMatrix nm =
      assemble_normal_matrix(chart, g, o, static_cast<std::size_t>(c.integer("solver", "unknown_cap")));
  FieldFile f;
  f.config_hash = c.hash();
  f.dims = {nm.M.rows(), nm.M.cols()};
  f.n = kDim;
  f.components = 1;
  f.data.resize(nm.M.size());
  for (Eigen::Index i = 0; i < nm.M.rows(); ++i)
    for (Eigen::Index j = 0; j < nm.M.cols(); ++j) f.data[i * nm.M.cols() + j] = nm.M(i, j);
  RunResult res;
  const std::string mpath = out_path(c, "normal.mrayf"), jpath = out_path(c, "normal.json");
  write_field(mpath, f);
  const Json side = normal_sidecar(c, nm);
  write_json(jpath, side);
  res.artifacts = {mpath, jpath};
  res.summary = side;
  res.summary["command"] = "normal";
  return res;
}

inline NormalMatrix load_normal(const ExperimentConfig& c) {
  const Json side = read_json(out_path(c, "normal.json"));
  const FieldFile f = read_field(out_path(c, "normal.mrayf"));
  if (side.value("config_hash", "") != c.hash() || f.config_hash != c.hash())
    throw ConfigError("normal matrix was produced by a different config (hash mismatch)");
  NormalMatrix nm;
  nm.kind = side.at("kind").get<std::string>() == "T1" ? TransformKind::T1 : TransformKind::L11;
  nm.dim = side.at("dim").get<int>();
  nm.nodes = side.at("grid").get<std::vector<int>>();
  nm.box_lo = side.at("box_lo").get<std::vector<double>>();
  nm.box_hi = side.at("box_hi").get<std::vector<double>>();
  nm.F = side.at("F").get<double>();
  nm.sigma = side.at("sigma").get<int>();
  if (f.dims.size() != 2) throw Error("normal matrix file must be two-dimensional");
  nm.M.resize(f.dims[0], f.dims[1]);
  for (Eigen::Index i = 0; i < nm.M.rows(); ++i)
    for (Eigen::Index j = 0; j < nm.M.cols(); ++j) nm.M(i, j) = f.data[i * nm.M.cols() + j];
  return nm;
}

inline Eigen::VectorXd load_grid_values(const ExperimentConfig& c, const std::string& name, std::size_t size) {
  const FieldFile f = read_field(out_path(c, name));
  if (f.config_hash != c.hash()) throw ConfigError(name + " was produced by a different config (hash mismatch)");
  if (f.data.size() != size) throw ConfigError(name + " does not match the normal matrix size");
  return Eigen::Map<const Eigen::VectorXd>(f.data.data(), f.data.size());
}

inline Json report_json(const ReconstructionReport& r) {
  Json j;
  j["mode"] = r.mode;
  j["grid"] = r.grid;
  j["F"] = r.F;
  j["regularization"] = r.regularization;
  j["iterations"] = r.iterations;
  j["relative_error"] = r.relative_error;
  j["residual_norm"] = r.residual_norm;
  j["relative_residual"] = r.relative_residual;
  j["condition_estimate"] = r.condition_estimate;
  j["converged"] = r.converged;
  return j;
}

// ---- invert / layers ------------------------------------------------------------

inline RunResult run_invert(const ExperimentConfig& c) {
  const NormalMatrix nm = load_normal(c);
  const Eigen::VectorXd data = load_grid_values(c, "data.mrayf", nm.M.rows());
  std::optional<Eigen::VectorXd> truth;
  if (std::filesystem::exists(out_path(c, "truth.mrayf")))
    truth = load_grid_values(c, "truth.mrayf", nm.M.cols());
  const Grid g = make_grid(c);
  const SolveOptions so = solve_options(c);
  Reconstruction r;
  if (nm.kind == TransformKind::T1) {
    r = reconstruct<kDim>(nm, data, nullptr, so, truth ? &*truth : nullptr);
  } else {
    const Chart chart = make_chart(c);
    GaugeSystem<kDim> gs(chart, g, nm.F, nm.sigma, weight_of(c));
    r = reconstruct<kDim>(nm, data, &gs, so, truth ? &*truth : nullptr);
  }
  RunResult res;
  const std::string fpath = out_path(c, "recon.mrayf"), jpath = out_path(c, "report.json");
  write_field(fpath, grid_file(g, nm.block(), r.field, c.hash()));
  Json j = header_json(c);
  j["command"] = "invert";
  j["report"] = report_json(r.report);
  write_json(jpath, j);
  res.artifacts = {fpath, jpath};
  res.summary = j;
  res.exit_code = r.report.converged ? 0 : 1;
  return res;
}

inline RunResult run_layers(const ExperimentConfig& c) {
  const NormalMatrix nm = load_normal(c);
  if (nm.kind != TransformKind::T1) throw ConfigError("layers: only T1 mode is supported");
  const Eigen::VectorXd data = load_grid_values(c, "data.mrayf", nm.M.rows());
  std::optional<Eigen::VectorXd> truth;
  if (std::filesystem::exists(out_path(c, "truth.mrayf")))
    truth = load_grid_values(c, "truth.mrayf", nm.M.cols());
  const Grid g = make_grid(c);
  const LayerSweep sweep = layer_sweep<kDim>(nm, data, g, c.reals("layers", "levels"), solve_options(c),
                                            truth ? &*truth : nullptr);
  Json j = header_json(c);
  j["command"] = "layers";
  j["stitched_error"] = sweep.stitched_error;
  Json layers = Json::array();
  bool ok = true;
  for (const auto& l : sweep.layers) {
    layers.push_back({{"level", l.level}, {"nodes", l.nodes.size()}, {"report", report_json(l.report)}});
    ok = ok && l.report.converged;
  }
  j["layers"] = layers;
  RunResult res;
  const std::string fpath = out_path(c, "layers.mrayf"), jpath = out_path(c, "layers.json");
  write_field(fpath, grid_file(g, nm.block(), sweep.field, c.hash()));
  write_json(jpath, j);
  res.artifacts = {fpath, jpath};
  res.summary = j;
  res.exit_code = ok ? 0 : 1;
  return res;
}

// ---- symbols ------------------------------------------------------------------------

inline symbols::Kind symbol_kind(const std::string& s) {
  if (s == "T1_FIBER") return symbols::Kind::T1_FIBER;
  if (s == "T1_BASE") return symbols::Kind::T1_BASE;
  if (s == "L11_FIBER") return symbols::Kind::L11_FIBER;
  return symbols::Kind::L11_BASE;
}

inline RunResult run_symbols(const ExperimentConfig& c) {
  const symbols::Kind kind = symbol_kind(c.text("symbols", "kind"));
  const int n = static_cast<int>(c.integer("symbols", "n"));
  const std::string rs = c.text("symbols", "restricted");
  const bool restricted = rs == "auto" ? symbols::is_l11(kind) : rs == "true";
  symbols::IntegralOptions io;
  io.order = static_cast<int>(c.integer("quadrature", "symbol_order"));
  io.alpha = c.real("symbols", "alpha");
  io.h = c.real("symbols", "h");
  io.chi = CutoffProfile::bump(c.real("cutoff", "width"));
  const auto points = symbols::direction_grid(n, static_cast<int>(c.integer("symbols", "directions")),
                                              static_cast<unsigned>(c.integer("experiment", "seed")));
  const symbols::SymbolReport rep = symbols::ellipticity_scan(kind, points, restricted, io);
  const double F = symbols::is_fiber(kind) ? c.real("experiment", "F") : 1.0 / io.h;
  std::string csv = csv_banner(c.hash()) + "kind,xi";
  for (int a = 1; a < n; ++a) csv += ",eta" + std::to_string(a);
  csv += ",F,min_eig,pass\n";
  double worst_anti = 0.0;
  for (const auto& d : rep.directions) {
    csv += symbols::to_string(kind) + "," + csv_real(d.xi);
    for (Eigen::Index a = 0; a < d.eta.size(); ++a) csv += "," + csv_real(d.eta[a]);
    csv += "," + csv_real(F) + "," + csv_real(d.min_eig) + "," + (d.pass ? "1" : "0") + "\n";
    worst_anti = std::max(worst_anti, d.anti_hermitian);
  }
  RunResult res;
  const std::string path = out_path(c, "symbols.csv"), jpath = out_path(c, "symbols.json");
  write_text(path, csv);
  Json j = header_json(c);
  j["command"] = "symbols";
  j["kind"] = symbols::to_string(kind);
  j["restricted"] = rep.restricted;
  j["directions"] = rep.directions.size();
  j["subspace_dim"] = rep.directions.empty() ? 0 : rep.directions.front().subspace_dim;
  j["global_min_eig"] = rep.global_min;
  j["max_anti_hermitian"] = worst_anti;
  j["pass"] = rep.pass;
  write_json(jpath, j);
  res.artifacts = {path, jpath};
  res.summary = j;
  res.exit_code = rep.pass ? 0 : 1;
  return res;
}

// ---- dispatch ---------------------------------------------------------------------

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> cmds = {"forward", "normal", "symbols", "invert", "layers"};
  return cmds;
}

inline RunResult run(const std::string& command, const ExperimentConfig& c) {
  std::filesystem::create_directories(c.text("experiment", "output"));
  if (command == "forward") return run_forward(c);
  if (command == "normal") return run_normal(c);
  if (command == "symbols") return run_symbols(c);
  if (command == "invert") return run_invert(c);
  if (command == "layers") return run_layers(c);
  throw ConfigError("unknown command '" + command + "'");
}

inline std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const TrappedRayError*>(&e)) return "TrappedRayError";
  if (dynamic_cast<const DegeneratePairingError*>(&e)) return "DegeneratePairingError";
  if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

}  // namespace mixray::app
