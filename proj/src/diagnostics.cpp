#include "ks/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace ks {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double entropy(const FeFunction& u, const LumpedMass& mass) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += mass.diagonal[i] * xlogx(u[i]);
  return s;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

}  // namespace

double energy_E0(const FeFunction& u, const FeFunction& v, const LumpedMass& mass,
                 const SparseOperator& stiffness) {
  if (u.values().minCoeff() < 0.0) return kNan;  // entropy undefined
  const Eigen::VectorXd& uv = u.values();
  const Eigen::VectorXd& vv = v.values();
  const double v_h_sq = mass.diagonal.dot(vv.cwiseAbs2());
  const double grad_v_sq = vv.dot(stiffness.matrix * vv);
  const double uv_h = mass.diagonal.dot(uv.cwiseProduct(vv));
  return 0.5 * v_h_sq + 0.5 * grad_v_sq - uv_h + entropy(u, mass);
}

double energy_E1(const FeFunction& u, const FeFunction& v, const LumpedMass& mass,
                 const SparseOperator& stiffness) {
  const FeFunction lap = discrete_laplacian(v, mass, stiffness);
  return mass.diagonal.dot(u.values().cwiseAbs2()) +
         mass.diagonal.dot(lap.values().cwiseAbs2());
}

MoserTrudingerPair moser_trudinger_pair(const FeFunction& u, const LumpedMass& mass,
                                        const SparseOperator& stiffness,
                                        const IndicatorConfig& cfg) {
  MoserTrudingerPair out;
  out.positivity_hypothesis = u.values().minCoeff() > 0.0;
  out.lhs = mass.diagonal.dot(u.values().array().exp().matrix());
  const double grad_sq = u.values().dot(stiffness.matrix * u.values());
  const double l1 = mass.diagonal.dot(u.values().cwiseAbs());
  const double measure = mass.total();
  out.rhs = cfg.generic_C * (1.0 + cfg.generic_C * grad_sq) *
            std::exp(grad_sq / (8.0 * cfg.theta_omega) + l1 / measure);
  out.overflow = !std::isfinite(out.lhs) || !std::isfinite(out.rhs);
  return out;
}

namespace {

struct R0Terms {
  double r0, b0, b1, b2;
  bool smallness_ok;
  double smallness_lhs;
};

R0Terms b_quantities(double e0, double l1u, double l1v, double measure,
                     const IndicatorConfig& cfg) {
  const double d = cfg.delta, eps = cfg.epsilon, C = cfg.generic_C;
  R0Terms r;
  r.r0 = 1.0 / (d * M_E) +
         (l1u / d) * (C / eps + eps + ((1.0 + d) / measure) * (l1v + l1u));
  r.b0 = e0 / d + r.r0;
  r.b1 = (1.0 + 1.0 / d) * e0 + r.r0 + 2.0 * measure / M_E;
  r.b2 = e0 + r.b0 + r.b1;
  r.smallness_lhs =
      (1.0 + d) * (1.0 + d) * (8.0 * cfg.theta_omega * C * eps + 1.0) * l1u /
      (8.0 * cfg.theta_omega);
  r.smallness_ok = r.smallness_lhs <= 0.5;
  return r;
}

}  // namespace

Indicators restriction_indicators(const FeFunction& u0, const FeFunction& v0,
                                  const LumpedMass& mass, const SparseOperator& stiffness,
                                  const Mesh& mesh, double k, double t_final,
                                  const IndicatorConfig& cfg) {
  Indicators out;
  const double e0 = energy_E0(u0, v0, mass, stiffness);
  out.valid = !std::isnan(e0);
  const double l1u = mass.diagonal.dot(u0.values().cwiseAbs());
  const double l1v = mass.diagonal.dot(v0.values().cwiseAbs());
  const double measure = mass.total();
  const R0Terms b = b_quantities(e0, l1u, l1v, measure, cfg);
  out.r0 = b.r0;
  out.b0 = b.b0;
  out.b1 = b.b1;
  out.b2 = b.b2;
  out.smallness_lhs = b.smallness_lhs;
  out.smallness_ok = b.smallness_ok;

  const double C = cfg.generic_C;
  // F may overflow to +inf when B2 is large; that is recorded as-is and the
  // boolean conditions then evaluate false.
  out.f = std::exp(b.b2 + std::sqrt(t_final) * std::sqrt(b.b2)) *
          (e0 + C * t_final * b.b1 * b.b1 * b.b1 + C * t_final * l1u);

  // Measured negativity margin of the stiffness off-diagonals, and the mesh
  // size, feed the h- and (h,k)-conditions with p = infinity so h^(1-2/p) = h.
  double c_neg = std::numeric_limits<double>::infinity();
  for (int col = 0; col < stiffness.matrix.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness.matrix, col); it; ++it)
      if (it.row() != it.col()) c_neg = std::min(c_neg, std::abs(it.value()));
  out.c_neg = c_neg;

  const double h = mesh_size(mesh);
  const double e1 = energy_E1(u0, v0, mass, stiffness);
  out.cond_hk = C * (k / (h * h)) * out.f < 0.5;
  out.cond_h = -c_neg + C * h * std::sqrt(out.f) < 0.0;
  out.cond_hII = C * h * e1 <= 5.0 / 12.0;
  if (!out.valid) out.cond_hk = out.cond_h = out.cond_hII = false;
  return out;
}

B2ScanResult b2_scan(const FeFunction& u0, const FeFunction& v0, const LumpedMass& mass,
                     const SparseOperator& stiffness, double target,
                     const IndicatorConfig& base) {
  const double e0 = energy_E0(u0, v0, mass, stiffness);
  const double l1u = mass.diagonal.dot(u0.values().cwiseAbs());
  const double l1v = mass.diagonal.dot(v0.values().cwiseAbs());
  const double measure = mass.total();
  B2ScanResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 19; ++i) {
    for (int j = 1; j <= 19; ++j) {
      IndicatorConfig cfg = base;
      cfg.delta = 0.05 * i;
      cfg.epsilon = 0.05 * j;
      const R0Terms b = b_quantities(e0, l1u, l1v, measure, cfg);
      const double dist = std::abs(b.b2 - target);
      if (dist < best.distance) {
        best = {cfg.delta, cfg.epsilon, b.b2, dist, b.smallness_ok};
      }
    }
  }
  return best;
}

StepRecord make_step_record(int n, double t, const FeFunction& u, const FeFunction& v,
                            const LumpedMass& mass, const SparseOperator& stiffness,
                            const StepRecord* prev, double k) {
  StepRecord r;
  r.n = n;
  r.t = t;
  const Eigen::VectorXd& uv = u.values();
  const Eigen::VectorXd& vv = v.values();
  r.mass_u = mass.diagonal.dot(uv);
  r.mass_v = mass.diagonal.dot(vv);
  r.min_u = uv.minCoeff();
  r.max_u = uv.maxCoeff();
  r.min_v = vv.minCoeff();
  r.max_v = vv.maxCoeff();
  r.grad_u_sq = uv.dot(stiffness.matrix * uv);
  r.grad_v_sq = vv.dot(stiffness.matrix * vv);
  const FeFunction lap = discrete_laplacian(v, mass, stiffness);
  r.lap_v_lumped_sq = mass.diagonal.dot(lap.values().cwiseAbs2());
  r.E0 = energy_E0(u, v, mass, stiffness);
  r.E1 = mass.diagonal.dot(uv.cwiseAbs2()) + r.lap_v_lumped_sq;
  r.positivity_u = r.min_u > 0.0;
  r.positivity_v = r.min_v >= 0.0;
  if (prev) {
    r.v_mass_residual = (1.0 + k) * r.mass_v - prev->mass_v - k * r.mass_u;
    r.e0_decrement = r.E0 - prev->E0;
  }
  return r;
}

void emit_records(const std::vector<StepRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw Error("emit_records: empty record list");
  std::ofstream out(path);
  if (!out) throw Error("emit_records: cannot open " + path.string());
  out << kRecordCsvHeader << "\n";
  for (const StepRecord& r : records) {
    out << r.n << ',' << fmt(r.t) << ',' << fmt(r.mass_u) << ',' << fmt(r.mass_v) << ','
        << fmt(r.min_u) << ',' << fmt(r.max_u) << ',' << fmt(r.min_v) << ',' << fmt(r.max_v)
        << ',' << fmt(r.E0) << ',' << fmt(r.E1) << ',' << fmt(r.grad_u_sq) << ','
        << fmt(r.grad_v_sq) << ',' << fmt(r.lap_v_lumped_sq) << ',' << fmt(r.v_mass_residual)
        << ',' << (r.e0_decrement ? fmt(*r.e0_decrement) : std::string()) << ','
        << (r.positivity_u ? 1 : 0) << ',' << (r.positivity_v ? 1 : 0) << "\n";
  }
  if (!out) throw Error("emit_records: write failed for " + path.string());
}

std::vector<StepRecord> parse_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse_records: cannot open " + path.string());
  const std::string file = path.string();
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != kRecordCsvHeader)
    throw ParseError("bad or missing CSV header", file, 1);
  ++lineno;

  std::vector<StepRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 17) throw ParseError("expected 17 fields", file, lineno);

    auto num = [&](const std::string& s) -> double {
      char* end = nullptr;
      const double x = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') throw ParseError("bad number '" + s + "'", file, lineno);
      return x;
    };
    StepRecord r;
    r.n = static_cast<int>(num(cells[0]));
    r.t = num(cells[1]);
    r.mass_u = num(cells[2]);
    r.mass_v = num(cells[3]);
    r.min_u = num(cells[4]);
    r.max_u = num(cells[5]);
    r.min_v = num(cells[6]);
    r.max_v = num(cells[7]);
    r.E0 = num(cells[8]);
    r.E1 = num(cells[9]);
    r.grad_u_sq = num(cells[10]);
    r.grad_v_sq = num(cells[11]);
    r.lap_v_lumped_sq = num(cells[12]);
    r.v_mass_residual = num(cells[13]);
    if (!cells[14].empty()) r.e0_decrement = num(cells[14]);
    r.positivity_u = num(cells[15]) != 0.0;
    r.positivity_v = num(cells[16]) != 0.0;
    records.push_back(r);
  }
  return records;
}

}  // namespace ks
