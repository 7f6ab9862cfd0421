#include "groundsurf/hrbf.hpp"

#include <cmath>

#include <Eigen/LU>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace groundsurf {

void HermiteData::validate() const {
  const Eigen::Index n = sites.cols();
  if (n < 1) throw Error("hermite data needs at least one site");
  if (values.size() != n || gradients.cols() != n) throw Error("hermite data size mismatch");
  if (!sites.allFinite() || !values.allFinite() || !gradients.allFinite()) {
    throw Error("hermite data contains non-finite entries");
  }
  // Cell-centred sites are well separated; a quadratic scan is fine at these sizes.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((sites.col(i) - sites.col(j)).norm() <= kDuplicateSiteDistance) {
        throw Error(fmt::format("duplicate hermite sites {} and {}", i, j));
      }
    }
  }
}

void HRBFConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error("multiquadric parameter c must be positive");
  if (poly_degree != 0 && poly_degree != 1) throw Error("poly_degree must be 0 or 1");
}

Eigen::Vector3d monomials(const Vec2& p) { return Eigen::Vector3d(1.0, p.x(), p.y()); }

Eigen::Matrix<double, 2, 3> monomial_gradients() {
  Eigen::Matrix<double, 2, 3> g;
  g << 0.0, 1.0, 0.0,
       0.0, 0.0, 1.0;
  return g;
}

LinearSystem assemble_system(const HermiteData& data, const HRBFConfig& cfg) {
  data.validate();
  cfg.validate();
  const Eigen::Index n = data.size();
  const Eigen::Index terms = cfg.poly_terms();
  const Eigen::Index size = 3 * n + terms;
  const Eigen::Index poly = 3 * n;

  LinearSystem sys;
  sys.matrix = Eigen::MatrixXd::Zero(size, size);
  auto& m = sys.matrix;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto k = mq_kernel<double>(data.sites.col(i) - data.sites.col(j), cfg.c);
      m(i, j) = k.value;
      // B: derivative rows of site i against value column j, and its transpose.
      m.block<2, 1>(n + 2 * i, j) = k.gradient;
      m.block<1, 2>(j, n + 2 * i) = k.gradient.transpose();
      m.block<2, 2>(n + 2 * i, n + 2 * j) = -k.hessian;
    }
    const Eigen::Vector3d p = monomials(data.sites.col(i));
    const Eigen::Matrix<double, 2, 3> dp = monomial_gradients();
    m.block(i, poly, 1, terms) = p.head(terms).transpose();
    m.block(poly, i, terms, 1) = p.head(terms);
    m.block(n + 2 * i, poly, 2, terms) = dp.leftCols(terms);
    m.block(poly, n + 2 * i, terms, 2) = dp.leftCols(terms).transpose();
  }

  sys.rhs = Eigen::VectorXd::Zero(size);
  sys.rhs.head(n) = data.values;
  sys.rhs.segment(n, 2 * n) = data.gradients.reshaped();
  return sys;
}

HRBFModel solve_hrbf(const HermiteData& data, const HRBFConfig& cfg) {
  const Eigen::Index unknowns = 3 * data.size() + cfg.poly_terms();
  if (unknowns > kMaxHrbfUnknowns) {
    throw Error(fmt::format("hermite system with {} unknowns exceeds the dense limit of {}",
                            unknowns, kMaxHrbfUnknowns));
  }
  const LinearSystem sys = assemble_system(data, cfg);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond)) throw Error("hermite system is singular");
  const double cond = 1.0 / rcond;
  if (cond > kConditionFail) {
    throw Error(fmt::format("hermite system is ill-conditioned (estimate {:.3e})", cond));
  }
  if (cond > kConditionWarn) {
    spdlog::warn("hermite system condition estimate {:.3e} is large", cond);
  }
  const Eigen::VectorXd x = lu.solve(sys.rhs);
  if (!x.allFinite()) throw Error("hermite solve produced non-finite coefficients");

  const Eigen::Index n = data.size();
  HRBFModel model;
  model.sites = data.sites;
  model.c = x.head(n);
  model.d = x.segment(n, 2 * n).reshaped(2, n);
  model.a = x.tail(cfg.poly_terms());
  model.config = cfg;
  model.condition_estimate = cond;
  return model;
}

double HRBFModel::evaluate(const Vec2& x) const {
  double s = monomials(x).head(a.size()).dot(a);
  for (Eigen::Index j = 0; j < sites.cols(); ++j) {
    const Vec2 r = x - sites.col(j);
    const double psi = std::sqrt(r.squaredNorm() + config.c * config.c);
    // grad psi(x_j - x) = -r / psi
    s += c[j] * psi - d.col(j).dot(r) / psi;
  }
  return s;
}

Vec2 HRBFModel::evaluate_gradient(const Vec2& x) const {
  Vec2 g = monomial_gradients().leftCols(a.size()) * a;
  for (Eigen::Index j = 0; j < sites.cols(); ++j) {
    const auto k = mq_kernel<double>(x - sites.col(j), config.c);
    g += c[j] * k.gradient - k.hessian * d.col(j);
  }
  return g;
}

Eigen::VectorXd HRBFModel::side_condition() const {
  const Eigen::Index terms = a.size();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(terms);
  const Eigen::Matrix<double, 2, 3> dp = monomial_gradients();
  for (Eigen::Index j = 0; j < sites.cols(); ++j) {
    r += c[j] * monomials(sites.col(j)).head(terms) + dp.leftCols(terms).transpose() * d.col(j);
  }
  return r;
}

HermiteData slopes_to_hermite(const SlopeGrid& grid) {
  const int n = grid.slope_count();
  if (n == 0) throw Error("no slopes to interpolate");
  HermiteData data;
  data.sites.resize(2, n);
  data.values.resize(n);
  data.gradients.resize(2, n);
  int k = 0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const auto& s = grid.at(i, j);
      if (!s) continue;
      data.sites.col(k) = s->centroid.head<2>();
      data.values[k] = s->centroid.z();
      data.gradients.col(k) = s->gradient();
      ++k;
    }
  }
  return data;
}

SlopeGrid fill_holes_hrbf(const SlopeGrid& grid, const HRBFConfig& cfg, HRBFModel* model_out) {
  if (grid.hole_count() == 0) return grid;
  HRBFModel model = solve_hrbf(slopes_to_hermite(grid), cfg);
  SlopeGrid out = grid;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (!grid.is_hole(i, j)) continue;
      const Vec2 c = grid.cell_center(i, j);
      out.at(i, j) = Slope::from_gradient(Vec3(c.x(), c.y(), model.evaluate(c)),
                                          model.evaluate_gradient(c));
    }
  }
  if (model_out) *model_out = std::move(model);
  return out;
}

}  // namespace groundsurf
