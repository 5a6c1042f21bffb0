#include "llbtoc/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llbtoc/error.hpp"

namespace llbtoc {

ControlTrajectory::ControlTrajectory(std::vector<double> times, std::vector<VectorField> frames)
    : times_(std::move(times)), frames_(std::move(frames)) {
  require(times_.size() >= 2, ErrorKind::invalid_argument, "control needs at least two time nodes");
  require(frames_.size() == times_.size(), ErrorKind::invalid_argument,
          "control has " + std::to_string(frames_.size()) + " frames for " + std::to_string(times_.size()) +
              " time nodes");
  require(times_.front() == 0.0, ErrorKind::invalid_argument, "control time nodes must start at 0");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    require(times_[k] > times_[k - 1], ErrorKind::invalid_argument, "control time nodes must increase strictly");
  }
  for (const auto& f : frames_) {
    require(f.grid() == frames_.front().grid(), ErrorKind::grid_mismatch, "control frames on different grids");
    require(f.all_finite(), ErrorKind::invalid_argument, "control frame contains non-finite values");
  }
}

ControlTrajectory ControlTrajectory::zeros(const Grid& grid, std::vector<double> times) {
  std::vector<VectorField> frames(times.size(), VectorField(grid));
  return ControlTrajectory(std::move(times), std::move(frames));
}

ControlTrajectory ControlTrajectory::constant(const Grid& grid, double horizon, int intervals, Vec3 c) {
  require(horizon > 0.0 && intervals >= 1, ErrorKind::invalid_argument, "control horizon/intervals must be positive");
  std::vector<double> times(intervals + 1);
  for (int k = 0; k <= intervals; ++k) times[k] = horizon * k / intervals;
  times.back() = horizon;
  std::vector<VectorField> frames(times.size(), VectorField(grid, c));
  return ControlTrajectory(std::move(times), std::move(frames));
}

std::vector<std::pair<std::size_t, double>> ControlTrajectory::basis_weights(double t) const {
  if (t <= times_.front()) return {{0, 1.0}};
  if (t >= times_.back()) return {{times_.size() - 1, 1.0}};
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double theta = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return {{k, 1.0 - theta}, {k + 1, theta}};
}

VectorField ControlTrajectory::sample(double t) const {
  VectorField out(grid());
  for (const auto& [k, w] : basis_weights(t)) axpy(w, frames_[k], out);
  return out;
}

VectorField ControlTrajectory::slope(double t) const {
  std::size_t k = 0;
  if (t >= times_.back()) {
    k = times_.size() - 2;
  } else if (t > times_.front()) {
    k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
  }
  VectorField out = frames_[k + 1] - frames_[k];
  out *= 1.0 / (times_[k + 1] - times_[k]);
  return out;
}

std::vector<double> ControlTrajectory::trapezoid_weights() const {
  std::vector<double> w(times_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    const double ds = times_[i + 1] - times_[i];
    w[i] += 0.5 * ds;
    w[i + 1] += 0.5 * ds;
  }
  return w;
}

bool ControlTrajectory::same_nodes(const ControlTrajectory& o) const noexcept {
  return times_ == o.times_ && !frames_.empty() && !o.frames_.empty() && grid() == o.grid();
}

void require_same_nodes(const ControlTrajectory& a, const ControlTrajectory& b) {
  require(!a.frames().empty() && !b.frames().empty() && a.grid() == b.grid(), ErrorKind::grid_mismatch,
          "controls live on different grids");
  require(a.times() == b.times(), ErrorKind::invalid_argument, "controls have different time nodes");
}

ControlTrajectory& ControlTrajectory::operator+=(const ControlTrajectory& o) {
  require_same_nodes(*this, o);
  for (std::size_t k = 0; k < frames_.size(); ++k) frames_[k] += o.frames_[k];
  return *this;
}

ControlTrajectory& ControlTrajectory::operator-=(const ControlTrajectory& o) {
  require_same_nodes(*this, o);
  for (std::size_t k = 0; k < frames_.size(); ++k) frames_[k] -= o.frames_[k];
  return *this;
}

ControlTrajectory& ControlTrajectory::operator*=(double s) noexcept {
  for (auto& f : frames_) f *= s;
  return *this;
}

ControlTrajectory operator+(ControlTrajectory a, const ControlTrajectory& b) { return a += b; }
ControlTrajectory operator-(ControlTrajectory a, const ControlTrajectory& b) { return a -= b; }
ControlTrajectory operator*(double s, ControlTrajectory a) { return a *= s; }

void axpy(double alpha, const ControlTrajectory& x, ControlTrajectory& y) {
  require_same_nodes(x, y);
  for (std::size_t k = 0; k < y.frames().size(); ++k) axpy(alpha, x.frames()[k], y.frames()[k]);
}

double frame_inner(const ControlTrajectory& u, const ControlTrajectory& v) {
  require_same_nodes(u, v);
  double sum = 0.0;
  for (std::size_t k = 0; k < u.node_count(); ++k) sum += l2_inner(u.frames()[k], v.frames()[k]);
  return sum;
}

double inner_U(const ControlTrajectory& u, const ControlTrajectory& v, const SobolevMetric& metric) {
  require_same_nodes(u, v);
  const auto w = u.trapezoid_weights();
  const auto& t = u.times();
  double sum = 0.0;
  for (std::size_t k = 0; k < u.node_count(); ++k) sum += w[k] * metric.h1_inner(u.frames()[k], v.frames()[k]);
  for (std::size_t i = 0; i + 1 < u.node_count(); ++i) {
    const double ds = t[i + 1] - t[i];
    const VectorField du = u.frames()[i + 1] - u.frames()[i];
    const VectorField dv = v.frames()[i + 1] - v.frames()[i];
    if (linf_norm(du) == 0.0 || linf_norm(dv) == 0.0) continue;
    sum += l2_inner(du, metric.solve(dv)) / ds;
  }
  return sum;
}

double norm_U(const ControlTrajectory& u, const SobolevMetric& metric) {
  return std::sqrt(std::max(0.0, inner_U(u, u, metric)));
}

ControlTrajectory apply_gram(const ControlTrajectory& v, const SobolevMetric& metric) {
  const auto w = v.trapezoid_weights();
  const auto& t = v.times();
  const std::size_t n = v.node_count();
  ControlTrajectory out = ControlTrajectory::zeros(v.grid(), t);
  for (std::size_t k = 0; k < n; ++k) out.frames()[k] = w[k] * metric.apply(v.frames()[k]);
  // L_t v, then one Riesz solve per node.
  std::vector<VectorField> lt(n, VectorField(v.grid()));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    VectorField d = v.frames()[i + 1] - v.frames()[i];
    d *= 1.0 / (t[i + 1] - t[i]);
    lt[i + 1] += d;
    lt[i] -= d;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (linf_norm(lt[k]) == 0.0) continue;
    out.frames()[k] += metric.solve(lt[k]);
  }
  return out;
}

namespace {

class GramPreconditioner {
 public:
  GramPreconditioner(const ControlTrajectory& shape, const SobolevMetric& metric)
      : spectrum_(metric.grid()), weights_(shape.trapezoid_weights()), times_(shape.times()) {}

  ControlTrajectory operator()(const ControlTrajectory& r) const {
    const std::size_t n = times_.size();
    std::vector<VectorField> coeffs;
    coeffs.reserve(n);
    for (const auto& f : r.frames()) coeffs.push_back(spectrum_.forward(f));
    const std::size_t cells = coeffs.front().size();
    std::vector<double> lower(n), diag(n), upper(n), rhs(n), cprime(n), dprime(n), x(n);
    for (std::size_t idx = 0; idx < cells; ++idx) {
      const double mu = 1.0 + spectrum_.eigenvalue(idx);
      for (std::size_t k = 0; k < n; ++k) {
        double d = mu * weights_[k];
        lower[k] = upper[k] = 0.0;
        if (k > 0) {
          const double c = 1.0 / (mu * (times_[k] - times_[k - 1]));
          d += c;
          lower[k] = -c;
        }
        if (k + 1 < n) {
          const double c = 1.0 / (mu * (times_[k + 1] - times_[k]));
          d += c;
          upper[k] = -c;
        }
        diag[k] = d;
      }
      for (int comp = 0; comp < 3; ++comp) {
        for (std::size_t k = 0; k < n; ++k) rhs[k] = component(coeffs[k][idx], comp);
        // Thomas algorithm; the matrix is symmetric and diagonally dominant.
        cprime[0] = upper[0] / diag[0];
        dprime[0] = rhs[0] / diag[0];
        for (std::size_t k = 1; k < n; ++k) {
          const double denom = diag[k] - lower[k] * cprime[k - 1];
          cprime[k] = upper[k] / denom;
          dprime[k] = (rhs[k] - lower[k] * dprime[k - 1]) / denom;
        }
        x[n - 1] = dprime[n - 1];
        for (std::size_t k = n - 1; k-- > 0;) x[k] = dprime[k] - cprime[k] * x[k + 1];
        for (std::size_t k = 0; k < n; ++k) component(coeffs[k][idx], comp) = x[k];
      }
    }
    std::vector<VectorField> frames;
    frames.reserve(n);
    for (const auto& c : coeffs) frames.push_back(spectrum_.inverse(c));
    return ControlTrajectory(times_, std::move(frames));
  }

 private:
  static double& component(Vec3& v, int c) { return c == 0 ? v.x : (c == 1 ? v.y : v.z); }
  static double component(const Vec3& v, int c) { return c == 0 ? v.x : (c == 1 ? v.y : v.z); }

  NeumannSpectrum spectrum_;
  std::vector<double> weights_;
  std::vector<double> times_;
};

}  // namespace

ControlTrajectory solve_gram(const ControlTrajectory& b, const SobolevMetric& metric, double rtol, CgStats* stats) {
  const GramPreconditioner precondition(b, metric);
  auto apply = [&](const ControlTrajectory& v) { return apply_gram(v, metric); };
  ControlTrajectory x;
  const int cap = static_cast<int>(10 * 3 * b.grid().size() * b.node_count());
  const CgStats s = conjugate_gradient(apply, b, x, frame_inner, precondition, rtol, cap);
  if (stats) *stats = s;
  return x;
}

}  // namespace llbtoc
