#include "bilevel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bilevel/errors.hpp"

namespace bilevel {

double NoiseSpec::scale() const { return sigma / std::sqrt(static_cast<double>(batch)); }

void NoiseSpec::validate() const {
  if (batch < 1) throw InvalidArgument("noise batch must be >= 1, got " + std::to_string(batch));
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("noise sigma must be finite and >= 0");
}

OracleStreams OracleStreams::for_objective(std::uint64_t seed, std::size_t objective) {
  return OracleStreams{
      RngStream(seed, stream_id(StreamKind::upper_grad_x, objective)),
      RngStream(seed, stream_id(StreamKind::upper_grad_y, objective)),
      RngStream(seed, stream_id(StreamKind::lower_grad_y, objective)),
      RngStream(seed, stream_id(StreamKind::lower_hvp, objective)),
      RngStream(seed, stream_id(StreamKind::lower_jvp, objective)),
      RngStream(seed, stream_id(StreamKind::upper_value, objective)),
  };
}

ReferencePoint BilevelOracle::reference(const Vector& x) const {
  if (!exact_available()) throw UnsupportedOperation("reference solution needs exact oracles");
  constexpr double kGradTol = 1e-10;
  constexpr int kMaxIter = 100;

  Vector y = Vector::Zero(dim_y());
  Vector grad = lower_grad_y(x, y);
  for (int it = 0; it < kMaxIter && grad.norm() > kGradTol; ++it) {
    const Vector step = lower_hessian(x, y).ldlt().solve(grad);
    // Armijo backtracking, skipped once the Newton decrement is below rounding level of g.
    const double g0 = lower_value(x, y);
    const double slope = grad.dot(step);
    double t = 1.0;
    Vector trial = y - step;
    const bool damped = slope > 1e-10 * std::max(1.0, std::abs(g0));
    for (int ls = 0; damped && ls < 40 && lower_value(x, trial) > g0 - 1e-4 * t * slope; ++ls) {
      t *= 0.5;
      trial = y - t * step;
    }
    y = std::move(trial);
    grad = lower_grad_y(x, y);
  }
  if (!(grad.norm() <= 1e-6)) {
    throw InvariantError("inner Newton solve did not converge (gradient norm " +
                         std::to_string(grad.norm()) + ")");
  }

  ReferencePoint ref;
  ref.z_star = lower_hessian(x, y).ldlt().solve(upper_grad_y(x, y));
  ref.hypergrad = upper_grad_x(x, y) - lower_cross_jvp(x, y, ref.z_star);
  ref.phi = upper_value(x, y);
  ref.y_star = std::move(y);
  return ref;
}

OracleBundle BilevelOracle::sample_bundle(const Vector& x, const Vector& y,
                                          const NoiseSpec& noise,
                                          OracleStreams& streams) const {
  const Index dx = dim_x();
  const Index dy = dim_y();
  OracleBundle b;
  b.u_x = upper_grad_x(x, y);
  b.u_y = upper_grad_y(x, y);
  b.v = lower_grad_y(x, y);

  const double s = noise.scale();
  if (s == 0.0) {
    b.hvp = [this, x, y](const Vector& z) { return lower_hvp(x, y, z); };
    b.jvp = [this, x, y](const Vector& z) { return lower_cross_jvp(x, y, z); };
    return b;
  }

  Matrix hvp_noise;
  Matrix jvp_noise;
  if (noise.mode == SamplingMode::independent) {
    b.u_x += s * streams.upper_grad_x.normal_vector(dx);
    b.u_y += s * streams.upper_grad_y.normal_vector(dy);
    b.v += s * streams.lower_grad_y.normal_vector(dy);
    const Matrix g = streams.lower_hvp.normal_matrix(dy, dy);
    hvp_noise = (s / std::sqrt(2.0)) * (g + g.transpose());
    jvp_noise = s * streams.lower_jvp.normal_matrix(dx, dy);
  } else {
    const Index m = std::max(dx, dy);
    const Vector common = streams.upper_grad_x.normal_vector(m);
    const Matrix common_mat = streams.upper_grad_x.normal_matrix(dy, m);
    b.u_x += s * common.head(dx);
    b.u_y += s * common.head(dy);
    b.v += s * common.head(dy);
    const Matrix g = common_mat.leftCols(dy);
    hvp_noise = (s / std::sqrt(2.0)) * (g + g.transpose());
    jvp_noise = s * common_mat.leftCols(dx).transpose();
  }
  b.hvp = [this, x, y, e = std::move(hvp_noise)](const Vector& z) -> Vector {
    return lower_hvp(x, y, z) + e * z;
  };
  b.jvp = [this, x, y, e = std::move(jvp_noise)](const Vector& z) -> Vector {
    return lower_cross_jvp(x, y, z) + e * z;
  };
  return b;
}

double BilevelOracle::sample_upper_value(const Vector& x, const Vector& y, const NoiseSpec& noise,
                                         RngStream& stream) const {
  const double s = noise.scale();
  const double f = upper_value(x, y);
  return s == 0.0 ? f : f + s * stream.normal();
}

namespace {

OracleBundle checked(OracleBundle b, Index dy) {
  b.hvp = [f = std::move(b.hvp), dy](const Vector& z) {
    require_dim(z, dy, "hvp z");
    return f(z);
  };
  b.jvp = [f = std::move(b.jvp), dy](const Vector& z) {
    require_dim(z, dy, "jvp z");
    return f(z);
  };
  return b;
}

}  // namespace

OracleBundle draw_bundle(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                         const NoiseSpec& noise, OracleStreams& streams) {
  require_dim(x, oracle.dim_x(), "draw_bundle x");
  require_dim(y, oracle.dim_y(), "draw_bundle y");
  noise.validate();
  return checked(oracle.sample_bundle(x, y, noise, streams), oracle.dim_y());
}

OracleBundle exact_eval(const BilevelOracle& oracle, const Vector& x, const Vector& y) {
  if (!oracle.exact_available())
    throw UnsupportedOperation("exact_eval: oracle is defined only through sampling");
  require_dim(x, oracle.dim_x(), "exact_eval x");
  require_dim(y, oracle.dim_y(), "exact_eval y");
  OracleBundle b;
  b.u_x = oracle.upper_grad_x(x, y);
  b.u_y = oracle.upper_grad_y(x, y);
  b.v = oracle.lower_grad_y(x, y);
  const BilevelOracle* o = &oracle;
  b.hvp = [o, x, y](const Vector& z) { return o->lower_hvp(x, y, z); };
  b.jvp = [o, x, y](const Vector& z) { return o->lower_cross_jvp(x, y, z); };
  return checked(std::move(b), oracle.dim_y());
}

}  // namespace bilevel
