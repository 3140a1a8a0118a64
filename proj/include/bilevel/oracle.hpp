#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "bilevel/linalg.hpp"
#include "bilevel/rng.hpp"

namespace bilevel {

enum class SamplingMode {
  /// Every estimate in a bundle consumes its own sub-stream; estimates are conditionally independent.
  independent,
  /// All five estimates reuse one common draw, as a shared minibatch would. Breaks independence.
  shared_minibatch,
};

/// Noise applied on top of the exact oracle: additive Gaussian of scale sigma / sqrt(batch)
/// on gradients and function values, symmetric Gaussian matrix perturbations on the
/// Hessian- and Jacobian-vector actions.
struct NoiseSpec {
  double sigma = 0.0;
  int batch = 1;
  SamplingMode mode = SamplingMode::independent;

  /// Standard deviation of one averaged estimate entry.
  double scale() const;
  void validate() const;
};

/// The per-objective random streams consumed by bundle and value draws.
struct OracleStreams {
  RngStream upper_grad_x;
  RngStream upper_grad_y;
  RngStream lower_grad_y;
  RngStream lower_hvp;
  RngStream lower_jvp;
  RngStream upper_value;

  static OracleStreams for_objective(std::uint64_t seed, std::size_t objective);
};

/// The five stochastic estimates used by one iteration. `hvp` and `jvp` are actions of the
/// sampled second-order matrices; they reference the oracle that produced them, which must
/// outlive the bundle.
struct OracleBundle {
  Vector u_x;  ///< estimate of grad_x f
  Vector u_y;  ///< estimate of grad_y f
  Vector v;    ///< estimate of grad_y g
  std::function<Vector(const Vector&)> hvp;  ///< z -> H z,   H ~ grad^2_yy g   (d_y -> d_y)
  std::function<Vector(const Vector&)> jvp;  ///< z -> J z,   J ~ grad^2_xy g   (d_y -> d_x)
};

/// Exact solution quantities at a given outer point.
struct ReferencePoint {
  Vector y_star;
  Vector z_star;
  Vector hypergrad;
  double phi = 0.0;
};

/// A bilevel problem  min_x f(x, y*(x))  s.t.  y*(x) = argmin_y g(x, y),  accessed through
/// first- and second-order information of f and g.
///
/// Derived classes supply the exact derivatives; the stochastic bundle is produced by adding
/// noise to them (see NoiseSpec). Oracles defined only through sampling override
/// `exact_available()` to return false and override `sample_bundle`.
class BilevelOracle {
 public:
  virtual ~BilevelOracle() = default;

  virtual Index dim_x() const = 0;
  virtual Index dim_y() const = 0;

  virtual bool exact_available() const { return true; }

  virtual double upper_value(const Vector& x, const Vector& y) const = 0;
  virtual double lower_value(const Vector& x, const Vector& y) const = 0;
  virtual Vector upper_grad_x(const Vector& x, const Vector& y) const = 0;
  virtual Vector upper_grad_y(const Vector& x, const Vector& y) const = 0;
  virtual Vector lower_grad_y(const Vector& x, const Vector& y) const = 0;
  /// grad^2_yy g(x, y) z
  virtual Vector lower_hvp(const Vector& x, const Vector& y, const Vector& z) const = 0;
  /// grad^2_xy g(x, y) z, a d_x vector
  virtual Vector lower_cross_jvp(const Vector& x, const Vector& y, const Vector& z) const = 0;
  /// Dense grad^2_yy g; only used by reference solves.
  virtual Matrix lower_hessian(const Vector& x, const Vector& y) const = 0;

  /// Exact y*, z*, hypergradient and value function at x. The default runs Newton on g
  /// (gradient tolerance 1e-10, at most 100 iterations) and a direct solve for z*.
  virtual ReferencePoint reference(const Vector& x) const;

  Vector y_star(const Vector& x) const { return reference(x).y_star; }
  Vector z_star(const Vector& x) const { return reference(x).z_star; }
  Vector hypergrad(const Vector& x) const { return reference(x).hypergrad; }
  double phi(const Vector& x) const { return reference(x).phi; }

  /// One stochastic bundle at (x, y). Consumes the streams; deterministic given their state.
  virtual OracleBundle sample_bundle(const Vector& x, const Vector& y, const NoiseSpec& noise,
                                     OracleStreams& streams) const;

  /// Stochastic estimate of f(x, y).
  virtual double sample_upper_value(const Vector& x, const Vector& y, const NoiseSpec& noise,
                                    RngStream& stream) const;
};

/// Draws one bundle at (x, y). Errors: dimension mismatch -> ContractViolation,
/// batch < 1 -> InvalidArgument.
OracleBundle draw_bundle(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                         const NoiseSpec& noise, OracleStreams& streams);

/// Noise-free bundle. Throws UnsupportedOperation for sampling-only oracles.
OracleBundle exact_eval(const BilevelOracle& oracle, const Vector& x, const Vector& y);

/// Number of estimate draws in one bundle.
inline constexpr long kEstimatesPerBundle = 5;

}  // namespace bilevel
