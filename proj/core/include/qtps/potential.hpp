#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qtps {

using Point = Eigen::VectorXd;

/// (x^2 - 1)^2 + a*y^2 in two dimensions; minima at (+-1, 0), saddle at the origin.
struct DoubleWell {
  double y_stiffness = 5.0;
};

/// Mueller-Brown surface with the standard four-Gaussian parameter table,
/// multiplied by `scale`.
struct MuellerBrown {
  double scale = 1.0;
};

/// 0.5 * sum_i k_i (x_i - c_i)^2.
struct Harmonic {
  Eigen::VectorXd stiffness;
  Eigen::VectorXd center;
};

struct PolynomialTerm {
  double coefficient = 0.0;
  std::vector<int> powers;  // one non-negative exponent per coordinate
};

/// Sum of monomials; gradient and Laplacian are derived term by term.
struct Polynomial {
  int dimension = 1;
  std::vector<PolynomialTerm> terms;
};

/// Programmatic potential. The Laplacian is optional.
struct UserDefined {
  int dimension = 1;
  std::function<double(const Point&)> energy;
  std::function<Point(const Point&)> gradient;
  std::function<double(const Point&)> laplacian;
};

/// Immutable energy landscape with analytic gradient and Laplacian.
class Potential {
 public:
  using Kind = std::variant<DoubleWell, MuellerBrown, Harmonic, Polynomial, UserDefined>;

  explicit Potential(Kind kind);

  static Potential double_well(double y_stiffness = 5.0);
  static Potential mueller_brown(double scale = 1.0);
  static Potential harmonic(Eigen::VectorXd stiffness);
  static Potential harmonic(Eigen::VectorXd stiffness, Eigen::VectorXd center);
  static Potential polynomial(int dimension, std::vector<PolynomialTerm> terms);
  /// U = value everywhere.
  static Potential constant(int dimension, double value = 0.0);

  [[nodiscard]] int dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::string_view kind_name() const noexcept;
  [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

  [[nodiscard]] double energy(const Point& q) const;
  [[nodiscard]] Point gradient(const Point& q) const;
  [[nodiscard]] bool has_laplacian() const noexcept;
  /// Throws PreconditionError when the kind carries no Laplacian.
  [[nodiscard]] double laplacian(const Point& q) const;

 private:
  Kind kind_;
  int dimension_;
};

}  // namespace qtps
