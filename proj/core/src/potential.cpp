#include "qtps/potential.hpp"

#include "qtps/error.hpp"

#include <array>
#include <cmath>
#include <utility>

namespace qtps {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct MuellerBrownTable {
  std::array<double, 4> A{-200.0, -100.0, -170.0, 15.0};
  std::array<double, 4> a{-1.0, -1.0, -6.5, 0.7};
  std::array<double, 4> b{0.0, 0.0, 11.0, 0.6};
  std::array<double, 4> c{-10.0, -10.0, -6.5, 0.7};
  std::array<double, 4> x0{1.0, 0.0, -0.5, -1.0};
  std::array<double, 4> y0{0.0, 0.5, 1.5, 1.0};
};
constexpr MuellerBrownTable kMB{};

int dimension_of(const Potential::Kind& kind) {
  return std::visit(
      Overloaded{
          [](const DoubleWell&) { return 2; },
          [](const MuellerBrown&) { return 2; },
          [](const Harmonic& h) { return static_cast<int>(h.stiffness.size()); },
          [](const Polynomial& p) { return p.dimension; },
          [](const UserDefined& u) { return u.dimension; },
      },
      kind);
}

void check_dimension(const Point& q, int d) {
  if (q.size() != d) {
    throw PreconditionError("configuration has dimension " + std::to_string(q.size()) +
                            ", potential expects " + std::to_string(d));
  }
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Potential::Potential(Kind kind) : kind_(std::move(kind)), dimension_(dimension_of(kind_)) {
  if (dimension_ < 1) throw ConfigError("potential dimension must be positive");
  if (const auto* h = std::get_if<Harmonic>(&kind_)) {
    if (h->center.size() != h->stiffness.size()) {
      throw ConfigError("harmonic center and stiffness sizes differ");
    }
  }
  if (const auto* p = std::get_if<Polynomial>(&kind_)) {
    for (const auto& t : p->terms) {
      if (static_cast<int>(t.powers.size()) != p->dimension) {
        throw ConfigError("polynomial term has " + std::to_string(t.powers.size()) +
                          " exponents, expected " + std::to_string(p->dimension));
      }
      for (int e : t.powers) {
        if (e < 0) throw ConfigError("polynomial exponents must be non-negative");
      }
    }
  }
  if (const auto* u = std::get_if<UserDefined>(&kind_)) {
    if (!u->energy || !u->gradient) {
      throw ConfigError("user-defined potential needs energy and gradient callables");
    }
  }
}

Potential Potential::double_well(double y_stiffness) { return Potential(DoubleWell{y_stiffness}); }

Potential Potential::mueller_brown(double scale) { return Potential(MuellerBrown{scale}); }

Potential Potential::harmonic(Eigen::VectorXd stiffness) {
  Eigen::VectorXd center = Eigen::VectorXd::Zero(stiffness.size());
  return Potential(Harmonic{std::move(stiffness), std::move(center)});
}

Potential Potential::harmonic(Eigen::VectorXd stiffness, Eigen::VectorXd center) {
  return Potential(Harmonic{std::move(stiffness), std::move(center)});
}

Potential Potential::polynomial(int dimension, std::vector<PolynomialTerm> terms) {
  return Potential(Polynomial{dimension, std::move(terms)});
}

Potential Potential::constant(int dimension, double value) {
  return polynomial(dimension, {PolynomialTerm{value, std::vector<int>(dimension, 0)}});
}

std::string_view Potential::kind_name() const noexcept {
  return std::visit(Overloaded{
                        [](const DoubleWell&) { return std::string_view("double-well"); },
                        [](const MuellerBrown&) { return std::string_view("mueller-brown"); },
                        [](const Harmonic&) { return std::string_view("harmonic"); },
                        [](const Polynomial&) { return std::string_view("custom-polynomial"); },
                        [](const UserDefined&) { return std::string_view("user-defined"); },
                    },
                    kind_);
}

double Potential::energy(const Point& q) const {
  check_dimension(q, dimension_);
  return std::visit(
      Overloaded{
          [&](const DoubleWell& dw) {
            const double s = q[0] * q[0] - 1.0;
            return s * s + dw.y_stiffness * q[1] * q[1];
          },
          [&](const MuellerBrown& mb) {
            double u = 0.0;
            for (int k = 0; k < 4; ++k) {
              const double dx = q[0] - kMB.x0[k];
              const double dy = q[1] - kMB.y0[k];
              u += kMB.A[k] * std::exp(kMB.a[k] * dx * dx + kMB.b[k] * dx * dy + kMB.c[k] * dy * dy);
            }
            return mb.scale * u;
          },
          [&](const Harmonic& h) {
            const Eigen::VectorXd d = q - h.center;
            return 0.5 * (h.stiffness.array() * d.array().square()).sum();
          },
          [&](const Polynomial& p) {
            double u = 0.0;
            for (const auto& t : p.terms) {
              double m = t.coefficient;
              for (int i = 0; i < p.dimension; ++i) m *= ipow(q[i], t.powers[i]);
              u += m;
            }
            return u;
          },
          [&](const UserDefined& ud) { return ud.energy(q); },
      },
      kind_);
}

Point Potential::gradient(const Point& q) const {
  check_dimension(q, dimension_);
  return std::visit(
      Overloaded{
          [&](const DoubleWell& dw) {
            Point g(2);
            g[0] = 4.0 * q[0] * (q[0] * q[0] - 1.0);
            g[1] = 2.0 * dw.y_stiffness * q[1];
            return g;
          },
          [&](const MuellerBrown& mb) {
            Point g = Point::Zero(2);
            for (int k = 0; k < 4; ++k) {
              const double dx = q[0] - kMB.x0[k];
              const double dy = q[1] - kMB.y0[k];
              const double e =
                  kMB.A[k] * std::exp(kMB.a[k] * dx * dx + kMB.b[k] * dx * dy + kMB.c[k] * dy * dy);
              g[0] += e * (2.0 * kMB.a[k] * dx + kMB.b[k] * dy);
              g[1] += e * (kMB.b[k] * dx + 2.0 * kMB.c[k] * dy);
            }
            return Point(mb.scale * g);
          },
          [&](const Harmonic& h) {
            return Point(h.stiffness.array() * (q - h.center).array());
          },
          [&](const Polynomial& p) {
            Point g = Point::Zero(p.dimension);
            for (const auto& t : p.terms) {
              for (int j = 0; j < p.dimension; ++j) {
                if (t.powers[j] == 0) continue;
                double m = t.coefficient * t.powers[j];
                for (int i = 0; i < p.dimension; ++i) {
                  m *= ipow(q[i], i == j ? t.powers[i] - 1 : t.powers[i]);
                }
                g[j] += m;
              }
            }
            return g;
          },
          [&](const UserDefined& ud) { return ud.gradient(q); },
      },
      kind_);
}

bool Potential::has_laplacian() const noexcept {
  if (const auto* u = std::get_if<UserDefined>(&kind_)) return static_cast<bool>(u->laplacian);
  return true;
}

double Potential::laplacian(const Point& q) const {
  check_dimension(q, dimension_);
  return std::visit(
      Overloaded{
          [&](const DoubleWell& dw) { return 12.0 * q[0] * q[0] - 4.0 + 2.0 * dw.y_stiffness; },
          [&](const MuellerBrown& mb) {
            double l = 0.0;
            for (int k = 0; k < 4; ++k) {
              const double dx = q[0] - kMB.x0[k];
              const double dy = q[1] - kMB.y0[k];
              const double e =
                  kMB.A[k] * std::exp(kMB.a[k] * dx * dx + kMB.b[k] * dx * dy + kMB.c[k] * dy * dy);
              const double fx = 2.0 * kMB.a[k] * dx + kMB.b[k] * dy;
              const double fy = kMB.b[k] * dx + 2.0 * kMB.c[k] * dy;
              l += e * (fx * fx + 2.0 * kMB.a[k] + fy * fy + 2.0 * kMB.c[k]);
            }
            return mb.scale * l;
          },
          [&](const Harmonic& h) { return h.stiffness.sum(); },
          [&](const Polynomial& p) {
            double l = 0.0;
            for (const auto& t : p.terms) {
              for (int j = 0; j < p.dimension; ++j) {
                if (t.powers[j] < 2) continue;
                double m = t.coefficient * t.powers[j] * (t.powers[j] - 1);
                for (int i = 0; i < p.dimension; ++i) {
                  m *= ipow(q[i], i == j ? t.powers[i] - 2 : t.powers[i]);
                }
                l += m;
              }
            }
            return l;
          },
          [&](const UserDefined& ud) {
            if (!ud.laplacian) {
              throw CapabilityError("potential kind 'user-defined' provides no Laplacian");
            }
            return ud.laplacian(q);
          },
      },
      kind_);
}

}  // namespace qtps
