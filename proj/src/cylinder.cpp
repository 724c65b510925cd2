#include "hjflow/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hjflow/error.hpp"
#include "hjflow/laplace.hpp"
#include "hjflow/tataru.hpp"

namespace hjflow {

double Phi::value(std::span<const double> r) const {
  std::vector<double> g(arity());
  return evaluate(r, g);
}

std::vector<double> Phi::gradient(std::span<const double> r) const {
  std::vector<double> g(arity());
  evaluate(r, g);
  return g;
}

namespace {

void check_arity(const Phi& phi, std::span<const double> r,
                 std::span<const double> grad) {
  if (r.size() != phi.arity() || grad.size() != phi.arity())
    throw Error("argument count does not match phi");
}

class Affine final : public Phi {
 public:
  Affine(std::vector<double> c, double offset) : c_(std::move(c)), offset_(offset) {
    for (double v : c_)
      if (!(v > 0.0) || !std::isfinite(v)) throw Error("not in class T");
  }
  std::size_t arity() const override { return c_.size(); }
  double evaluate(std::span<const double> r, std::span<double> grad) const override {
    check_arity(*this, r, grad);
    double v = offset_;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      v += c_[i] * r[i];
      grad[i] = c_[i];
    }
    return v;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "affine(k=" << c_.size() << ")";
    return os.str();
  }

 private:
  std::vector<double> c_;
  double offset_;
};

class SoftMinPsi final : public Phi {
 public:
  SoftMinPsi(double b, int m, double eps, std::vector<double> s,
             std::vector<double> lw, double c)
      : b_(b), m_(m), eps_(eps), s_(std::move(s)), lw_(std::move(lw)), c_(c) {
    if (!(b_ > 0.0)) throw Error("not in class T");
    if (m_ < 1) throw Error("m must be >= 1");
    if (!(eps_ > 0.0)) throw Error("epsilon must be positive");
    if (s_.size() != lw_.size() || s_.empty())
      throw Error("soft-min needs matching scales and weights");
    for (double v : s_)
      if (!(v > 0.0)) throw Error("not in class T");
  }
  std::size_t arity() const override { return s_.size(); }
  double evaluate(std::span<const double> r, std::span<double> grad) const override {
    check_arity(*this, r, grad);
    const double m = double(m_);
    std::vector<double> e(s_.size());
    for (std::size_t i = 0; i < s_.size(); ++i)
      e[i] = lw_[i] - m * s_[i] * psi_eps(eps_, r[i]);
    const double lse = log_sum_exp(e);
    for (std::size_t i = 0; i < s_.size(); ++i)
      grad[i] = b_ * std::exp(e[i] - lse) * s_[i] * psi_eps_derivative(eps_, r[i]);
    return -b_ / m * lse + c_;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "soft_min_psi(k=" << s_.size() << ", m=" << m_ << ", eps=" << eps_ << ")";
    return os.str();
  }

 private:
  double b_;
  int m_;
  double eps_;
  std::vector<double> s_, lw_;
  double c_;
};

class Truncate final : public Phi {
 public:
  Truncate(PhiPtr inner, int n) : inner_(std::move(inner)), n_(n) {
    if (!inner_) throw Error("missing phi");
    if (n_ < 1) throw Error("truncation level must be >= 1");
  }
  std::size_t arity() const override { return inner_->arity(); }
  double evaluate(std::span<const double> r, std::span<double> grad) const override {
    const double v = inner_->evaluate(r, grad);
    const double d = iota_derivative(n_, v);
    for (double& g : grad) g *= d;
    return iota(n_, v);
  }
  bool bounded() const override { return true; }
  std::string describe() const override {
    return "iota_" + std::to_string(n_) + "(" + inner_->describe() + ")";
  }

 private:
  PhiPtr inner_;
  int n_;
};

class BlockSum final : public Phi {
 public:
  explicit BlockSum(std::vector<PhiPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw Error("block sum needs at least one part");
    for (const auto& p : parts_) {
      if (!p) throw Error("missing phi");
      arity_ += p->arity();
    }
  }
  std::size_t arity() const override { return arity_; }
  double evaluate(std::span<const double> r, std::span<double> grad) const override {
    check_arity(*this, r, grad);
    double v = 0.0;
    std::size_t off = 0;
    for (const auto& p : parts_) {
      const std::size_t k = p->arity();
      v += p->evaluate(r.subspan(off, k), grad.subspan(off, k));
      off += k;
    }
    return v;
  }
  bool bounded() const override {
    return std::all_of(parts_.begin(), parts_.end(),
                       [](const PhiPtr& p) { return p->bounded(); });
  }
  std::string describe() const override {
    std::string s = "sum(";
    for (std::size_t i = 0; i < parts_.size(); ++i)
      s += (i ? ", " : "") + parts_[i]->describe();
    return s + ")";
  }

 private:
  std::vector<PhiPtr> parts_;
  std::size_t arity_ = 0;
};

}  // namespace

PhiPtr affine(std::vector<double> coeffs, double offset) {
  return std::make_shared<Affine>(std::move(coeffs), offset);
}

PhiPtr soft_min_psi(double b, int m, double eps, std::vector<double> scales,
                    std::vector<double> log_weights, double c) {
  return std::make_shared<SoftMinPsi>(b, m, eps, std::move(scales),
                                      std::move(log_weights), c);
}

PhiPtr truncate(PhiPtr inner, int n) {
  return std::make_shared<Truncate>(std::move(inner), n);
}

PhiPtr block_sum(std::vector<PhiPtr> parts) {
  return std::make_shared<BlockSum>(std::move(parts));
}

// On [n, n + 2] the derivative blends from 1 to 0 by a cubic smoothstep,
// which makes iota twice continuously differentiable.
double iota(int n, double r) {
  const double nn = double(n);
  if (r <= nn) return r;
  if (r >= nn + 2.0) return nn + 1.0;
  const double u = 0.5 * (r - nn);
  return nn + 2.0 * (u - u * u * u + 0.5 * u * u * u * u);
}

double iota_derivative(int n, double r) {
  const double nn = double(n);
  if (r <= nn) return 1.0;
  if (r >= nn + 2.0) return 0.0;
  const double u = 0.5 * (r - nn);
  return 1.0 - 3.0 * u * u + 2.0 * u * u * u;
}

double partials_mismatch(const Phi& phi, std::span<const double> r, double h) {
  const std::vector<double> g = phi.gradient(r);
  std::vector<double> x(r.begin(), r.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double lo = std::max(0.0, xi - h), hi = xi + h;
    x[i] = hi;
    const double fp = phi.value(x);
    x[i] = lo;
    const double fm = phi.value(x);
    x[i] = xi;
    worst = std::max(worst, std::abs(g[i] - (fp - fm) / (hi - lo)));
  }
  return worst;
}

CylinderValue CylindricalTestFunction::evaluate(const ModelSpace& space,
                                                const SpacePoint& x) const {
  if (!phi) throw Error("missing phi");
  if (anchors.size() != phi->arity())
    throw Error("anchor count does not match phi");
  CylinderValue out;
  out.r.resize(anchors.size());
  out.dist.resize(anchors.size());
  out.partials.resize(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    out.dist[i] = space.distance(x, anchors[i]);
    out.r[i] = 0.5 * out.dist[i] * out.dist[i];
  }
  out.value = phi->evaluate(out.r, out.partials);
  const bool flat_ok = phi->bounded();
  for (double p : out.partials)
    if (!std::isfinite(p) || p < 0.0 || (p == 0.0 && !flat_ok))
      throw Error("not in class T");
  return out;
}

}  // namespace hjflow
