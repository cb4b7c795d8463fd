#include "conceptsig/generators.hpp"

#include <cmath>
#include <sstream>

#include "conceptsig/basis.hpp"
#include "conceptsig/error.hpp"
#include "conceptsig/rng.hpp"

namespace conceptsig {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Parameter t_i in [lo, hi): uniform draw or the i-th of n grid points.
double parameter(Rng& rng, Sampling mode, int i, int n, double lo, double hi, bool closed = false) {
  if (mode == Sampling::kUniform) return rng.uniform(lo, hi);
  if (closed) return n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return lo + (hi - lo) * i / n;
}

// Point i of a box [lo, hi]^k: uniform, or lexicographic grid of side ceil(n^(1/k)).
Eigen::VectorXd box_point(Rng& rng, Sampling mode, int i, int n, int k, double lo, double hi) {
  Eigen::VectorXd z(k);
  if (mode == Sampling::kUniform) {
    for (int j = 0; j < k; ++j) z(j) = rng.uniform(lo, hi);
    return z;
  }
  int side = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 1.0 / k) - 1e-9));
  side = std::max(side, 1);
  int rest = i;
  for (int j = k - 1; j >= 0; --j) {
    const int idx = rest % side;
    rest /= side;
    z(j) = side == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx / (side - 1);
  }
  return z;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("manifold spec: " + what);
}

Eigen::MatrixXd sample_shape(const ManifoldSpec& spec, int n, std::uint64_t seed,
                             std::vector<std::string>& labels);

Eigen::MatrixXd sample_subspace(const SubspaceSpec& s, Sampling mode, int n, Rng& rng) {
  const int d = static_cast<int>(s.basis.rows());
  const int k = static_cast<int>(s.basis.cols());
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i)
    out.row(i) = (s.offset + s.basis * box_point(rng, mode, i, n, k, s.lo, s.hi)).transpose();
  return out;
}

Eigen::MatrixXd sample_circle(const CircleSpec& s, Sampling mode, int n, Rng& rng) {
  Eigen::MatrixXd out(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = parameter(rng, mode, i, n, s.theta_lo, s.theta_hi);
    out(i, 0) = s.center(0) + s.radius * std::cos(t);
    out(i, 1) = s.center(1) + s.radius * std::sin(t);
  }
  return out;
}

Eigen::MatrixXd sample_sphere(const SphereSpec& s, int n, Rng& rng) {
  const Eigen::Index d = s.center.size();
  const double min_cos = std::cos(s.cap_angle);
  Eigen::MatrixXd out(n, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u = rng.unit_vector(d);
    if (s.cap_angle < std::numbers::pi) {
      // Rejection keeps the draw uniform on the cap; flipping halves the cost.
      while (u(0) < min_cos) {
        if (-u(0) >= min_cos) {
          u = -u;
          break;
        }
        u = rng.unit_vector(d);
      }
    }
    out.row(i) = (s.center + s.radius * u).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_poly(const PolyGeneratorSpec& s, Sampling mode, int n, Rng& rng) {
  const MonomialBasis basis(s.k, s.r, true);
  Eigen::MatrixXd out(n, s.coefficients.rows());
  for (int i = 0; i < n; ++i)
    out.row(i) =
        (s.coefficients * basis.embed(box_point(rng, mode, i, n, s.k, s.lo, s.hi))).transpose();
  return out;
}

Eigen::MatrixXd sample_segment(const SegmentSpec& s, Sampling mode, int n, Rng& rng) {
  Eigen::MatrixXd out(n, s.a.size());
  for (int i = 0; i < n; ++i) {
    const double t = parameter(rng, mode, i, n, 0.0, 1.0, true);
    out.row(i) = ((1.0 - t) * s.a + t * s.b).transpose();
  }
  return out;
}

Eigen::VectorXd trajectory_position(const TrajectorySpec& s, double t) {
  Eigen::VectorXd p = s.start;
  double power = t;
  for (std::size_t j = 0; j < s.velocity.size(); ++j) {
    p += s.velocity[j] * (power / static_cast<double>(j + 1));
    power *= t;
  }
  return p;
}

Eigen::MatrixXd sample_trajectory(const TrajectorySpec& s, Sampling mode, int n, Rng& rng) {
  const Eigen::Index d = s.start.size();
  Eigen::MatrixXd out(n, d + (s.append_one ? 1 : 0));
  for (int i = 0; i < n; ++i) {
    const double t = parameter(rng, mode, i, n, s.t0, s.t1, true);
    out.row(i).head(d) = trajectory_position(s, t).transpose();
    if (s.append_one) out(i, d) = 1.0;
  }
  return out;
}

Eigen::MatrixXd sample_union(const UnionSpec& s, int n, std::uint64_t seed,
                             std::vector<std::string>& labels) {
  const int parts = static_cast<int>(s.parts.size());
  const int d = s.parts.front().dim();
  Eigen::MatrixXd out(n, d);
  int row = 0;
  for (int p = 0; p < parts; ++p) {
    const int count = n / parts + (p < n % parts ? 1 : 0);
    if (count == 0) continue;
    const PointCloud cloud = sample(s.parts[p], count, derive_seed(seed, 2 + p));
    out.middleRows(row, count) = cloud.points;
    const std::string fallback =
        s.parts[p].name.empty() ? "part" + std::to_string(p) : s.parts[p].name;
    for (int i = 0; i < count; ++i)
      labels.push_back(cloud.labels.empty() ? fallback : cloud.labels[i]);
    row += count;
  }
  return out;
}

Eigen::MatrixXd sample_transform(const TransformSpec& s, int n, std::uint64_t seed) {
  const PointCloud base = sample(*s.base, n, derive_seed(seed, 2));
  Rng rng(derive_seed(seed, 3));
  Eigen::VectorXd param(s.lo.size());
  for (Eigen::Index j = 0; j < param.size(); ++j) param(j) = rng.uniform(s.lo(j), s.hi(j));
  if (s.family == TransformFamily::kRotation) return rotate_cloud(base, param(0)).points;
  return translate_cloud(base, param(0), param(1)).points;
}

Eigen::MatrixXd sample_shape(const ManifoldSpec& spec, int n, std::uint64_t seed,
                             std::vector<std::string>& labels) {
  Rng rng(derive_seed(seed, 0));
  const Sampling mode = spec.sampling;
  return std::visit(
      Overloaded{
          [&](const SubspaceSpec& s) { return sample_subspace(s, mode, n, rng); },
          [&](const CircleSpec& s) { return sample_circle(s, mode, n, rng); },
          [&](const SphereSpec& s) { return sample_sphere(s, n, rng); },
          [&](const PolyGeneratorSpec& s) { return sample_poly(s, mode, n, rng); },
          [&](const SegmentSpec& s) { return sample_segment(s, mode, n, rng); },
          [&](const TrajectorySpec& s) { return sample_trajectory(s, mode, n, rng); },
          [&](const UnionSpec& s) { return sample_union(s, n, seed, labels); },
          [&](const TransformSpec& s) { return sample_transform(s, n, seed); },
      },
      spec.shape);
}

}  // namespace

int ManifoldSpec::dim() const {
  return std::visit(
      Overloaded{
          [](const SubspaceSpec& s) { return static_cast<int>(s.basis.rows()); },
          [](const CircleSpec&) { return 2; },
          [](const SphereSpec& s) { return static_cast<int>(s.center.size()); },
          [](const PolyGeneratorSpec& s) { return static_cast<int>(s.coefficients.rows()); },
          [](const SegmentSpec& s) { return static_cast<int>(s.a.size()); },
          [](const TrajectorySpec& s) {
            return static_cast<int>(s.start.size()) + (s.append_one ? 1 : 0);
          },
          [](const UnionSpec& s) { return s.parts.empty() ? 0 : s.parts.front().dim(); },
          [](const TransformSpec& s) { return s.base ? s.base->dim() : 0; },
      },
      shape);
}

void ManifoldSpec::validate() const {
  require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
  std::visit(
      Overloaded{
          [](const SubspaceSpec& s) {
            require(s.basis.rows() >= 1, "subspace needs a non-empty basis");
            require(s.offset.size() == s.basis.rows(), "subspace offset length must equal dim");
            require(s.lo < s.hi, "subspace coefficient box is empty");
          },
          [](const CircleSpec& s) {
            require(s.radius > 0.0, "circle radius must be > 0");
            require(s.theta_lo < s.theta_hi, "circle angle range is empty");
          },
          [](const SphereSpec& s) {
            require(s.center.size() >= 2, "sphere needs dimension >= 2");
            require(s.radius > 0.0, "sphere radius must be > 0");
            require(s.cap_angle > 0.0, "sphere cap angle must be > 0");
          },
          [](const PolyGeneratorSpec& s) {
            require(s.k >= 1 && s.r >= 1, "generator needs k >= 1 and r >= 1");
            require(s.coefficients.rows() >= 1, "generator coefficients are empty");
            require(s.coefficients.cols() ==
                        static_cast<Eigen::Index>(binomial(s.k + s.r, s.r)),
                    "generator coefficients need binomial(k + r, r) columns");
            require(s.lo < s.hi, "generator latent box is empty");
          },
          [](const SegmentSpec& s) {
            require(s.a.size() >= 1 && s.a.size() == s.b.size(), "segment endpoints mismatch");
            require((s.a - s.b).norm() > 0.0, "segment endpoints coincide");
          },
          [](const TrajectorySpec& s) {
            require(s.start.size() >= 1, "trajectory needs a start point");
            for (const auto& v : s.velocity)
              require(v.size() == s.start.size(), "trajectory velocity dimension mismatch");
            require(s.t0 < s.t1, "trajectory time range is empty");
          },
          [](const UnionSpec& s) {
            require(!s.parts.empty(), "union needs at least one part");
            for (const auto& p : s.parts) {
              p.validate();
              require(p.dim() == s.parts.front().dim(), "union parts differ in dimension");
            }
          },
          [](const TransformSpec& s) {
            require(s.base != nullptr, "transform needs a base");
            s.base->validate();
            require(s.base->dim() >= 2, "transform base must have >= 2 coordinates");
            const Eigen::Index want = s.family == TransformFamily::kRotation ? 1 : 2;
            require(s.lo.size() == want && s.hi.size() == want,
                    "transform parameter range has the wrong length");
            require((s.lo.array() <= s.hi.array()).all(), "transform parameter range is empty");
          },
      },
      shape);
}

PointCloud sample(const ManifoldSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw InputError("sample: n must be >= 1");
  spec.validate();
  std::vector<std::string> labels;
  Eigen::MatrixXd points = sample_shape(spec, n, seed, labels);
  if (spec.noise_sigma > 0.0) {
    Rng noise(derive_seed(seed, 1));
    Eigen::Index cols = points.cols();
    if (const auto* t = std::get_if<TrajectorySpec>(&spec.shape); t && t->append_one) --cols;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      for (Eigen::Index j = 0; j < cols; ++j) points(i, j) += spec.noise_sigma * noise.normal();
  }
  if (labels.empty() && !spec.name.empty()) labels.assign(n, spec.name);
  return PointCloud(std::move(points), std::move(labels));
}

ManifoldSpec rectangle(const Eigen::Vector2d& center, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw InputError("rectangle: sides must be > 0");
  const double hw = 0.5 * width;
  const double hh = 0.5 * height;
  const Eigen::Vector2d c00 = center + Eigen::Vector2d(-hw, -hh);
  const Eigen::Vector2d c10 = center + Eigen::Vector2d(hw, -hh);
  const Eigen::Vector2d c11 = center + Eigen::Vector2d(hw, hh);
  const Eigen::Vector2d c01 = center + Eigen::Vector2d(-hw, hh);
  auto seg = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, std::string name) {
    ManifoldSpec s;
    s.shape = SegmentSpec{a, b};
    s.name = std::move(name);
    return s;
  };
  ManifoldSpec out;
  out.shape = UnionSpec{{seg(c00, c10, "bottom"), seg(c10, c11, "right"), seg(c11, c01, "top"),
                         seg(c01, c00, "left")}};
  out.name = "rectangle";
  return out;
}

ManifoldSpec stick_figure() {
  auto seg = [](double x0, double y0, double x1, double y1, std::string name) {
    ManifoldSpec s;
    s.shape = SegmentSpec{Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y1)};
    s.name = std::move(name);
    return s;
  };
  ManifoldSpec head;
  head.shape = CircleSpec{Eigen::Vector2d(0.0, 1.6), 0.25};
  head.name = "head";
  ManifoldSpec out;
  out.shape = UnionSpec{{head, seg(0.0, 1.35, 0.0, 0.6, "torso"),
                         seg(0.0, 1.2, -0.5, 0.8, "left_arm"), seg(0.0, 1.2, 0.5, 0.8, "right_arm"),
                         seg(0.0, 0.6, -0.35, 0.0, "left_leg"),
                         seg(0.0, 0.6, 0.35, 0.0, "right_leg")}};
  out.name = "stick_figure";
  return out;
}

std::vector<PointCloud> trajectory_cloud(const std::vector<Eigen::VectorXd>& starts,
                                         const std::vector<Eigen::VectorXd>& velocity,
                                         int t_samples, double t0, double t1) {
  const int degree = static_cast<int>(velocity.size()) - 1;
  if (t_samples < degree + 2) {
    std::ostringstream msg;
    msg << "trajectory_cloud: need at least " << degree + 2 << " time samples, got " << t_samples;
    throw InputError(msg.str());
  }
  std::vector<PointCloud> out;
  out.reserve(starts.size());
  for (const auto& p : starts) {
    ManifoldSpec spec;
    spec.shape = TrajectorySpec{p, velocity, t0, t1, true};
    spec.sampling = Sampling::kGrid;
    out.push_back(sample(spec, t_samples, 0));
  }
  return out;
}

PointCloud rotate_cloud(const PointCloud& base, double theta) {
  if (base.dim() < 2) throw InputError("rotate_cloud: need at least 2 coordinates");
  PointCloud out = base;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  out.points.col(0) = c * base.points.col(0) + s * base.points.col(1);
  out.points.col(1) = -s * base.points.col(0) + c * base.points.col(1);
  return out;
}

PointCloud translate_cloud(const PointCloud& base, double u, double v) {
  if (base.dim() < 2) throw InputError("translate_cloud: need at least 2 coordinates");
  PointCloud out = base;
  out.points.col(0).array() += u;
  out.points.col(1).array() += v;
  return out;
}

std::vector<PointCloud> transform_family(const PointCloud& base, TransformFamily family,
                                         const std::vector<Eigen::VectorXd>& params) {
  std::vector<PointCloud> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    if (family == TransformFamily::kRotation) {
      if (p.size() != 1) throw InputError("transform_family: rotation takes one parameter");
      out.push_back(rotate_cloud(base, p(0)));
    } else {
      if (p.size() != 2) throw InputError("transform_family: translation takes two parameters");
      out.push_back(translate_cloud(base, p(0), p(1)));
    }
  }
  return out;
}

}  // namespace conceptsig
