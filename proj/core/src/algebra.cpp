#include "conceptsig/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "conceptsig/error.hpp"

namespace conceptsig {

void require_same_space(const Signature& a, const Signature& b, const char* op) {
  if (!(a.basis == b.basis) || a.projection != b.projection) {
    std::ostringstream msg;
    msg << op << ": basis mismatch (dim " << a.basis.dim() << "/deg " << a.basis.max_degree()
        << " vs dim " << b.basis.dim() << "/deg " << b.basis.max_degree() << ")";
    throw InputError(msg.str());
  }
}

Eigen::MatrixXd complement(const Signature& sig) {
  const Eigen::Index m = sig.feature_dim();
  return Eigen::MatrixXd::Identity(m, m) - sig.null_projector;
}

Similarity similarity(const Signature& a, const Signature& b) {
  require_same_space(a, b, "similarity");
  const Eigen::MatrixXd fa = complement(a);
  const Eigen::MatrixXd fb = complement(b);
  return {a.null_projector.cwiseProduct(b.null_projector).sum(), fa.cwiseProduct(fb).sum()};
}

double coefficient_similarity(const Signature& a, const Signature& b) {
  require_same_space(a, b, "coefficient_similarity");
  const double dot = unit_null_vector(a).dot(unit_null_vector(b));
  return dot * dot;
}

Intersection intersect(const Signature& a, const Signature& b, const IntersectOptions& opts) {
  require_same_space(a, b, "intersect");
  const Eigen::Index m = a.feature_dim();
  const Eigen::MatrixXd fa = complement(a);
  const Eigen::MatrixXd fb = complement(b);

  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m);
  double residual = 0.0;
  int iter = 0;
  bool converged = false;
  while (iter < opts.max_iter) {
    Eigen::MatrixXd next = fa * p * fa;
    next = fb * next * fb;
    next = 0.5 * (next + next.transpose());
    residual = (next - p).norm();
    p = std::move(next);
    ++iter;
    if (residual <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "intersect: alternating projections did not converge after " << opts.max_iter
        << " iterations (residual " << residual << ")";
    throw NumericError(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p);
  if (solver.info() != Eigen::Success) throw NumericError("intersect: eigendecomposition failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  Eigen::MatrixXd f_cap = Eigen::MatrixXd::Zero(m, m);
  bool ill = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lambda(i) > 0.2 && lambda(i) < 0.8) ill = true;
    if (lambda(i) > 0.5) f_cap.noalias() += solver.eigenvectors().col(i) * solver.eigenvectors().col(i).transpose();
  }

  Signature sig = signature_from_moment(a.basis, f_cap, a.epsilon, a.projection);
  return Intersection{std::move(sig), iter, residual, ill};
}

bool subset_check(const Signature& outer, const Signature& inner, double tol) {
  require_same_space(outer, inner, "subset_check");
  const Eigen::MatrixXd fo = complement(outer);
  const Eigen::MatrixXd fi = complement(inner);
  return (fo * fi - fi).norm() <= tol;
}

namespace {

struct Concept {
  Signature sig;
  Eigen::MatrixXd f;
  bool input = false;
  std::vector<std::pair<std::size_t, std::size_t>> parents;
};

int projector_rank(const Eigen::MatrixXd& f) {
  return static_cast<int>(std::lround(f.trace()));
}

std::ptrdiff_t find_duplicate(const std::vector<Concept>& set, const Eigen::MatrixXd& f,
                              double threshold) {
  for (std::size_t i = 0; i < set.size(); ++i)
    if ((set[i].f - f).norm() <= threshold) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

}  // namespace

DictionaryResult discover_dictionary(const std::vector<Signature>& sigs,
                                     const DictionaryOptions& opts) {
  DictionaryResult result;
  if (sigs.empty()) return result;
  for (std::size_t i = 1; i < sigs.size(); ++i) require_same_space(sigs[0], sigs[i], "dictionary");

  std::vector<Concept> set;
  std::vector<std::size_t> input_slot(sigs.size());
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    Eigen::MatrixXd f = complement(sigs[i]);
    const auto dup = find_duplicate(set, f, opts.dedup_threshold);
    if (dup >= 0) {
      input_slot[i] = static_cast<std::size_t>(dup);
      continue;
    }
    input_slot[i] = set.size();
    set.push_back(Concept{sigs[i], std::move(f), true, {}});
  }

  // Closure under pairwise intersection, breadth first.
  std::deque<std::pair<std::size_t, std::size_t>> queue;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j) queue.emplace_back(i, j);

  bool capped = false;
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    std::optional<Intersection> cap;
    try {
      cap = intersect(set[i].sig, set[j].sig, opts.intersect);
    } catch (const NumericError& e) {
      if (set[i].input && set[j].input) {
        std::size_t a = 0, b = 0;
        for (std::size_t k = 0; k < sigs.size(); ++k) {
          if (input_slot[k] == i) a = k;
          if (input_slot[k] == j) b = k;
        }
        result.skipped.emplace_back(a, b);
      }
      result.warnings.emplace_back(e.what());
      continue;
    }
    if (cap->ill_separated)
      result.warnings.emplace_back("ill-separated intersection eigenvalues");
    Eigen::MatrixXd f = complement(cap->signature);
    if (projector_rank(f) == 0) continue;
    const auto dup = find_duplicate(set, f, opts.dedup_threshold);
    if (dup >= 0) {
      set[static_cast<std::size_t>(dup)].parents.emplace_back(i, j);
      continue;
    }
    if (set.size() >= opts.max_concepts) {
      capped = true;
      continue;
    }
    const std::size_t k = set.size();
    set.push_back(Concept{std::move(cap->signature), std::move(f), false, {{i, j}}});
    for (std::size_t other = 0; other < k; ++other) queue.emplace_back(other, k);
  }
  if (capped)
    result.warnings.emplace_back("dictionary closure truncated at max_concepts");
  result.closure_size = set.size();

  const std::size_t n = set.size();
  // contained[a][b]: concept a lies inside concept b.
  std::vector<std::vector<bool>> contained(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b) contained[a][b] = (set[b].f * set[a].f - set[a].f).norm() <= opts.subset_tol;

  std::vector<bool> alive(n, true);
  auto minimal = [&](std::size_t x, std::size_t ignore) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != x && j != ignore && alive[j] && contained[j][x]) return false;
    return true;
  };

  // Distinct atoms are disjoint in the union model, so a concept that only
  // arises as the meet of two minimal concepts is empty. Meets of two input
  // concepts are always kept.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < n && !changed; ++r) {
      if (!alive[r] || set[r].input || !minimal(r, n)) continue;
      const bool from_inputs = std::any_of(set[r].parents.begin(), set[r].parents.end(),
                                           [&](const auto& pq) {
                                             return set[pq.first].input && set[pq.second].input;
                                           });
      if (from_inputs) continue;
      for (const auto& [x, y] : set[r].parents) {
        if (x == r || y == r || !alive[x] || !alive[y]) continue;
        if (minimal(x, r) && minimal(y, r)) {
          alive[r] = false;
          changed = true;
          break;
        }
      }
    }
  }

  for (std::size_t r = 0; r < n; ++r)
    if (alive[r] && minimal(r, n)) result.atoms.push_back(set[r].sig);
  return result;
}

}  // namespace conceptsig
