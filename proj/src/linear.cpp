#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>

#include "uwbdetect/estimators.hpp"
#include "uwbdetect/rng.hpp"

namespace uwbdetect::detail {

namespace {

using Objective = std::function<double(std::span<const double>, std::span<double>)>;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Softmax of `z` in place; returns log-sum-exp.
double softmax_in_place(std::span<double> z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : z) v /= total;
  return peak + std::log(total);
}

struct Layout {
  std::size_t k;
  std::size_t d;
  std::size_t size() const { return k * (d + 1); }
  std::size_t w(std::size_t c, std::size_t j) const { return c * d + j; }
  std::size_t b(std::size_t c) const { return k * d + c; }
};

void class_scores(const Layout& L, std::span<const double> theta, std::span<const double> x,
                  std::span<double> z) {
  for (std::size_t c = 0; c < L.k; ++c) {
    z[c] = theta[L.b(c)] + dot(theta.subspan(c * L.d, L.d), x);
  }
}

LinearModel unpack(const Layout& L, std::span<const double> theta) {
  LinearModel m{Matrix(L.k, L.d), std::vector<double>(L.k)};
  for (std::size_t c = 0; c < L.k; ++c) {
    for (std::size_t j = 0; j < L.d; ++j) m.weights(c, j) = theta[L.w(c, j)];
    m.bias[c] = theta[L.b(c)];
  }
  return m;
}

/// Backtracking Armijo search along `dir`; returns the accepted step or 0.
double armijo(const Objective& f, std::span<const double> x, double fx, std::span<const double> g,
              std::span<const double> dir, double step, std::vector<double>& x_new,
              std::vector<double>& g_new, double& f_new) {
  const double slope = dot(g, dir);
  if (!(slope < 0.0)) return 0.0;
  for (int tries = 0; tries < 60; ++tries) {
    for (std::size_t i = 0; i < x.size(); ++i) x_new[i] = x[i] + step * dir[i];
    f_new = f(x_new, g_new);
    if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) return step;
    step *= 0.5;
  }
  return 0.0;
}

std::vector<double> minimize_lbfgs(const Objective& f, std::vector<double> x, const SolverSettings& s) {
  const std::size_t n = x.size();
  std::vector<double> g(n), x_new(n), g_new(n), dir(n);
  double fx = f(x, g);
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;

  for (int iter = 0; iter < s.logistic_max_iterations; ++iter) {
    if (max_abs(g) < s.logistic_tolerance) break;
    // Two-loop recursion.
    dir = g;
    std::vector<double> alpha(S.size());
    for (std::size_t i = S.size(); i-- > 0;) {
      alpha[i] = rho[i] * dot(S[i], dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] -= alpha[i] * Y[i][j];
    }
    double gamma = 1.0;
    if (!S.empty()) gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
    else gamma = 1.0 / std::max(1.0, std::sqrt(dot(g, g)));
    for (double& v : dir) v *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * dot(Y[i], dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] += S[i][j] * (alpha[i] - beta);
    }
    for (double& v : dir) v = -v;

    double f_new = fx;
    double step = armijo(f, x, fx, g, dir, 1.0, x_new, g_new, f_new);
    if (step == 0.0) {
      // Memory went stale; restart from steepest descent once.
      S.clear(); Y.clear(); rho.clear();
      for (std::size_t j = 0; j < n; ++j) dir[j] = -g[j] / std::max(1.0, std::sqrt(dot(g, g)));
      step = armijo(f, x, fx, g, dir, 1.0, x_new, g_new, f_new);
      if (step == 0.0) break;
    }
    std::vector<double> sv(n), yv(n);
    for (std::size_t j = 0; j < n; ++j) {
      sv[j] = x_new[j] - x[j];
      yv[j] = g_new[j] - g[j];
    }
    const double sy = dot(sv, yv);
    if (sy > 1e-12) {
      S.push_back(std::move(sv));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > s.lbfgs_memory) {
        S.pop_front(); Y.pop_front(); rho.pop_front();
      }
    }
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
  }
  return x;
}

struct LogisticProblem {
  const Matrix& X;
  std::span<const int> y;
  Layout L;
  double lambda;  // 1 / (C n)

  double n() const { return static_cast<double>(X.rows()); }
};

std::vector<double> newton_cg(const LogisticProblem& P, const Objective& f, const SolverSettings& s) {
  const auto& L = P.L;
  const std::size_t dim = L.size();
  std::vector<double> theta(dim, 0.0), g(dim), x_new(dim), g_new(dim);
  double fx = f(theta, g);
  Matrix probs(P.X.rows(), L.k);

  auto hess_vec = [&](std::span<const double> v, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> u(L.k), w(L.k);
    for (std::size_t i = 0; i < P.X.rows(); ++i) {
      const auto x = P.X.row(i);
      class_scores(L, v, x, u);
      const auto p = probs.row(i);
      const double pu = dot(p, u);
      for (std::size_t c = 0; c < L.k; ++c) w[c] = p[c] * (u[c] - pu);
      for (std::size_t c = 0; c < L.k; ++c) {
        if (w[c] == 0.0) continue;
        for (std::size_t j = 0; j < L.d; ++j) out[L.w(c, j)] += w[c] * x[j];
        out[L.b(c)] += w[c];
      }
    }
    const double inv_n = 1.0 / P.n();
    for (double& o : out) o *= inv_n;
    for (std::size_t c = 0; c < L.k; ++c) {
      for (std::size_t j = 0; j < L.d; ++j) out[L.w(c, j)] += P.lambda * v[L.w(c, j)];
    }
  };

  std::vector<double> dir(dim), r(dim), p(dim), hp(dim);
  for (int iter = 0; iter < s.logistic_max_iterations; ++iter) {
    if (max_abs(g) < s.logistic_tolerance) break;
    for (std::size_t i = 0; i < P.X.rows(); ++i) {
      auto z = probs.row(i);
      class_scores(L, theta, P.X.row(i), z);
      softmax_in_place(z);
    }
    // Conjugate gradient on H dir = -g.
    std::fill(dir.begin(), dir.end(), 0.0);
    for (std::size_t j = 0; j < dim; ++j) r[j] = -g[j];
    p = r;
    double rr = dot(r, r);
    const double gnorm = std::sqrt(dot(g, g));
    const double cg_tol = std::min(0.5, std::sqrt(gnorm)) * gnorm;
    for (int inner = 0; inner < s.newton_cg_max_inner; ++inner) {
      if (std::sqrt(rr) <= cg_tol) break;
      hess_vec(p, hp);
      const double curv = dot(p, hp);
      if (!(curv > 0.0)) {
        if (inner == 0) dir = p;
        break;
      }
      const double a = rr / curv;
      for (std::size_t j = 0; j < dim; ++j) {
        dir[j] += a * p[j];
        r[j] -= a * hp[j];
      }
      const double rr_new = dot(r, r);
      for (std::size_t j = 0; j < dim; ++j) p[j] = r[j] + (rr_new / rr) * p[j];
      rr = rr_new;
    }
    if (!(dot(dir, g) < 0.0)) {
      for (std::size_t j = 0; j < dim; ++j) dir[j] = -g[j];
    }
    double f_new = fx;
    const double step = armijo(f, theta, fx, g, dir, 1.0, x_new, g_new, f_new);
    if (step == 0.0) break;
    theta.swap(x_new);
    g.swap(g_new);
    fx = f_new;
  }
  return theta;
}

std::vector<double> sag(const LogisticProblem& P, const Objective& f, std::uint64_t seed,
                        const SolverSettings& s) {
  const auto& L = P.L;
  const std::size_t n = P.X.rows();
  std::vector<double> theta(L.size(), 0.0), grad(L.size());
  std::vector<double> best = theta;
  double best_f = f(theta, grad);
  if (max_abs(grad) < s.logistic_tolerance) return theta;

  double max_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_sq = std::max(max_sq, dot(P.X.row(i), P.X.row(i)) + 1.0);
  const double step = 1.0 / (0.5 * max_sq + P.lambda);

  Matrix memory(n, L.k, 0.0);          // last residual (p - onehot) per sample
  std::vector<double> sum(L.size(), 0.0);  // sum of stored per-sample gradients
  std::vector<char> seen(n, 0);
  std::size_t n_seen = 0;
  std::vector<double> z(L.k);
  Rng rng(seed);

  for (int epoch = 0; epoch < s.logistic_max_iterations; ++epoch) {
    for (std::size_t t = 0; t < n; ++t) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      const auto x = P.X.row(i);
      class_scores(L, theta, x, z);
      softmax_in_place(z);
      z[static_cast<std::size_t>(P.y[i])] -= 1.0;
      auto mem = memory.row(i);
      for (std::size_t c = 0; c < L.k; ++c) {
        const double delta = z[c] - mem[c];
        if (delta != 0.0) {
          for (std::size_t j = 0; j < L.d; ++j) sum[L.w(c, j)] += delta * x[j];
          sum[L.b(c)] += delta;
        }
        mem[c] = z[c];
      }
      if (!seen[i]) {
        seen[i] = 1;
        ++n_seen;
      }
      const double inv_m = 1.0 / static_cast<double>(n_seen);
      for (std::size_t c = 0; c < L.k; ++c) {
        for (std::size_t j = 0; j < L.d; ++j) {
          const auto idx = L.w(c, j);
          theta[idx] -= step * (sum[idx] * inv_m + P.lambda * theta[idx]);
        }
        theta[L.b(c)] -= step * sum[L.b(c)] * inv_m;
      }
    }
    const double fx = f(theta, grad);
    if (fx < best_f) {
      best_f = fx;
      best = theta;
    }
    if (max_abs(grad) < s.logistic_tolerance) return theta;
  }
  return best;
}

}  // namespace

double logistic_objective(const Matrix& X, std::span<const int> y, int n_classes, double C,
                          std::span<const double> theta, std::span<double> grad) {
  const Layout L{static_cast<std::size_t>(n_classes), X.cols()};
  const double n = static_cast<double>(X.rows());
  const double lambda = 1.0 / (C * n);
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> z(L.k);
  double loss = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    class_scores(L, theta, x, z);
    const auto yi = static_cast<std::size_t>(y[i]);
    const double zy = z[yi];
    loss += softmax_in_place(z) - zy;
    z[yi] -= 1.0;
    for (std::size_t c = 0; c < L.k; ++c) {
      if (z[c] == 0.0) continue;
      for (std::size_t j = 0; j < L.d; ++j) grad[L.w(c, j)] += z[c] * x[j];
      grad[L.b(c)] += z[c];
    }
  }
  double penalty = 0.0;
  for (double& gv : grad) gv /= n;
  for (std::size_t c = 0; c < L.k; ++c) {
    for (std::size_t j = 0; j < L.d; ++j) {
      const double w = theta[L.w(c, j)];
      penalty += w * w;
      grad[L.w(c, j)] += lambda * w;
    }
  }
  return loss / n + 0.5 * lambda * penalty;
}

LinearModel fit_logistic_regression(const Matrix& X, std::span<const int> y, int n_classes, double C,
                                    std::string_view solver, std::uint64_t seed,
                                    const SolverSettings& settings) {
  const LogisticProblem P{X, y, {static_cast<std::size_t>(n_classes), X.cols()},
                          1.0 / (C * static_cast<double>(X.rows()))};
  const Objective f = [&](std::span<const double> theta, std::span<double> grad) {
    return logistic_objective(X, y, n_classes, C, theta, grad);
  };
  std::vector<double> theta;
  if (solver == "lbfgs") {
    theta = minimize_lbfgs(f, std::vector<double>(P.L.size(), 0.0), settings);
  } else if (solver == "newton-cg") {
    theta = newton_cg(P, f, settings);
  } else if (solver == "sag") {
    theta = sag(P, f, seed, settings);
  } else {
    throw InvalidInput("unknown logistic regression solver '" + std::string(solver) + "'");
  }
  return unpack(P.L, theta);
}

LinearModel fit_perceptron(const Matrix& X, std::span<const int> y, int n_classes, double alpha,
                           std::uint64_t seed, const SolverSettings& settings) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  const auto k = static_cast<std::size_t>(n_classes);
  LinearModel model{Matrix(k, d), std::vector<double>(k, 0.0)};
  const double shrink = std::max(0.0, 1.0 - alpha);

  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<double> best_w = w;
    double best_b = 0.0;
    std::size_t best_errors = n + 1;
    for (int epoch = 0; epoch < settings.perceptron_epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
      rng.shuffle(std::span<std::size_t>(order));
      for (const auto i : order) {
        const auto x = X.row(i);
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const double margin = target * (dot(w, x) + b);
        for (double& wj : w) wj *= shrink;
        if (margin <= 0.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] += target * x[j];
          b += target;
        }
      }
      // Keep the iterate with the fewest training mistakes.
      std::size_t errors = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        if (target * (dot(w, X.row(i)) + b) <= 0.0) ++errors;
      }
      if (errors < best_errors) {
        best_errors = errors;
        best_w = w;
        best_b = b;
      }
    }
    std::copy(best_w.begin(), best_w.end(), model.weights.row(c).begin());
    model.bias[c] = best_b;
  }
  return model;
}

LinearModel fit_linear_svc(const Matrix& X, std::span<const int> y, int n_classes, double C,
                           const SolverSettings& settings) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  const auto k = static_cast<std::size_t>(n_classes);
  const double nn = static_cast<double>(n);
  const double lambda = 1.0 / (C * nn);
  const double radius = 1.0 / std::sqrt(lambda);
  LinearModel model{Matrix(k, d), std::vector<double>(k, 0.0)};

  // The bias is the weight of a constant feature and is regularized with the rest.
  std::vector<double> w(d + 1), sub(d + 1);
  for (std::size_t c = 0; c < k; ++c) {
    std::fill(w.begin(), w.end(), 0.0);
    auto objective = [&](std::span<const double> v) {
      double hinge = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - target * (dot(v.first(d), X.row(i)) + v[d]));
      }
      return 0.5 * lambda * dot(v, v) + hinge / nn;
    };
    std::vector<double> best = w;
    double best_obj = objective(w);
    for (int t = 1; t <= settings.linear_svc_epochs; ++t) {
      for (std::size_t j = 0; j <= d; ++j) sub[j] = lambda * w[j];
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        if (target * (dot(std::span<const double>(w).first(d), x) + w[d]) < 1.0) {
          for (std::size_t j = 0; j < d; ++j) sub[j] -= target * x[j] / nn;
          sub[d] -= target / nn;
        }
      }
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      for (std::size_t j = 0; j <= d; ++j) w[j] -= eta * sub[j];
      const double norm = std::sqrt(dot(w, w));
      if (norm > radius) {
        for (double& v : w) v *= radius / norm;
      }
      const double obj = objective(w);
      if (obj < best_obj) {
        best_obj = obj;
        best = w;
      }
    }
    std::copy(best.begin(), best.begin() + static_cast<long>(d), model.weights.row(c).begin());
    model.bias[c] = best[d];
  }
  return model;
}

}  // namespace uwbdetect::detail
