#include "fedcvr/harness/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <ostream>
#include <sstream>

#include "fedcvr/coalition/eigensolver.hpp"
#include "fedcvr/coalition/kernels.hpp"
#include "fedcvr/coalition/partition.hpp"
#include "fedcvr/coalition/spectral.hpp"
#include "fedcvr/policies/policy.hpp"
#include "fedcvr/rng.hpp"
#include "fedcvr/stats/covariance_stack.hpp"
#include "fedcvr/stats/variance_reduction.hpp"
#include "fedcvr/tasks/models.hpp"

namespace fedcvr::harness {

namespace {

// Shared factor plus idiosyncratic noise, so every client is visibly
// correlated with the global model.
Matrix random_spd(std::size_t k, CounterRng& rng) {
  const auto n = static_cast<Eigen::Index>(k);
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = 0.5 + rng.uniform();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
  Matrix c = s * s.transpose() + g * g.transpose() / (2.0 * static_cast<double>(k));
  c.diagonal().array() += 0.2;
  return c;
}

stats::AggregationWeights random_simplex(std::size_t k, CounterRng& rng) {
  Vector a(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = -std::log(1.0 - rng.uniform());
  return stats::AggregationWeights(a / a.sum());
}

// Explained variance of alpha^T z regressed on z_A, from Gaussian samples.
double monte_carlo_reduction(const Matrix& c, const Vector& alpha, const IndexSet& subset, std::size_t samples,
                             CounterRng& rng) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const auto k = c.rows();
  const auto m = static_cast<Eigen::Index>(subset.size());
  Matrix sxx = Matrix::Zero(m, m);
  Vector sxy = Vector::Zero(m);
  Vector mx = Vector::Zero(m);
  double my = 0.0;
  Vector xi(k);
  Vector xa(m);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < k; ++i) xi(i) = rng.normal();
    const Vector z = root * xi;
    const double y = alpha.dot(z);
    for (Eigen::Index i = 0; i < m; ++i) xa(i) = z(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(i)]));
    sxx.noalias() += xa * xa.transpose();
    sxy += xa * y;
    mx += xa;
    my += y;
  }
  const double n = static_cast<double>(samples);
  mx /= n;
  my /= n;
  sxx = sxx / n - mx * mx.transpose();
  sxy = sxy / n - mx * my;
  const Vector beta = sxx.colPivHouseholderQr().solve(sxy);
  return sxy.dot(beta);
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

VerifyCheck value_vector_mc(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.value_vector");
  double worst = 0.0;
  for (int inst = 0; inst < 3; ++inst) {
    const Matrix c = random_spd(4, rng);
    const auto alpha = random_simplex(4, rng);
    const Vector v = stats::value_vector_component(c, alpha);
    for (std::size_t k = 0; k < 4; ++k) {
      const double mc = monte_carlo_reduction(c, alpha.values(), {k}, 200000, rng);
      worst = std::max(worst, rel_err(v(static_cast<Eigen::Index>(k)), mc));
    }
  }
  return {"value_vector_vs_monte_carlo", worst < 0.03, "max rel err " + fmt(worst)};
}

VerifyCheck subset_mc(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.subset");
  double worst = 0.0;
  for (int inst = 0; inst < 3; ++inst) {
    const Matrix c = random_spd(5, rng);
    const auto alpha = random_simplex(5, rng);
    const IndexSet subset = sample_without_replacement(5, 2 + static_cast<std::size_t>(inst), rng);
    const double exact = stats::variance_reduction_subset(c, alpha, subset);
    const double mc = monte_carlo_reduction(c, alpha.values(), subset, 200000, rng);
    worst = std::max(worst, rel_err(exact, mc));
  }
  return {"subset_reduction_vs_monte_carlo", worst < 0.03, "max rel err " + fmt(worst)};
}

VerifyCheck singleton_consistency(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.singleton");
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t k = 2 + rng.uniform_index(7);
    const Matrix c = random_spd(k, rng);
    const auto alpha = random_simplex(k, rng);
    const Vector v = stats::value_vector_component(c, alpha);
    const std::size_t j = rng.uniform_index(k);
    worst = std::max(worst, rel_err(stats::variance_reduction_subset(c, alpha, {j}), v(static_cast<Eigen::Index>(j))));
  }
  return {"subset_of_one_matches_value_vector", worst < 1e-10, "max rel err " + fmt(worst)};
}

VerifyCheck robbins_monro_batch(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.rm");
  const Eigen::Index k = 4;
  const Vector mean = Vector::Zero(k);
  Matrix c = Matrix::Identity(k, k);
  Matrix batch = Matrix::Zero(k, k);
  const stats::GammaSchedule schedule;
  const int n = 50;
  for (int t = 1; t <= n; ++t) {
    Vector x(k);
    for (Eigen::Index i = 0; i < k; ++i) x(i) = rng.normal();
    c = stats::robbins_monro_update(c, schedule.at(static_cast<std::uint64_t>(t)), x, mean);
    batch += x * x.transpose();
  }
  batch /= n;
  const double err = (c - batch).cwiseAbs().maxCoeff();
  return {"robbins_monro_reciprocal_is_batch_mean", err < 1e-12, "max abs err " + fmt(err)};
}

VerifyCheck homophily_closed_form(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.homophily");
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    Matrix p(2, 3);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.normal();
    const double gamma = 0.1 + rng.uniform();
    const auto w = coalition::homophily_matrix(p, gamma);
    const double d2 = (p.row(0) - p.row(1)).squaredNorm();
    const double off = 1.0 / (1.0 + std::exp(gamma * d2));
    worst = std::max({worst, std::abs(w.entries(0, 1) - off), std::abs(w.entries(1, 0) - off),
                      std::abs(w.entries.row(0).sum() - 1.0), std::abs(w.entries.row(1).sum() - 1.0)});
  }
  return {"homophily_two_client_closed_form", worst < 1e-12, "max abs err " + fmt(worst)};
}

VerifyCheck eigensolver_known_spectrum(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.eigen");
  const Eigen::Index n = 200;
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda(i) = i < 4 ? 1.0 - 0.05 * static_cast<double>(i) : rng.uniform() - 0.5;
  const Matrix a = q * lambda.asDiagonal() * q.transpose();
  double worst = 0.0;
  bool partial = true;
  for (auto method : {coalition::EigenMethod::selected, coalition::EigenMethod::krylov}) {
    coalition::PartialEigenOptions options;
    options.method = method;
    const auto pairs = coalition::largest_eigenpairs(a, 4, seed, options);
    partial = partial && pairs.method == method;
    for (Eigen::Index i = 0; i < 4; ++i) worst = std::max(worst, std::abs(pairs.values(i) - lambda(i)));
  }
  return {"partial_eigensolvers_known_spectrum", worst < 1e-8 && partial, "max abs err " + fmt(worst)};
}

VerifyCheck planted_recovery(std::uint64_t seed) {
  int recovered = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    CounterRng rng = CounterRng(seed).split("verify.planted").split(static_cast<std::uint64_t>(t));
    Matrix p(20, 3);
    std::vector<std::size_t> truth(20);
    for (Eigen::Index k = 0; k < 20; ++k) {
      truth[static_cast<std::size_t>(k)] = static_cast<std::size_t>(k % 2);
      for (Eigen::Index d = 0; d < 3; ++d) p(k, d) = (k % 2 ? 5.0 : -5.0) + 0.1 * rng.normal();
    }
    const auto w = coalition::homophily_matrix(p, 1.0);
    const auto part = coalition::spectral_cluster(w, 2, coalition::kDefaultKmeansIters, rng());
    if (coalition::adjusted_rand_index(part.labels(), truth) == 1.0) ++recovered;
  }
  return {"spectral_planted_two_clusters", recovered == trials,
          std::to_string(recovered) + "/" + std::to_string(trials) + " recovered"};
}

VerifyCheck boltzmann_properties(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.boltzmann");
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    Vector v(6);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 10.0 * rng.normal();
    const IndexSet block = {0, 2, 3, 5};
    const double beta = 0.1 + 5.0 * rng.uniform();
    const Vector p = policies::boltzmann_probs(v, block, beta);
    const Vector shifted = policies::boltzmann_probs((v.array() + 7.5).matrix(), block, beta);
    worst = std::max({worst, std::abs(p.sum() - 1.0), (p - shifted).cwiseAbs().maxCoeff()});
    if (p.minCoeff() <= 0.0) worst = 1.0;
  }
  return {"boltzmann_simplex_and_shift_invariance", worst < 1e-12, "max abs err " + fmt(worst)};
}

double fd_error(const std::function<tasks::LossGrad(const ModelParams&)>& f, ModelParams theta) {
  const auto base = f(theta);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta(i)));
    ModelParams up = theta;
    ModelParams down = theta;
    up(i) += h;
    down(i) -= h;
    const double fd = (f(up).loss - f(down).loss) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - base.grad(i)) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

VerifyCheck gradients(std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split("verify.gradients");
  Matrix x(30, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  Vector yr(30);
  Vector yc(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    yr(i) = rng.normal();
    yc(i) = static_cast<double>(rng.uniform_index(3));
  }
  ModelParams tr(3);
  ModelParams tc(9);
  for (Eigen::Index i = 0; i < 3; ++i) tr(i) = rng.normal();
  for (Eigen::Index i = 0; i < 9; ++i) tc(i) = rng.normal();
  const double er = fd_error([&](const ModelParams& t) { return tasks::regression_loss_and_grad(t, x, yr); }, tr);
  const double ec =
      fd_error([&](const ModelParams& t) { return tasks::cross_entropy_loss_and_grad(t, x, yc, 3); }, tc);
  const double worst = std::max(er, ec);
  return {"loss_gradients_vs_finite_differences", worst < 1e-6, "max rel err " + fmt(worst)};
}

}  // namespace

std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed) {
  const std::vector<std::function<VerifyCheck(std::uint64_t)>> suite = {
      value_vector_mc,       subset_mc,        singleton_consistency, robbins_monro_batch, homophily_closed_form,
      eigensolver_known_spectrum, planted_recovery, boltzmann_properties, gradients};
  std::vector<VerifyCheck> out;
  for (const auto& check : suite) {
    try {
      out.push_back(check(seed));
    } catch (const std::exception& e) {
      out.push_back({"(exception)", false, e.what()});
    }
  }
  return out;
}

bool report_verify(const std::vector<VerifyCheck>& checks, std::ostream& out) {
  bool all = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    all = all && c.passed;
  }
  out << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all;
}

}  // namespace fedcvr::harness
