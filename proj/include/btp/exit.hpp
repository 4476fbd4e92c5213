#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "btp/paths.hpp"
#include "btp/pde.hpp"
#include "btp/random.hpp"
#include "btp/statistics.hpp"
#include "btp/test_function.hpp"

namespace btp {

/// One run of the iterated exit: tau is the exit time of the outer Brownian
/// motion from the domain, T the first time the inner Brownian motion leaves
/// (-tau, tau).
struct ExitSample {
  double T = 0.0;
  Point exit_point;
  double tau = 0.0;
};

struct ExitSettings {
  /// Euler step of the outer walk. The inner walk uses min(step, tau^2 / 64)
  /// so that small tau are resolved too.
  double step = 1e-3;
  /// Bisection levels used to localise a crossing inside a step.
  int refinement_levels = 12;
  std::size_t max_steps = 100'000'000;
};

/// Walks until exit; each step also tests the Brownian-bridge crossing
/// probability, and a detected crossing is located by bridge bisection.
/// Points on the boundary return T = tau = 0. Throws BudgetExceeded when
/// max_steps elapse first, InvalidInput when x lies outside the domain.
ExitSample sample_iterated_exit(std::span<const double> x, const Domain& domain,
                                const ExitSettings& settings, Seed seed);

/// n independent samples from derive(seed, i).
std::vector<ExitSample> sample_iterated_exits(std::span<const double> x, const Domain& domain,
                                              std::size_t n, const ExitSettings& settings,
                                              Seed seed);

/// One line of a verification report. Statistical rows carry a standard
/// error and pass iff |z| <= 3; deterministic rows (std_error 0) pass iff
/// |estimate - theoretical| <= tolerance. Informational rows never affect
/// the report verdict.
struct ReportRow {
  std::string label;
  Point x;
  double theoretical = 0.0;
  Estimate estimate;
  double z = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool informational = false;
};

struct VerificationReport {
  std::string quantity;
  std::vector<ReportRow> rows;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> notes;

  /// All non-informational rows pass.
  bool pass() const;

  void add_statistical(std::string label, Point x, double theoretical, const Estimate& e);
  void add_deterministic(std::string label, Point x, double theoretical, double value,
                         double tolerance, bool informational = false);
};

/// Monte Carlo E f(exit point) against the harmonic extension of f.
VerificationReport verify_exit_distribution(const Domain& domain, const BoundaryData& f,
                                            std::span<const Point> x_list, std::size_t n,
                                            Seed seed, const ExitSettings& settings = {});

/// Monte Carlo E T against m2(x), plus the paired difference T - tau^2
/// against 0 from the same runs.
VerificationReport verify_exit_time_moment(const Domain& domain, std::span<const Point> x_list,
                                           std::size_t n, Seed seed,
                                           const ExitSettings& settings = {});

/// Both reports from one set of samples per point (the harness uses this).
std::pair<VerificationReport, VerificationReport> verify_exit_problem(
    const Domain& domain, const BoundaryData& f, std::span<const Point> x_list, std::size_t n,
    Seed seed, const ExitSettings& settings = {});

/// E f(x + sqrt(t) Z) - f(x) against (t/2) Lap f(x) for biharmonic f, by
/// quadrature. Biharmonicity is probed with bilaplacian_at on a few points
/// around x; a probe above 1e-6 is InvalidInput.
VerificationReport ito_truncation_check(const TestFunction& f, double t,
                                        std::span<const double> x, double tolerance = 1e-8);

struct BilaplacianCandidates {
  double fd = 0.0;           // Lap^2 u by finite differences
  double printed = 0.0;      // 4 Lap f + grad Lap f . grad Lap m2 + 2 sum_{i != j}
  double derived = 0.0;      // 4 Lap f + 2 grad Lap f . grad Lap m2 + 2 sum_{i,j}
  double laplacian_only = 0.0;  // 4 Lap f
};

/// The three right-hand sides for Lap^2 u at x, where
/// u(y) = E f(y + W(m2(y))) and m2 is the second exit-time moment.
BilaplacianCandidates bilaplacian_candidates(const ExitMoments& moments, const TestFunction& f,
                                              std::span<const double> x, double h);

/// Compares the finite-difference Lap^2 u with each candidate at every x.
/// The verdict requires the derived candidate to match everywhere, the
/// Laplacian-only candidate to match wherever grad Lap f vanishes, and
/// u = f on the boundary points `boundary`; the printed candidate is
/// reported as informational.
VerificationReport verify_elliptic_bilaplacian(const Domain& domain, const TestFunction& f,
                                               std::span<const Point> x_list, double h = 0.05,
                                               double tolerance = 1e-4,
                                               std::span<const Point> boundary = {});

}  // namespace btp
