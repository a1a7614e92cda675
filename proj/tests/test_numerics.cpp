#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <vector>

#include "rainfall/errors.hpp"
#include "rainfall/numerics/nelder_mead.hpp"
#include "rainfall/numerics/quadrature.hpp"
#include "rainfall/numerics/rng.hpp"
#include "rainfall/numerics/roots.hpp"
#include "rainfall/numerics/special.hpp"

using namespace rainfall;
using namespace rainfall::numerics;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// 1e-12 absolute, or a few ulp of the value where the value is too large for that.
double lgamma_tol(double value) { return std::max(1e-12, 8.0 * kEps * std::fabs(value)); }

// 40-digit reference values.
struct Pair {
  double x, v;
};
const Pair kLogGammaRef[] = {
    {1e-6, 13.81550998074943166921},   {0.001, 6.907178885383853682512},    {0.1, 2.25271265173420595987},
    {0.5, 0.5723649429247000870717},   {1.5, -0.1207822376352452223455},    {3.7, 1.428072326665387921872},
    {12.25, 18.11566950571089261902},  {100, 359.134205369575398776},        {1234.5, 7550.55090107789489573},
    {1e5, 1051287.708973656894901},    {1e6, 12815504.56914761165998},
};
const Pair kDigammaRef[] = {
    {0.1, -10.42375494041107679517}, {0.5, -1.963510026021423479441}, {1, -0.5772156649015328606065},
    {2.5, 0.7031566406452431872257}, {7, 1.872784335098467139393},    {30, 3.384438132685524876562},
};

struct Triple {
  double a, x, p;
};
const Triple kLowerGammaRef[] = {
    {0.1, 0.01, 0.66262125995447980576},
    {0.1, 0.5, 0.94140244589013352204},
    {0.1, 1, 0.97587265627367222262},
    {0.1, 5, 0.99985606103415326601},
    {0.1, 20, 0.9999999999859864102},
    {0.1, 100, 1.0},
    {0.1, 300, 1.0},
    {0.5, 0.01, 0.1124629160182848922},
    {0.5, 0.5, 0.68268949213708589717},
    {0.5, 1, 0.84270079294971486934},
    {0.5, 5, 0.99843459774199745032},
    {0.5, 20, 0.99999999974603714105},
    {0.5, 100, 1.0},
    {0.5, 300, 1.0},
    {1, 0.01, 0.0099501662508319464261},
    {1, 0.5, 0.3934693402873665764},
    {1, 1, 0.6321205588285576784},
    {1, 5, 0.9932620530009145329},
    {1, 20, 0.99999999793884637756},
    {1, 100, 1.0},
    {1, 300, 1.0},
    {2.5, 0.01, 0.0000029876015319065936891},
    {2.5, 0.5, 0.037434226752703631043},
    {2.5, 1, 0.15085496391539036377},
    {2.5, 5, 0.92476475385348782128},
    {2.5, 20, 0.99999985066320999496},
    {2.5, 100, 1.0},
    {2.5, 300, 1.0},
    {10, 0.01, 0.0000000000000000000000000027307942836962459479},
    {10, 0.5, 0.00000000017096700293489033565},
    {10, 1, 0.00000011142547833872067735},
    {10, 5, 0.031828057306204811737},
    {10, 20, 0.99500458769169241283},
    {10, 100, 1.0},
    {10, 300, 1.0},
    {50, 0.01, 3.2558721772148899783e-165},
    {50, 0.5, 1.7887765104351362856e-80},
    {50, 1, 1.2337508979097351272e-65},
    {50, 5, 2.1810592140784887595e-32},
    {50, 20, 0.000000012458926079719379235},
    {50, 100, 0.99999998821549927902},
    {50, 300, 1.0},
    {200, 0.01, 0.0},
    {200, 0.5, 0.0},
    {200, 1, 0.0},
    {200, 5, 5.4522831951351439587e-238},
    {200, 20, 4.6635017890786538e-124},
    {200, 100, 0.00000000000000000093431500729883902803},
    {200, 300, 0.99999999966288967445},
};

}  // namespace

TEST(LogGamma, KnownValues) {
  EXPECT_EQ(log_gamma(1.0), 0.0);
  EXPECT_NEAR(log_gamma(2.0), 0.0, 1e-15);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-12);
  EXPECT_NEAR(log_gamma(10.0), 12.801827480081469611, 1e-12);
  EXPECT_NEAR(log_gamma(10.0), std::log(362880.0), 1e-12);
}

TEST(LogGamma, MatchesHighPrecisionReference) {
  for (const auto& [x, v] : kLogGammaRef) EXPECT_NEAR(log_gamma(x), v, lgamma_tol(v)) << "x=" << x;
}

TEST(LogGamma, AgreesWithLibm) {
  for (double x = 1e-6; x <= 1e6; x *= 1.37) EXPECT_NEAR(log_gamma(x), std::lgamma(x), lgamma_tol(std::lgamma(x))) << x;
}

TEST(LogGamma, Recurrence) {
  const int n = 1000;
  const double lo = std::log(0.1), hi = std::log(1e5);
  for (int i = 0; i < n; ++i) {
    const double x = std::exp(lo + (hi - lo) * i / (n - 1));
    const double next = log_gamma(x + 1.0);
    const double err = next - log_gamma(x) - std::log(x);
    EXPECT_LE(std::fabs(err), std::max(1e-11, 8.0 * kEps * std::fabs(next))) << "x=" << x;
  }
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), DomainError);
  EXPECT_THROW(log_gamma(-1.5), DomainError);
  EXPECT_THROW(log_gamma(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(Digamma, MatchesReference) {
  for (const auto& [x, v] : kDigammaRef) EXPECT_NEAR(digamma(x), v, 1e-12 * std::max(1.0, std::fabs(v))) << x;
}

TEST(LogBeta, KnownValues) {
  EXPECT_NEAR(log_beta(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(log_beta(2, 3), -2.4849066497880003102, 1e-12);
  EXPECT_NEAR(log_beta(5, 1), -1.6094379124341003746, 1e-12);
  EXPECT_NEAR(log_beta(2.5, 0.75), log_gamma(2.5) + log_gamma(0.75) - log_gamma(3.25), 1e-14);
}

TEST(IncompleteGamma, KnownValues) {
  EXPECT_EQ(reg_lower_incomplete_gamma(1, 0), 0.0);
  EXPECT_NEAR(reg_lower_incomplete_gamma(1, std::log(2.0)), 0.5, 1e-15);
  EXPECT_NEAR(reg_lower_incomplete_gamma(3, 3), 0.57680991887315648468, 1e-12);
  EXPECT_NEAR(reg_lower_incomplete_gamma(3, 3), 1 - std::exp(-3.0) * (1 + 3 + 4.5), 1e-12);
}

TEST(IncompleteGamma, MatchesHighPrecisionGrid) {
  for (const auto& [a, x, p] : kLowerGammaRef) {
    EXPECT_NEAR(reg_lower_incomplete_gamma(a, x), p, 1e-12) << "a=" << a << " x=" << x;
    EXPECT_NEAR(reg_upper_incomplete_gamma(a, x), 1.0 - p, 1e-12) << "a=" << a << " x=" << x;
  }
}

TEST(IncompleteGamma, MonotoneAndTendsToOne) {
  for (double a : {0.2, 1.0, 3.5, 20.0, 150.0}) {
    double prev = 0.0;
    for (double x = 0.0; x < a + 40 * std::sqrt(a) + 40; x += 0.05 * (1 + std::sqrt(a))) {
      const double p = reg_lower_incomplete_gamma(a, x);
      EXPECT_GE(p, prev) << a << " " << x;
      EXPECT_LE(p, 1.0);
      prev = p;
    }
    EXPECT_GE(reg_lower_incomplete_gamma(a, a + 40 * std::sqrt(a) + 40), 1.0 - 1e-10);
  }
}

TEST(IncompleteGamma, Errors) {
  EXPECT_THROW(reg_lower_incomplete_gamma(0.0, 1.0), DomainError);
  EXPECT_THROW(reg_lower_incomplete_gamma(1.0, -1.0), DomainError);
}

TEST(GammaQuantile, InvertsCdf) {
  for (double a : {0.3, 1.0, 2.0, 8.0})
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
      const double x = gamma_quantile(p, a);
      EXPECT_NEAR(reg_lower_incomplete_gamma(a, x), p, 1e-12 + 1e-10 * p) << a << " " << p;
    }
  EXPECT_NEAR(gamma_quantile(0.5, 1.0), std::log(2.0), 1e-13);
}

TEST(Brent, LinearAndSqrt) {
  EXPECT_NEAR(brent_root([](double x) { return x - 2.0; }, 0.0, 5.0, 1e-12), 2.0, 1e-12);
  EXPECT_NEAR(brent_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-10), std::sqrt(2.0), 1e-10);
}

TEST(Brent, GammaMedianShapeThree) {
  // Reference by 200-step bisection of the closed-form CDF in 30-digit arithmetic.
  const double r = brent_root([](double x) { return reg_lower_incomplete_gamma(3, x) - 0.5; }, 0.0, 20.0, 1e-12);
  EXPECT_NEAR(r, 2.6740603137235888, 1e-8);
}

TEST(Brent, CdfOfQuantileIsIdentity) {
  for (double p : {0.05, 0.5, 0.95}) {
    const double x = brent_root([p](double y) { return 1 - std::exp(-y) - p; }, 0.0, 50.0, 1e-14);
    EXPECT_NEAR(1 - std::exp(-x), p, 1e-13);
  }
}

TEST(Brent, Errors) {
  EXPECT_THROW(brent_root([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-10), NoBracketError);
  EXPECT_THROW(brent_root([](double x) { return x; }, 1.0, -1.0, 1e-10), DomainError);
}

TEST(NelderMead, Quadratic) {
  const std::vector<double> init{1.0, 1.0};
  const auto r = nelder_mead([](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1]; }, init);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.argmin[0], 0.0, 1e-6);
  EXPECT_NEAR(r.argmin[1], 0.0, 1e-6);
}

TEST(NelderMead, Rosenbrock) {
  const std::vector<double> init{-1.2, 1.0};
  auto rosen = [](std::span<const double> v) {
    return 100 * std::pow(v[1] - v[0] * v[0], 2) + std::pow(1 - v[0], 2);
  };
  const auto r = nelder_mead(rosen, init);
  EXPECT_NEAR(r.argmin[0], 1.0, 1e-4);
  EXPECT_NEAR(r.argmin[1], 1.0, 1e-4);
  EXPECT_TRUE(r.monotone);
}

TEST(NelderMead, ConstantReturnsInit) {
  const std::vector<double> init{0.3, -2.0, 5.0};
  const auto r = nelder_mead([](std::span<const double>) { return 4.0; }, init);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.argmin, init);
  EXPECT_EQ(r.value, 4.0);
}

TEST(NelderMead, Deterministic) {
  const std::vector<double> init{2.0, -1.0, 0.5};
  auto f = [](std::span<const double> v) { return std::cosh(v[0]) + std::pow(v[1] - 1, 4) + std::fabs(v[2]); };
  const auto a = nelder_mead(f, init);
  const auto b = nelder_mead(f, init);
  EXPECT_EQ(a.argmin, b.argmin);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Quadrature, Polynomials) {
  EXPECT_NEAR(gauss_legendre_integrate([](double x) { return x; }, 0, 1, 1), 0.5, 1e-15);
  EXPECT_NEAR(gauss_legendre_integrate([](double x) { return x * x * x; }, 0, 1, 1), 0.25, 1e-15);
  EXPECT_NEAR(gauss_legendre_integrate([](double x) { return std::pow(x, 63); }, 0, 1, 1), 1.0 / 64, 1e-14);
}

TEST(Quadrature, Sine) {
  EXPECT_NEAR(gauss_legendre_integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi, 16), 2.0, 1e-10);
}

TEST(Quadrature, RuleWeightsSumToTwo) {
  double s = 0.0;
  for (double w : gauss_legendre_rule().weights) s += w;
  EXPECT_NEAR(s, 2.0, 1e-14);
}

TEST(Rng, TestVectors) {
  // Reference implementation written independently in Python.
  RngState a(0, 0);
  EXPECT_EQ(a.next_u64(), 0x568a9b0b1a2c05ecULL);
  EXPECT_EQ(a.next_u64(), 0x44e5b8b147ef718bULL);
  EXPECT_EQ(a.next_u64(), 0x458563ab55521133ULL);
  RngState b(42, 7);
  EXPECT_EQ(b.next_u64(), 0xdeb745320506897aULL);
  EXPECT_EQ(b.next_u64(), 0xab8922ad642bda36ULL);
  EXPECT_EQ(b.next_u64(), 0x55df53e1604e823aULL);
  RngState c(~0ULL, 3);
  EXPECT_EQ(c.next_u64(), 0xb48d68cec57397d5ULL);
  EXPECT_EQ(c.next_u64(), 0x59d2fc9131b77183ULL);
  EXPECT_EQ(c.next_u64(), 0x1f4f28c428ca8f8bULL);
  RngState d = RngState(42, 7).derive(5);
  EXPECT_EQ(d.next_u64(), 0x5393f093dfea6953ULL);
  EXPECT_EQ(d.next_u64(), 0x0326e54f41a0336bULL);
  EXPECT_EQ(RngState(42, 7).uniform(), 0.86998398276503);
}

TEST(Rng, DeriveDoesNotAdvanceParent) {
  RngState a(9, 1);
  (void)a.derive(3);
  RngState b(9, 1);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 100; ++s) firsts.insert(RngState(1, s).next_u64());
  EXPECT_EQ(firsts.size(), 100u);
}

TEST(Rng, UniformOpenIntervalAndMoments) {
  RngState r(123, 0);
  const int n = 200000;
  double sum = 0, sum_n = 0, sum_n2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum_n += z;
    sum_n2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sum_n / n, 0.0, 4 / std::sqrt(double(n)));
  EXPECT_NEAR(sum_n2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}
