#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sapd/dro.hpp"

using namespace sapd;

namespace {

DroDataset small_dataset(std::size_t n = 40, std::size_t d = 5, std::uint64_t seed = 3) {
    DroDataset ds = synthetic_logistic(n, 0, d, seed).first;
    normalize_dataset(ds, Normalization::GlobalScale);
    return ds;
}

DroConfig small_config(std::size_t batch = 1) {
    DroConfig c;
    c.mu_x = 0.1;
    c.mu_y = 1.0;
    c.batch = batch;
    return c;
}

Vec random_vec(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> g(0, sd);
    Vec v(n);
    for (double& e : v) e = g(rng);
    return v;
}

}  // namespace

TEST(DroData, MinMaxToyCsv) {
    std::istringstream in("f1,f2,label\n0,10,1\n1,20,-1\n");
    DroDataset ds = parse_csv(in);
    normalize_dataset(ds, Normalization::ColumnMinMax);
    EXPECT_EQ(ds.n(), 2u);
    EXPECT_EQ(ds.A(0, 0), 0.0);
    EXPECT_EQ(ds.A(1, 0), 1.0);
    EXPECT_EQ(ds.A(0, 1), 0.0);
    EXPECT_EQ(ds.A(1, 1), 1.0);
    EXPECT_EQ(ds.b[0], 1.0);
    EXPECT_EQ(ds.b[1], -1.0);
}

TEST(DroData, ConstantColumnFlagged) {
    std::istringstream in("3,1,0\n3,2,1\n");
    DroDataset ds = parse_csv(in);
    normalize_dataset(ds, Normalization::ColumnMinMax);
    ASSERT_EQ(ds.constant_columns.size(), 1u);
    EXPECT_EQ(ds.constant_columns[0], 0u);
    EXPECT_EQ(ds.A(1, 0), 0.0);
}

TEST(DroData, GlobalScaleUsesSmallerDimension) {
    DroDataset ds;
    ds.A = Matrix(97, 10000);
    ds.A(5, 7) = 1.0;
    ds.b = Vec(97, 1.0);
    normalize_dataset(ds, Normalization::GlobalScale);
    EXPECT_NEAR(ds.A(5, 7), 1 / std::sqrt(97.0), 1e-15);
}

TEST(DroData, CsvErrors) {
    auto parse = [](const std::string& s, LoadOptions o = {}) {
        std::istringstream in(s);
        return parse_csv(in, o);
    };
    EXPECT_THROW(parse("1,2,1\n1,x,0\n"), DatasetFormatError);
    EXPECT_THROW(parse("1,2,1\n1,0\n"), DatasetFormatError);
    EXPECT_THROW(parse("1,2,1\n1,2,\n"), DatasetFormatError);
    EXPECT_THROW(parse("1,2,a\n1,2,b\n1,3,c\n"), DatasetFormatError);
    EXPECT_THROW(parse("1,2,a\n1,2,b\n", LoadOptions{std::string("z"), -1}), DatasetFormatError);
    const DroDataset ovr = parse("1,2,a\n1,2,b\n1,3,c\n", LoadOptions{std::string("b"), -1});
    EXPECT_EQ(ovr.b, (Vec{-1, 1, -1}));
    const DroDataset first = parse("0,5,6\n1,7,8\n", LoadOptions{std::nullopt, 0});
    EXPECT_EQ(first.d(), 2u);
    EXPECT_EQ(first.b, (Vec{-1, 1}));
}

TEST(DroData, Libsvm) {
    std::istringstream in("+1 1:0.5 3:2 # comment\n-1 2:1\n\n");
    const DroDataset ds = parse_libsvm(in);
    EXPECT_EQ(ds.n(), 2u);
    EXPECT_EQ(ds.d(), 3u);
    EXPECT_EQ(ds.A(0, 2), 2.0);
    EXPECT_EQ(ds.A(1, 1), 1.0);
    EXPECT_EQ(ds.b, (Vec{1, -1}));
    std::istringstream bad("+1 0:1\n-1 1:2\n");
    EXPECT_THROW(parse_libsvm(bad), DatasetFormatError);
    std::istringstream nolabel("1:2 2:3\n");
    EXPECT_THROW(parse_libsvm(nolabel), DatasetFormatError);
    EXPECT_THROW(load_dataset("/nonexistent/file.csv", "csv", Normalization::None), std::runtime_error);
}

TEST(DroProfile, Examples) {
    DroDataset ds;
    ds.A = Matrix::identity(2);
    ds.b = {1, -1};
    DroConfig cfg = small_config();
    const SmoothnessProfile p = dro_profile(ds, cfg);
    EXPECT_NEAR(p.L_xy, 1.0, 1e-12);
    EXPECT_NEAR(p.L_yx, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(p.L_xx, 0.25);
    EXPECT_EQ(p.L_yy, 0.0);
    ds.A = ds.A * 2.0;
    const SmoothnessProfile q = dro_profile(ds, cfg);
    EXPECT_NEAR(q.L_xy, 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(q.L_xx, 1.0);

    std::mt19937_64 rng(1);
    DroDataset r;
    r.A = Matrix(50, 5);
    std::normal_distribution<double> g(0, 1);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 5; ++j) r.A(i, j) = g(rng);
    r.b = Vec(50, 1.0);
    const double top = sym_eigen_full(r.A.transpose() * r.A, false).values.back();
    EXPECT_NEAR(dro_profile(r, cfg).L_xy, std::sqrt(top), 1e-8);
}

TEST(DroSmoothing, Examples) {
    EXPECT_DOUBLE_EQ(smoothing_mu_y(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(smoothing_mu_y(0.1, 1), 0.05);
    EXPECT_THROW(smoothing_mu_y(0, 1), std::invalid_argument);
    for (std::size_t n : {5u, 40u, 200u}) {
        const double r = 2 * std::sqrt(static_cast<double>(n));
        const double dy = dro_dual_diameter({n, std::sqrt(r) / static_cast<double>(n)});
        EXPECT_LE(dy, 1.0 + 1e-12);
        EXPECT_GT(dy, 1.0 / static_cast<double>(n));
    }
    // A radius that admits a vertex reaches the simplex maximum.
    EXPECT_NEAR(dro_dual_diameter({4, 2.0}), 1.0, 1e-12);
}

TEST(DroProblem, GradientsMatchFiniteDifferences) {
    const auto p = build_dro_problem(small_dataset(), small_config());
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const Vec x = random_vec(p->nx(), rng, 2.0);
        const std::size_t i = rep % p->ny();
        Vec e(p->ny(), 0.0);
        e[i] = 1.0;
        const Vec g = p->exact_grad_x(x, e);
        const double h = 1e-6;
        for (std::size_t j = 0; j < p->nx(); ++j) {
            Vec a = x, b = x;
            a[j] += h;
            b[j] -= h;
            const double fd = (p->loss(i, a) - p->loss(i, b)) / (2 * h);
            EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
        EXPECT_EQ(p->exact_grad_y(x, e), p->losses(x));
    }
}

TEST(DroProblem, SecantBoundOnLossGradients) {
    const auto p = build_dro_problem(small_dataset(), small_config());
    const DroDataset& ds = p->dataset();
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t i = rep % ds.n();
        const Vec x = random_vec(ds.d(), rng, 3.0), x2 = random_vec(ds.d(), rng, 3.0);
        Vec e(ds.n(), 0.0);
        e[i] = 1.0;
        double ai = 0;
        for (std::size_t j = 0; j < ds.d(); ++j) ai += ds.A(i, j) * ds.A(i, j);
        EXPECT_LE(std::sqrt(dist_sq(p->exact_grad_x(x, e), p->exact_grad_x(x2, e))),
                  ai / 4 * std::sqrt(dist_sq(x, x2)) + 1e-14);
    }
}

TEST(DroProblem, UniformWeightsGiveErmGradient) {
    const auto p = build_dro_problem(small_dataset(), small_config());
    std::mt19937_64 rng(7);
    const Vec x = random_vec(p->nx(), rng);
    const Vec g = p->exact_grad_x(x, p->uniform_y());
    Vec erm(p->nx(), 0.0);
    for (std::size_t i = 0; i < p->ny(); ++i) p->add_loss_grad(i, x, 1.0 / static_cast<double>(p->ny()), erm);
    for (std::size_t j = 0; j < p->nx(); ++j) EXPECT_NEAR(g[j], erm[j], 1e-15);
}

TEST(DroProblem, FullBatchIsExact) {
    const DroDataset ds = small_dataset();
    const auto p = build_dro_problem(ds, small_config(ds.n()));
    std::mt19937_64 g(8);
    Rng rng(1);
    const Vec x = random_vec(p->nx(), g), y = p->uniform_y();
    EXPECT_EQ(p->grad_x(x, y, rng), p->exact_grad_x(x, y));
    EXPECT_EQ(p->grad_y(x, y, rng), p->exact_grad_y(x, y));
}

TEST(DroProblem, MinibatchIsUnbiased) {
    const auto p = build_dro_problem(small_dataset(), small_config(4));
    std::mt19937_64 g(9);
    const Vec x = random_vec(p->nx(), g);
    Vec y = p->uniform_y();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= (i % 3 == 0 ? 1.5 : 0.75);
    const Vec ex = p->exact_grad_x(x, y), ey = p->exact_grad_y(x, y);
    const std::size_t M = 100000;
    Vec sx(ex.size(), 0.0), sx2(ex.size(), 0.0), sy(ey.size(), 0.0), sy2(ey.size(), 0.0);
    Rng rng(10);
    for (std::size_t m = 0; m < M; ++m) {
        const Vec gx = p->grad_x(x, y, rng), gy = p->grad_y(x, y, rng);
        for (std::size_t j = 0; j < gx.size(); ++j) {
            sx[j] += gx[j];
            sx2[j] += gx[j] * gx[j];
        }
        for (std::size_t j = 0; j < gy.size(); ++j) {
            sy[j] += gy[j];
            sy2[j] += gy[j] * gy[j];
        }
    }
    auto check = [&](const Vec& s, const Vec& s2, const Vec& exact) {
        for (std::size_t j = 0; j < exact.size(); ++j) {
            const double mean = s[j] / M, var = s2[j] / M - mean * mean;
            EXPECT_NEAR(mean, exact[j], 4 * std::sqrt(std::max(var, 0.0) / M) + 1e-12) << j;
        }
    };
    check(sx, sx2, ex);
    check(sy, sy2, ey);
}

TEST(DroProblem, DualProxStaysFeasible) {
    const auto p = build_dro_problem(small_dataset(), small_config());
    std::mt19937_64 g(11);
    for (int rep = 0; rep < 200; ++rep) {
        const Vec y = p->prox_y(random_vec(p->ny(), g, 0.3), 0.01 + rep * 0.01);
        EXPECT_TRUE(simplex_ball_feasibility(y, p->dual_set()).ok(1e-10));
    }
    EXPECT_THROW(build_dro_problem(small_dataset(), small_config(41)), std::invalid_argument);
    DroConfig bad = small_config();
    bad.r = -1;
    EXPECT_THROW(build_dro_problem(small_dataset(), bad), std::invalid_argument);
}

TEST(DroGapTest, ReferenceAndLowerBound) {
    const auto p = build_dro_problem(small_dataset(), small_config());
    const ReferenceSolution ref = dro_reference(*p);
    EXPECT_LE(dro_gap(*p, ref.x, ref.y), 1e-6);
    const double g0 = dro_gap(*p, Vec(p->nx(), 0.0), p->uniform_y());
    EXPECT_GT(g0, 0.0);
    std::mt19937_64 g(12);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec x = random_vec(p->nx(), g);
        const Vec y = p->project_y(random_vec(p->ny(), g, 0.1));
        const double gap = dro_gap(*p, x, y);
        EXPECT_GE(gap, -1e-9);
        EXPECT_GE(gap, p->config().mu_x / 2 * dist_sq(x, ref.x) - 1e-9);
    }
}

TEST(DroSolve, DeterministicContractionAtCertifiedRate) {
    const DroDataset ds = small_dataset();
    const auto p = build_dro_problem(ds, small_config(ds.n()));
    const ReferenceSolution ref = dro_reference(*p);
    const ScscResult t = scsc_explicit_params(p->profile());
    Rng rng(1);
    IterateState s = initial_state(Vec(p->nx(), 0.0), p->uniform_y());
    auto D = [&] { return dist_sq(s.x, ref.x) + dist_sq(s.y, ref.y); };
    const double d0 = D();
    std::vector<double> ds_k;
    for (int k = 1; k <= 2000; ++k) {
        sapd_step(s, t.params, *p, rng);
        if (k % 100 == 0) ds_k.push_back(D());
    }
    for (std::size_t i = 1; i < ds_k.size(); ++i)
        if (ds_k[i - 1] > 1e-18) {
            EXPECT_LT(ds_k[i], ds_k[i - 1]) << i;
        }
    // Linear-rate envelope with a generous constant for the initial transient.
    EXPECT_LE(ds_k.back(), 1e4 * d0 * std::pow(t.cert.rho, 2000.0) + 1e-18);
}

TEST(TestError, Examples) {
    DroDataset h;
    h.A = Matrix{{1, 0}, {-1, 0}, {2, 1}, {-3, 1}};
    h.b = {1, -1, 1, -1};
    EXPECT_EQ(test_error({1, 0}, h), 0.0);
    DroDataset flipped = h;
    for (double& b : flipped.b) b = -b;
    const Vec x{0.3, -2};
    EXPECT_NEAR(test_error(x, flipped), 1 - test_error(x, h), 1e-15);
    EXPECT_THROW(test_error({1, 0}, DroDataset{}), std::invalid_argument);

    // Random labels: error is a binomial proportion around 1/2.
    DroDataset rnd = synthetic_logistic(4000, 0, 5, 21, 0.5).first;
    std::mt19937_64 g(1);
    EXPECT_NEAR(test_error(random_vec(5, g), rnd), 0.5, 4 * 0.5 / std::sqrt(4000.0));
}
