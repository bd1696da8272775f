#include "hetpol/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <Eigen/Dense>

#include "hetpol/errors.hpp"

namespace hetpol {

SampleSummary summarize(std::span<const double> xs) {
    SampleSummary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    NeumaierSum sum;
    for (double x : xs) sum.add(x);
    s.mean = sum.value() / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        NeumaierSum sq;
        for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
        s.stddev = std::sqrt(sq.value() / static_cast<double>(xs.size() - 1));
        s.std_err = s.stddev / std::sqrt(static_cast<double>(xs.size()));
    }
    return s;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (phat + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
    HETPOL_REQUIRE(x.size() == y.size() && x.size() >= 2, "least_squares_line needs >= 2 paired points");
    const auto fit = weighted_polyfit(x, y, std::vector<double>(x.size(), 1.0), 1);
    return {fit.coef[0], fit.coef[1]};
}

PolyFit weighted_polyfit(std::span<const double> x, std::span<const double> y, std::span<const double> w, int degree) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index k = degree + 1;
    HETPOL_REQUIRE(y.size() == x.size() && w.size() == x.size(), "weighted_polyfit: size mismatch");
    HETPOL_REQUIRE(n >= k, "weighted_polyfit: fewer points than coefficients");

    // Centre x so the normal equations stay well conditioned.
    double shift = 0.0;
    for (double v : x) shift += v;
    shift /= static_cast<double>(n);

    Eigen::MatrixXd A(n, k);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
        double xp = 1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            A(i, j) = sw * xp;
            xp *= x[static_cast<std::size_t>(i)] - shift;
        }
        b(i) = sw * y[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd normal = A.transpose() * A;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const Eigen::VectorXd centred = ldlt.solve(A.transpose() * b);
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));

    PolyFit fit;
    fit.dof = static_cast<int>(n - k);
    fit.chi2 = (A * centred - b).squaredNorm();

    // Expand sum_j c_j (x - s)^j back into powers of x.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);  // raw = T * centred
    for (Eigen::Index j = 0; j < k; ++j) {
        double binom = 1.0;
        for (Eigen::Index i = 0; i <= j; ++i) {
            T(i, j) = binom * std::pow(-shift, static_cast<double>(j - i));
            binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
        }
    }
    const Eigen::VectorXd raw = T * centred;
    const Eigen::MatrixXd raw_cov = T * cov * T.transpose();
    fit.coef.resize(static_cast<std::size_t>(k));
    fit.std_err.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.coef[static_cast<std::size_t>(j)] = raw(j);
        fit.std_err[static_cast<std::size_t>(j)] = std::sqrt(std::max(raw_cov(j, j), 0.0));
    }
    return fit;
}

double chi2_cdf(double x, int dof) {
    HETPOL_REQUIRE(dof >= 1, "chi2_cdf: dof must be >= 1");
    if (x <= 0.0) return 0.0;
    return boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
}

double normal_quantile(double prob) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

}  // namespace hetpol
