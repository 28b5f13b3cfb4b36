#include <doctest.h>

#include <cmath>
#include <random>

#include "tofcs/recovery.hpp"

using namespace tofcs;

namespace {

SensingMatrix duty_matrix(int n_bins, double d_min = 300.0, double d_max = 1300.0) {
    const double step = (d_max - d_min) / (n_bins - 1);
    DepthGrid grid(d_min, d_max, step);
    SensingMatrix A = build_sensing_matrix(grid, ModulationPlan::standard(), std::nullopt,
                                           AtomModel::DutyCycleCorrelation);
    REQUIRE(A.cols() == n_bins);
    return A;
}

// Exhaustive least-squares oracle over all single atoms and atom pairs
// with real coefficients, solved through the 2x2 normal equations of the
// stacked real system (an independent route from the QR-based solver in
// the implementation).
std::vector<int> exhaustive_pair_oracle(const Eigen::VectorXcd& c, const SensingMatrix& A) {
    const int n = A.cols();
    Eigen::VectorXd proxy(n);
    for (int j = 0; j < n; ++j) proxy(j) = A.entries.col(j).dot(c).real();

    int best_single = 0;
    double best_single_residual = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        const double r = (c - cplx(proxy(j), 0.0) * A.entries.col(j)).norm();
        if (r < best_single_residual) {
            best_single_residual = r;
            best_single = j;
        }
    }
    if (best_single_residual <= 1e-9 * c.norm()) return {best_single};

    std::vector<int> best_pair = {best_single};
    double best_residual = best_single_residual;
    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            const double g = A.entries.col(i).dot(A.entries.col(k)).real();
            const double det = 1.0 - g * g;
            if (std::abs(det) < 1e-12) continue;
            const double x1 = (proxy(i) - g * proxy(k)) / det;
            const double x2 = (proxy(k) - g * proxy(i)) / det;
            const double r = (c - cplx(x1, 0.0) * A.entries.col(i) -
                              cplx(x2, 0.0) * A.entries.col(k))
                                 .norm();
            if (r < best_residual) {
                best_residual = r;
                best_pair = {i, k};
            }
        }
    }
    return best_pair;
}

std::vector<int> sorted_support(const SparseSolution& sol) {
    std::vector<int> s = sol.support;
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

TEST_CASE("k-means clustering of the dictionary") {
    SensingMatrix A = duty_matrix(101);

    SUBCASE("single cluster holds every atom, centroid is the normalized mean") {
        ClusteredDictionary dict = cluster_dictionary(A, 1, 3);
        for (int label : dict.labels) CHECK(label == 0);
        Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(A.rows());
        for (int j = 0; j < A.cols(); ++j) mean += A.entries.col(j);
        mean /= static_cast<double>(A.cols());
        mean.normalize();
        CHECK((dict.centroids[0] - mean).norm() <= 1e-9);
    }

    SUBCASE("k equal to the atom count gives singleton clusters") {
        ClusteredDictionary dict = cluster_dictionary(A, A.cols(), 3);
        for (const auto& members : dict.members) CHECK(members.size() == 1);
    }

    SUBCASE("partition structure and unit centroids") {
        ClusteredDictionary dict = cluster_dictionary(A, 8, 7);
        size_t total = 0;
        for (int k = 0; k < dict.k_clusters; ++k) {
            CHECK(!dict.members[k].empty());
            total += dict.members[k].size();
            CHECK(std::abs(dict.centroids[k].norm() - 1.0) <= 1e-9);
        }
        CHECK(total == static_cast<size_t>(A.cols()));
        for (int j = 0; j < A.cols(); ++j) {
            CHECK(dict.labels[j] >= 0);
            CHECK(dict.labels[j] < dict.k_clusters);
        }
    }

    SUBCASE("bounds are validated") {
        CHECK_THROWS_AS(cluster_dictionary(A, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(cluster_dictionary(A, A.cols() + 1, 1), std::invalid_argument);
    }
}

TEST_CASE("k-means beats random partitions on within-cluster scatter") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    SensingMatrix A = build_sensing_matrix(grid, ModulationPlan::standard(), std::nullopt,
                                           AtomModel::IdealSinusoid);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 7);

    auto wcss = [&](const std::vector<int>& labels, int k) {
        std::vector<Eigen::VectorXcd> centroids(k, Eigen::VectorXcd::Zero(A.rows()));
        std::vector<int> counts(k, 0);
        for (int j = 0; j < A.cols(); ++j) {
            centroids[labels[j]] += A.entries.col(j);
            ++counts[labels[j]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) centroids[c] /= static_cast<double>(counts[c]);
            const double norm = centroids[c].norm();
            if (norm > 0.0) centroids[c] /= norm;
        }
        double total = 0.0;
        for (int j = 0; j < A.cols(); ++j)
            total += (A.entries.col(j) - centroids[labels[j]]).squaredNorm();
        return total;
    };

    const double fitted = wcss(dict.labels, dict.k_clusters);
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> pick(0, 7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> labels(A.cols());
        for (auto& l : labels) l = pick(rng);
        CHECK(fitted <= wcss(labels, 8));
    }
}

TEST_CASE("cluster selection follows the best atom") {
    SensingMatrix A = duty_matrix(251);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 11);

    SUBCASE("an exact atom selects its own cluster") {
        for (int j : {0, 17, 100, 200, 250})
            CHECK(select_cluster(A.entries.col(j), dict) == dict.labels[j]);
    }

    SUBCASE("small perturbations do not change the winner") {
        std::mt19937 rng(4);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int j : {5, 60, 120, 249}) {
            Eigen::VectorXcd noise(A.rows());
            for (int m = 0; m < A.rows(); ++m) noise(m) = cplx(gauss(rng), gauss(rng));
            noise.normalize();
            const Eigen::VectorXcd c = A.entries.col(j) + 0.01 * noise;
            // Oracle: exhaustive correlation scan.
            int best = 0;
            double best_score = -1.0;
            for (int i = 0; i < A.cols(); ++i) {
                const double s = A.entries.col(i).dot(c).real();
                if (s > best_score) {
                    best_score = s;
                    best = i;
                }
            }
            CHECK(select_cluster(c, dict) == dict.labels[best]);
            CHECK(select_cluster(c, dict) == dict.labels[j]);
        }
    }

    SUBCASE("ties break toward the lower cluster id") {
        ClusteredDictionary tie;
        tie.matrix.entries = Eigen::MatrixXcd::Zero(4, 4);
        tie.matrix.entries.col(0) = Eigen::VectorXcd::Unit(4, 0);
        tie.matrix.entries.col(1) = Eigen::VectorXcd::Unit(4, 1);
        tie.matrix.entries.col(2) = Eigen::VectorXcd::Unit(4, 0);  // duplicate of col 0
        tie.matrix.entries.col(3) = Eigen::VectorXcd::Unit(4, 2);
        tie.matrix.column_norms = Eigen::VectorXd::Ones(4);
        tie.k_clusters = 2;
        tie.labels = {0, 0, 1, 1};
        tie.members = {{0, 1}, {2, 3}};
        tie.centroids = {Eigen::VectorXcd::Unit(4, 0), Eigen::VectorXcd::Unit(4, 1)};
        CHECK(select_cluster(Eigen::VectorXcd::Unit(4, 0), tie) == 0);
    }

    SUBCASE("zero observation is rejected") {
        CHECK_THROWS_AS(select_cluster(Eigen::VectorXcd::Zero(A.rows()), dict),
                        std::invalid_argument);
    }
}

TEST_CASE("cc_omp recovers exact atoms across all cluster boundaries") {
    SensingMatrix A = duty_matrix(251);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 11);
    for (int j = 0; j < A.cols(); j += 7) {
        SparseSolution sol = cc_omp(A.entries.col(j), dict, 3, 1e-9);
        REQUIRE(sol.support.size() == 1);
        CHECK(sol.support[0] == j);
        CHECK(std::abs(sol.coefficients(0) - cplx(1.0, 0.0)) <= 1e-9);
        CHECK(sol.residual_norm <= 1e-9);
        CHECK(sol.cluster_id == dict.labels[j]);
    }
}

TEST_CASE("cc_omp separates two noiseless paths") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    SensingMatrix A = build_sensing_matrix(grid, ModulationPlan::standard(), std::nullopt,
                                           AtomModel::DutyCycleCorrelation);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 7);

    // Bins 200 and 600: depths 500 mm and 900 mm, amplitudes 1.0 and 0.4.
    Eigen::VectorXcd c =
        1.0 * A.unnormalized_column(200) + 0.4 * A.unnormalized_column(600);

    SparseSolution sol = cc_omp(c, dict, 2, 0.0);
    CHECK(sorted_support(sol) == std::vector<int>{200, 600});
    Eigen::VectorXcd dense = to_dense_amplitudes(sol, A);
    CHECK(std::abs(dense(200) - cplx(1.0, 0.0)) <= 1e-6);
    CHECK(std::abs(dense(600) - cplx(0.4, 0.0)) <= 1e-6);

    // A third iteration has nothing left to explain.
    SparseSolution sol3 = cc_omp(c, dict, 3, 0.0);
    CHECK(sol3.residual_norm <= 1e-9);
    if (sol3.support.size() == 3) CHECK(std::abs(sol3.coefficients(2)) <= 1e-6);
}

TEST_CASE("cc_omp and omp_full match the exhaustive pair oracle when resolvable") {
    // Returns closer than the correlation footprint (~150 mm at 5% duty)
    // merge into one peak, and returns half the unambiguous range apart
    // anti-correlate; inside the resolvable band greedy pursuit and the
    // exhaustive oracle must agree exactly.
    SensingMatrix A = duty_matrix(250);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 5);
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> bin(0, 249);
    std::uniform_int_distribution<int> sep(40, 110);  // 160..440 mm at this step
    std::uniform_real_distribution<double> amp(0.2, 1.0);

    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n_paths = 1 + (trial % 2);
        const int b1 = bin(rng);
        const int b2 = b1 + sep(rng);
        if (n_paths == 2 && b2 > 249) continue;
        Eigen::VectorXcd c = A.unnormalized_column(b1);
        std::vector<int> truth = {b1};
        if (n_paths == 2) {
            c += amp(rng) * A.unnormalized_column(b2);
            truth.push_back(b2);
        }
        std::sort(truth.begin(), truth.end());

        const std::vector<int> oracle = exhaustive_pair_oracle(c, A);
        std::vector<int> oracle_sorted = oracle;
        std::sort(oracle_sorted.begin(), oracle_sorted.end());
        CHECK(oracle_sorted == truth);

        SparseSolution cc = cc_omp(c, dict, n_paths, 1e-9);
        SparseSolution full = omp_full(c, A, n_paths, 1e-9);
        CHECK(sorted_support(cc) == oracle_sorted);
        CHECK(sorted_support(full) == oracle_sorted);
        ++checked;
    }
    CHECK(checked >= 25);
}

TEST_CASE("cc_omp residual is monotone and support stays in searched clusters") {
    SensingMatrix A = duty_matrix(251);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 11);
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> bin(0, 250);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXcd c = A.unnormalized_column(bin(rng)) +
                             0.5 * A.unnormalized_column(bin(rng));
        for (int m = 0; m < A.rows(); ++m)
            c(m) += 0.002 * cplx(gauss(rng), gauss(rng));

        OmpInstrumentation instr;
        SparseSolution sol = cc_omp(c, dict, 4, 0.0, 2, &instr);

        for (size_t i = 1; i < instr.residual_norms.size(); ++i)
            CHECK(instr.residual_norms[i] <= instr.residual_norms[i - 1] + 1e-12);

        // Every selected atom lies in a searched cluster or its margin.
        REQUIRE(instr.searched_clusters.size() >= sol.support.size());
        for (size_t i = 0; i < sol.support.size(); ++i) {
            bool reachable = false;
            for (int cluster : instr.searched_clusters[i]) {
                if (cluster < 0) continue;
                for (int j : dict.members[cluster])
                    if (std::abs(j - sol.support[i]) <= 2) reachable = true;
            }
            CHECK(reachable);
        }

        // Residual norm stored on the solution is consistent.
        Eigen::VectorXcd r = c;
        for (size_t i = 0; i < sol.support.size(); ++i)
            r -= sol.coefficients(static_cast<Eigen::Index>(i)) *
                 A.entries.col(sol.support[i]);
        CHECK(std::abs(r.norm() - sol.residual_norm) <= 1e-9);
    }
}

TEST_CASE("cc_omp per-iteration work scales with the cluster size") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    SensingMatrix A = build_sensing_matrix(grid, ModulationPlan::standard(), std::nullopt,
                                           AtomModel::DutyCycleCorrelation);
    const int n = A.cols();

    auto mean_work = [&](int k_clusters) {
        ClusteredDictionary dict = cluster_dictionary(A, k_clusters, 13);
        size_t max_cluster = 0;
        for (const auto& m : dict.members) max_cluster = std::max(max_cluster, m.size());
        OmpInstrumentation instr;
        Eigen::VectorXcd c = A.unnormalized_column(120) + 0.4 * A.unnormalized_column(700);
        cc_omp(c, dict, 3, 0.0, 2, &instr);
        double total = 0.0;
        for (size_t i = 0; i < instr.correlations_per_iteration.size(); ++i) {
            // Bounded by the cluster plus its dilation and the centroid scan.
            CHECK(instr.correlations_per_iteration[i] <=
                  static_cast<long>(5 * max_cluster + k_clusters));
            CHECK(instr.correlations_per_iteration[i] < n / 2);
            total += static_cast<double>(instr.correlations_per_iteration[i]);
        }
        return total / instr.correlations_per_iteration.size();
    };

    // Twice the clusters, roughly half the per-iteration correlations.
    CHECK(mean_work(16) < mean_work(8));
}

TEST_CASE("cc_omp scale equivariance") {
    SensingMatrix A = duty_matrix(251);
    ClusteredDictionary dict = cluster_dictionary(A, 8, 11);
    Eigen::VectorXcd c = A.unnormalized_column(60) + 0.3 * A.unnormalized_column(180);

    SparseSolution base = cc_omp(c, dict, 3, 1e-6);
    SparseSolution scaled = cc_omp(3.7 * c, dict, 3, 1e-6);
    REQUIRE(base.support == scaled.support);
    for (Eigen::Index i = 0; i < base.coefficients.size(); ++i)
        CHECK(std::abs(scaled.coefficients(i) - 3.7 * base.coefficients(i)) <= 1e-9);

    const DepthEstimate e1 = extract_depth_index(base, 3, 3);
    const DepthEstimate e2 = extract_depth_index(scaled, 3, 3);
    CHECK(e1.depth_index == doctest::Approx(e2.depth_index).epsilon(1e-12));
}

TEST_CASE("duplicate atoms never destabilize cc_omp") {
    // After each least-squares update the residual is orthogonal to the
    // fitted span, so an atom already representable by the support scores
    // ~0 and is never re-picked; duplicates leave the solution finite and
    // the representable part exactly recovered.
    ClusteredDictionary dict;
    dict.matrix.entries = Eigen::MatrixXcd::Zero(6, 3);
    dict.matrix.entries.col(0) = Eigen::VectorXcd::Unit(6, 0);
    dict.matrix.entries.col(1) = Eigen::VectorXcd::Unit(6, 0);  // duplicate
    dict.matrix.entries.col(2) = Eigen::VectorXcd::Unit(6, 1);
    dict.matrix.column_norms = Eigen::VectorXd::Ones(3);
    dict.k_clusters = 1;
    dict.labels = {0, 0, 0};
    dict.members = {{0, 1, 2}};
    dict.centroids = {Eigen::VectorXcd::Unit(6, 0)};

    Eigen::VectorXcd c = Eigen::VectorXcd::Unit(6, 0) + Eigen::VectorXcd::Unit(6, 1) * 0.5;
    SparseSolution sol = cc_omp(c, dict, 3, 0.0);
    CHECK(sol.residual_norm <= 1e-12);
    CHECK(sorted_support(sol) == std::vector<int>{0, 2});
    for (Eigen::Index i = 0; i < sol.coefficients.size(); ++i)
        CHECK(std::isfinite(std::abs(sol.coefficients(i))));
}

TEST_CASE("baseline solvers find the dominant atom") {
    SensingMatrix A = duty_matrix(120);
    const int j = 77;
    const Eigen::VectorXcd c = A.entries.col(j);

    SolverConfig cfg;
    for (SolverMethod method :
         {SolverMethod::OMP_full, SolverMethod::CoSaMP, SolverMethod::FISTA}) {
        SolverConfig params = cfg;
        params.k_sparse = 1;
        params.lambda = 1e-4;
        SparseSolution sol = solve_baseline(method, c, A, 1, params);
        REQUIRE(!sol.support.empty());
        Eigen::Index strongest = 0;
        sol.coefficients.cwiseAbs().maxCoeff(&strongest);
        CHECK(sol.support[static_cast<size_t>(strongest)] == j);
    }
    CHECK_THROWS_AS(solve_baseline(SolverMethod::Naive, c, A, 1, cfg), std::invalid_argument);
}

TEST_CASE("cosamp exact support on an incoherent dictionary") {
    // CoSaMP's batch identify needs a well-conditioned dictionary; random
    // unit atoms give one. (On the duty-cycle dictionary neighboring atoms
    // are nearly dependent and the prune step may land one bin off.)
    std::mt19937 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SensingMatrix A;
    A.entries.resize(20, 120);
    for (int j = 0; j < 120; ++j) {
        for (int m = 0; m < 20; ++m) A.entries(m, j) = cplx(gauss(rng), gauss(rng));
        A.entries.col(j).normalize();
    }
    A.column_norms = Eigen::VectorXd::Ones(120);

    std::uniform_int_distribution<int> bin(0, 119);
    for (int trial = 0; trial < 25; ++trial) {
        const int b1 = bin(rng);
        int b2 = bin(rng);
        if (b1 == b2) continue;
        Eigen::VectorXcd c = A.entries.col(b1) + 0.5 * A.entries.col(b2);
        SparseSolution sol = cosamp(c, A, 2, {});
        std::vector<int> expected = {std::min(b1, b2), std::max(b1, b2)};
        CHECK(sorted_support(sol) == expected);
        CHECK(sol.residual_norm <= 1e-6 * c.norm());
    }
}

TEST_CASE("fista behavior") {
    SensingMatrix A = duty_matrix(120);
    const Eigen::VectorXcd c =
        A.unnormalized_column(30) + 0.4 * A.unnormalized_column(90);

    SUBCASE("objective at the solution beats the zero vector") {
        FistaParams params;
        params.lambda = 1e-3;
        SparseSolution sol = fista(c, A, params);
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(A.cols());
        for (size_t i = 0; i < sol.support.size(); ++i)
            x(sol.support[i]) = sol.coefficients(static_cast<Eigen::Index>(i));
        const double objective =
            (A.entries * x - c).squaredNorm() + params.lambda * x.cwiseAbs().sum();
        CHECK(objective <= c.squaredNorm());
    }

    SUBCASE("an overwhelming l1 weight zeroes the solution") {
        FistaParams params;
        params.lambda = 1e9;
        SparseSolution sol = fista(c, A, params);
        CHECK(sol.support.empty());
        CHECK(sol.residual_norm == doctest::Approx(c.norm()));
    }

    SUBCASE("iteration cap flags non-convergence") {
        FistaParams params;
        params.lambda = 1e-6;
        params.max_iterations = 1;
        SparseSolution sol = fista(c, A, params);
        CHECK(!sol.converged);
    }

    SUBCASE("power iteration agrees with the exact largest squared singular value") {
        const double estimated = largest_squared_singular_value(A.entries);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A.entries);
        const double exact = svd.singularValues()(0) * svd.singularValues()(0);
        CHECK(estimated == doctest::Approx(exact).epsilon(1e-6));
    }
}

TEST_CASE("depth index extraction") {
    SUBCASE("single atom") {
        SparseSolution sol;
        sol.support = {347};
        sol.coefficients.resize(1);
        sol.coefficients(0) = cplx(0.8, 0.0);
        const DepthEstimate est = extract_depth_index(sol, 3, 3);
        CHECK(est.depth_index == doctest::Approx(347.0));
        CHECK(est.primary_amplitude == doctest::Approx(0.8));
        CHECK(est.secondary_paths.empty());
    }

    SUBCASE("weighted centroid of neighbors") {
        SparseSolution sol;
        sol.support = {100, 101};
        sol.coefficients.resize(2);
        sol.coefficients(0) = cplx(0.6, 0.0);
        sol.coefficients(1) = cplx(0.4, 0.0);
        const DepthEstimate est = extract_depth_index(sol, 2, 3);
        CHECK(est.depth_index == doctest::Approx(100.4));
    }

    SUBCASE("far atoms become secondary paths") {
        SparseSolution sol;
        sol.support = {100, 101, 600};
        sol.coefficients.resize(3);
        sol.coefficients(0) = cplx(0.6, 0.0);
        sol.coefficients(1) = cplx(0.4, 0.0);
        sol.coefficients(2) = cplx(0.5, 0.0);
        const DepthEstimate est = extract_depth_index(sol, 3, 3);
        CHECK(est.depth_index == doctest::Approx(100.4));
        REQUIRE(est.secondary_paths.size() == 1);
        CHECK(est.secondary_paths[0].first == doctest::Approx(600.0));
        CHECK(est.secondary_paths[0].second == doctest::Approx(0.5));
    }

    SUBCASE("empty solutions are rejected") {
        SparseSolution sol;
        CHECK_THROWS_AS(extract_depth_index(sol, 3, 3), std::invalid_argument);
    }
}

TEST_CASE("index to depth lookup") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    bool clamped = false;
    CHECK(index_to_depth(0.0, grid, &clamped) == doctest::Approx(300.0));
    CHECK(!clamped);
    CHECK(index_to_depth(100.4, grid, &clamped) == doctest::Approx(400.4));
    CHECK(index_to_depth(1000.0, grid, &clamped) == doctest::Approx(1300.0));
    CHECK(!clamped);
    CHECK(index_to_depth(1200.0, grid, &clamped) == doctest::Approx(1300.0));
    CHECK(clamped);
    CHECK(index_to_depth(-3.0, grid, &clamped) == doctest::Approx(300.0));
    CHECK(clamped);
}

TEST_CASE("naive four-phase decoder") {
    ModulationPlan plan = ModulationPlan::standard();

    SUBCASE("direct formula on crafted taps") {
        RawFourPhase raw = render_four_phase_pixel({{650.0, 0.0}}, plan, std::nullopt,
                                                   NoiseModel::none(), 1);
        raw.subtracted = true;
        // Phase 0 at config 0 (reference phase 0): zero depth.
        raw.taps[0][0][0] = 1.0;
        raw.taps[0][1][0] = 0.0;
        raw.taps[0][2][0] = 0.0;
        raw.taps[0][3][0] = 0.0;
        const NaiveDepth zero = naive_four_phase_depth(raw, 0, 0, 0, plan.f_mod_hz);
        CHECK(zero.valid);
        CHECK(zero.range_mm == doctest::Approx(0.0));

        // Phase pi: c / (4 f) = 749.481145 mm.
        raw.taps[0][0][0] = -1.0;
        const NaiveDepth half = naive_four_phase_depth(raw, 0, 0, 0, plan.f_mod_hz);
        CHECK(half.range_mm == doctest::Approx(749.481145).epsilon(1e-9));

        // Zero signal: undefined phase.
        raw.taps[0][0][0] = 0.0;
        CHECK(!naive_four_phase_depth(raw, 0, 0, 0, plan.f_mod_hz).valid);
    }

    SUBCASE("sinusoidal single-path round trip") {
        RawFourPhase raw = render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt,
                                                   NoiseModel::none(), 1,
                                                   AtomModel::IdealSinusoid);
        RawFourPhase sub = baseline_subtract(raw);
        for (int m = 0; m < sub.n_configs(); ++m) {
            const NaiveDepth d = naive_four_phase_depth(sub, 0, 0, m, plan.f_mod_hz);
            REQUIRE(d.valid);
            CHECK(d.range_mm == doctest::Approx(600.0).epsilon(0.5 / 600.0));
        }
        const NaiveDepth coherent = naive_depth_coherent(sub, 0, 0);
        REQUIRE(coherent.valid);
        CHECK(coherent.range_mm == doctest::Approx(600.0).epsilon(0.5 / 600.0));
    }
}
