#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "tofcs/sensing.hpp"
#include "tofcs/simulator.hpp"
#include "tofcs/types.hpp"

namespace tofcs {

/// Sensing matrix partitioned by K-Means over its atoms. Atoms are treated
/// as 2L-dimensional real feature vectors (real and imaginary parts).
struct ClusteredDictionary {
    SensingMatrix matrix;
    int k_clusters = 1;
    std::vector<int> labels;              // per-column cluster id
    std::vector<Eigen::VectorXcd> centroids;  // unit-norm, length L
    std::vector<std::vector<int>> members;    // columns per cluster, ascending

    int n_atoms() const { return matrix.cols(); }
};

/// K-Means over dictionary atoms with k-means++ seeding and Lloyd updates
/// (converged when the largest centroid shift drops below 1e-9, capped at
/// 300 iterations). An emptied cluster is re-seeded at the point farthest
/// from its assigned centroid, so every cluster stays non-empty.
ClusteredDictionary cluster_dictionary(const SensingMatrix& A, int k_clusters,
                                       std::uint64_t seed);

/// Cluster whose best atom has the highest positive real correlation with
/// the observation; ties break toward the lower cluster id.
int select_cluster(const Eigen::VectorXcd& c, const ClusteredDictionary& dict);

/// Support, coefficients and residual produced by a sparse solver.
/// Coefficients are expressed against the unit-norm dictionary atoms and
/// are real-valued (stored as complex with zero imaginary part): the
/// backscatter amplitudes the solvers model are nonnegative reals, and a
/// complex coefficient would alias depth by a quarter wavelength.
struct SparseSolution {
    std::vector<int> support;       // in selection order
    Eigen::VectorXcd coefficients;  // aligned with support
    double residual_norm = 0.0;
    int iterations = 0;
    int cluster_id = -1;            // initial cluster, when cluster-constrained
    bool stalled = false;           // rank-deficient selection was dropped
    bool converged = true;          // false when an iteration cap was hit
};

/// Optional instrumentation: per-iteration count of atom correlations
/// evaluated during selection, which clusters each iteration searched
/// (primary and runner-up, -1 when absent), and the residual norm after
/// each least-squares update.
struct OmpInstrumentation {
    std::vector<long> correlations_per_iteration;
    std::vector<std::array<int, 2>> searched_clusters;
    std::vector<double> residual_norms;
};

/// Cluster-constrained OMP. The first iteration searches the cluster chosen
/// by select_cluster; each later iteration re-selects the active cluster by
/// centroid correlation against the residual. The searched candidate set is
/// the active cluster's atoms dilated by `neighbor_margin` grid bins, so a
/// true return sitting on a cluster boundary stays reachable.
SparseSolution cc_omp(const Eigen::VectorXcd& c, const ClusteredDictionary& dict,
                      int k_sparse, double residual_tol, int neighbor_margin = 2,
                      OmpInstrumentation* instrumentation = nullptr);

/// Plain OMP over the full dictionary (cc_omp without the cluster restriction).
SparseSolution omp_full(const Eigen::VectorXcd& c, const SensingMatrix& A,
                        int k_sparse, double residual_tol);

struct CoSaMPParams {
    int max_iterations = 50;
    double residual_tol = 1e-6;
};

/// Compressive sampling matching pursuit: identify 2k, merge with the
/// current support, least-squares, prune to k; returns the best iterate.
SparseSolution cosamp(const Eigen::VectorXcd& c, const SensingMatrix& A, int k_sparse,
                      const CoSaMPParams& params = {});

struct FistaParams {
    double lambda = 1e-3;
    int max_iterations = 500;
    double step_size = 0.0;         // 0: 1 / sigma_max^2 via power iteration
    double support_rel_tol = 1e-6;  // |x_j| > tol * max|x| enters the support
};

/// Accelerated proximal gradient on 0.5 ||A x - c||^2 + lambda ||x||_1 over
/// real coefficients, with magnitude-shrinking soft thresholding.
SparseSolution fista(const Eigen::VectorXcd& c, const SensingMatrix& A,
                     const FistaParams& params = {});

/// Largest squared singular value of A, estimated by power iteration.
double largest_squared_singular_value(const Eigen::MatrixXcd& A, int iterations = 100,
                                      std::uint64_t seed = 1);

enum class SolverMethod { CC_OMP, OMP_full, CoSaMP, FISTA, Naive };

SolverMethod solver_method_from_string(const std::string& name);
std::string to_string(SolverMethod method);

struct SolverConfig {
    SolverMethod method = SolverMethod::CC_OMP;
    int k_clusters = 8;
    int k_sparse = 3;
    double residual_tol = 1e-3;
    int k_top = 3;
    int window = 3;
    int neighbor_margin = 2;
    double lambda = 1e-3;
    int max_iterations = 500;
    std::uint64_t seed = 0;
};

/// Dispatch to one of the unconstrained baselines.
SparseSolution solve_baseline(SolverMethod method, const Eigen::VectorXcd& c,
                              const SensingMatrix& A, int k_sparse, const SolverConfig& params);

/// Continuous depth estimate extracted from a sparse solution.
struct DepthEstimate {
    double depth_index = 0.0;       // fractional bin
    double depth_mm = 0.0;          // filled by index_to_depth when grid known
    double primary_amplitude = 0.0; // sum of |x| over the centroid set
    std::vector<std::pair<double, double>> secondary_paths;  // (bin index, |x|)
    bool clamped = false;
};

/// Top-K weighted centroid around the dominant atom: gather up to k_top
/// atoms within +/- window bins of the largest-|x| atom and average their
/// indices weighted by coefficient magnitude. Support entries outside the
/// window are reported as secondary paths.
DepthEstimate extract_depth_index(const SparseSolution& sol, int k_top, int window);

/// Map a fractional bin index to depth through the grid lookup (linear:
/// d_min + index * step). Out-of-range indices clamp and set *clamped.
double index_to_depth(double depth_index, const DepthGrid& grid, bool* clamped = nullptr);

/// Full per-pixel estimate: extract_depth_index + index_to_depth, with
/// secondary paths mapped to mm.
DepthEstimate estimate_depth(const SparseSolution& sol, const DepthGrid& grid,
                             int k_top, int window);

/// Expand a solution to a dense backscatter vector in physical amplitude
/// units (coefficients divided by the recorded column norms).
Eigen::VectorXcd to_dense_amplitudes(const SparseSolution& sol, const SensingMatrix& A);

/// One recovered return path in physical units.
struct RecoveredPath {
    double depth_index = 0.0;  // fractional bin (weighted centroid)
    double amplitude = 0.0;    // physical units
};

/// Consolidate a solution into discrete return paths by repeatedly applying
/// the Top-K weighted centroid: take the strongest remaining coefficient,
/// merge support entries within +/- window bins of it, and emit their
/// centroid and summed physical amplitude. Strongest path first.
std::vector<RecoveredPath> consolidate_paths(const SparseSolution& sol, const SensingMatrix& A,
                                             int window);

/// Dense backscatter vector with each consolidated path placed at its
/// nearest bin.
Eigen::VectorXcd paths_to_dense(const std::vector<RecoveredPath>& paths, const DepthGrid& grid);

/// Classical AMCW decoder for a single phase configuration:
/// phi = atan2(I90 - I270, I0 - I180) + phi_m wrapped to [0, 2pi),
/// range = c * phi / (4 pi f). Returns the radial range in mm.
struct NaiveDepth {
    double range_mm = 0.0;
    bool valid = false;
};
NaiveDepth naive_four_phase_depth(const RawFourPhase& raw, int x, int y, int config,
                                  double f_mod_hz);

/// Coherent multi-config decoder: sum_m c_m exp(j phi_m) -> phase -> range.
/// This is the fundamental-harmonic phase estimate over all configurations.
NaiveDepth naive_depth_coherent(const RawFourPhase& raw, int x, int y);

}  // namespace tofcs
