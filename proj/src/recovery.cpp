#include "tofcs/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tofcs/rng.hpp"

namespace tofcs {

namespace {

// Backscatter amplitudes are real and nonnegative, so the recovery runs on
// the stacked real form of the complex measurements: atoms and observations
// become 2L-dimensional real vectors and coefficients stay real. A complex
// coefficient would alias depth by a quarter of the unambiguous range (a
// pi/2 delay shift only rotates the four-tap response by j), which the real
// formulation rules out.
double real_dot(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return a.dot(b).real();
}

// Real-coefficient least squares on the selected columns via rank-revealing
// QR over the stacked (Re, Im) system.
Eigen::VectorXcd ls_on_support(const Eigen::MatrixXcd& A, const std::vector<int>& support,
                               const Eigen::VectorXcd& c, Eigen::Index* rank_out) {
    const Eigen::Index rows = A.rows();
    Eigen::MatrixXd stacked(2 * rows, static_cast<Eigen::Index>(support.size()));
    for (size_t i = 0; i < support.size(); ++i) {
        stacked.col(static_cast<Eigen::Index>(i)) << A.col(support[i]).real(),
            A.col(support[i]).imag();
    }
    Eigen::VectorXd rhs(2 * rows);
    rhs << c.real(), c.imag();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
    qr.setThreshold(1e-10);
    if (rank_out) *rank_out = qr.rank();
    return qr.solve(rhs).cast<cplx>();
}

Eigen::VectorXcd residual_for(const Eigen::MatrixXcd& A, const std::vector<int>& support,
                              const Eigen::VectorXcd& x, const Eigen::VectorXcd& c) {
    Eigen::VectorXcd r = c;
    for (size_t i = 0; i < support.size(); ++i)
        r -= x(static_cast<Eigen::Index>(i)) * A.col(support[i]);
    return r;
}

// Candidate atoms of a cluster dilated by `margin` grid bins.
std::vector<int> dilated_members(const std::vector<int>& members, int margin, int n_atoms,
                                 std::vector<char>& scratch) {
    std::fill(scratch.begin(), scratch.end(), 0);
    for (int j : members)
        for (int d = -margin; d <= margin; ++d) {
            const int i = j + d;
            if (i >= 0 && i < n_atoms) scratch[i] = 1;
        }
    std::vector<int> out;
    out.reserve(members.size() * (2 * margin + 1));
    for (int i = 0; i < n_atoms; ++i)
        if (scratch[i]) out.push_back(i);
    return out;
}

// Shared greedy loop. When `dict` is null the candidate set is the full
// dictionary; otherwise iteration 0 searches `first_cluster` and later
// iterations re-select the active cluster by centroid correlation.
SparseSolution greedy_omp(const Eigen::VectorXcd& c, const Eigen::MatrixXcd& A,
                          const ClusteredDictionary* dict, int first_cluster,
                          int k_sparse, double residual_tol, int neighbor_margin,
                          OmpInstrumentation* instr) {
    if (k_sparse < 1) throw std::invalid_argument("omp: k_sparse must be >= 1");
    if (residual_tol < 0.0) throw std::invalid_argument("omp: residual_tol must be >= 0");
    const int n = static_cast<int>(A.cols());
    const double c_norm = c.norm();
    if (c_norm == 0.0) throw std::invalid_argument("omp: zero observation");

    SparseSolution sol;
    sol.cluster_id = dict ? first_cluster : -1;
    Eigen::VectorXcd r = c;
    Eigen::VectorXcd x;
    std::vector<char> scratch(dict ? static_cast<size_t>(n) : 0);
    std::vector<char> in_support(static_cast<size_t>(n), 0);

    for (int iter = 0; iter < k_sparse; ++iter) {
        long correlations = 0;
        int active = -1;
        int second = -1;
        std::vector<int> candidates;
        if (dict) {
            if (iter == 0) {
                active = first_cluster;
                candidates = dilated_members(dict->members[active], neighbor_margin, n, scratch);
            } else {
                // Re-select by the centroids' positive real correlation with
                // the residual (a negative correlation cannot host a
                // nonnegative amplitude); search the best two clusters so a
                // return diluted across a cluster boundary stays reachable.
                double best = 0.0, second_best = 0.0;
                for (int k = 0; k < dict->k_clusters; ++k) {
                    const double score = real_dot(dict->centroids[k], r);
                    ++correlations;
                    if (score > best) {
                        second = active;
                        second_best = best;
                        best = score;
                        active = k;
                    } else if (score > second_best) {
                        second = k;
                        second_best = score;
                    }
                }
                if (active >= 0) {
                    std::vector<int> members = dict->members[active];
                    if (second >= 0)
                        members.insert(members.end(), dict->members[second].begin(),
                                       dict->members[second].end());
                    candidates = dilated_members(members, neighbor_margin, n, scratch);
                } else {
                    // No centroid faces the residual: it is a refinement
                    // dipole of the current fit, not a fresh return. Stay
                    // local to the clusters already holding the support.
                    std::vector<int> members;
                    std::vector<char> seen(static_cast<size_t>(dict->k_clusters), 0);
                    for (int s : sol.support) {
                        const int cluster = dict->labels[s];
                        if (seen[cluster]) continue;
                        seen[cluster] = 1;
                        if (active < 0) active = cluster;
                        members.insert(members.end(), dict->members[cluster].begin(),
                                       dict->members[cluster].end());
                    }
                    candidates = dilated_members(members, neighbor_margin, n, scratch);
                }
            }
        }
        if (instr && static_cast<int>(instr->searched_clusters.size()) == iter)
            instr->searched_clusters.push_back({active, second});

        // Only a positive correlation can carry a nonnegative amplitude.
        int best_j = -1;
        double best_score = 0.0;
        auto consider = [&](int j) {
            if (in_support[j]) return;
            const double score = real_dot(A.col(j), r);
            ++correlations;
            if (score > best_score) {
                best_score = score;
                best_j = j;
            }
        };
        if (dict)
            for (int j : candidates) consider(j);
        else
            for (int j = 0; j < n; ++j) consider(j);
        if (instr) instr->correlations_per_iteration.push_back(correlations);

        if (best_j < 0 || best_score <= 1e-14 * c_norm) break;  // residual orthogonal

        sol.support.push_back(best_j);
        in_support[best_j] = 1;
        Eigen::Index rank = 0;
        Eigen::VectorXcd x_new = ls_on_support(A, sol.support, c, &rank);
        if (rank < static_cast<Eigen::Index>(sol.support.size())) {
            in_support[sol.support.back()] = 0;
            sol.support.pop_back();
            sol.stalled = true;
            break;
        }
        x = x_new;
        r = residual_for(A, sol.support, x, c);
        sol.iterations = iter + 1;
        if (instr) instr->residual_norms.push_back(r.norm());
        if (r.norm() <= residual_tol * c_norm) break;
    }

    if (!sol.support.empty() && x.size() == 0)
        x = ls_on_support(A, sol.support, c, nullptr);
    sol.coefficients = sol.support.empty() ? Eigen::VectorXcd() : x;
    sol.residual_norm = sol.support.empty()
                            ? c_norm
                            : residual_for(A, sol.support, sol.coefficients, c).norm();
    return sol;
}

std::vector<int> top_k_indices(const Eigen::VectorXd& magnitudes, int k) {
    std::vector<int> idx(magnitudes.size());
    std::iota(idx.begin(), idx.end(), 0);
    const int kk = std::min<int>(k, static_cast<int>(idx.size()));
    std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(),
                      [&](int a, int b) {
                          if (magnitudes(a) != magnitudes(b)) return magnitudes(a) > magnitudes(b);
                          return a < b;
                      });
    idx.resize(kk);
    return idx;
}

}  // namespace

ClusteredDictionary cluster_dictionary(const SensingMatrix& A, int k_clusters,
                                       std::uint64_t seed) {
    const int n = A.cols();
    const int L = A.rows();
    if (k_clusters < 1 || k_clusters > n)
        throw std::invalid_argument("cluster_dictionary: need 1 <= k_clusters <= n_bins");

    const Eigen::MatrixXcd& atoms = A.entries;
    auto sqdist = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
        return (a - b).squaredNorm();  // Euclidean over the 2L real features
    };

    // k-means++ seeding
    RandomStream rng(seed, 0x6b6d);
    std::vector<Eigen::VectorXcd> centroids;
    centroids.reserve(k_clusters);
    centroids.push_back(atoms.col(static_cast<Eigen::Index>(rng.next_below(n))));
    Eigen::VectorXd d2(n);
    for (int j = 0; j < n; ++j) d2(j) = sqdist(atoms.col(j), centroids[0]);
    while (static_cast<int>(centroids.size()) < k_clusters) {
        const double total = d2.sum();
        int pick = 0;
        if (total > 0.0) {
            double target = rng.next_double() * total;
            for (int j = 0; j < n; ++j) {
                target -= d2(j);
                if (target <= 0.0) {
                    pick = j;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.next_below(n));
        }
        centroids.push_back(atoms.col(pick));
        for (int j = 0; j < n; ++j) d2(j) = std::min(d2(j), sqdist(atoms.col(j), centroids.back()));
    }
    for (auto& ctr : centroids) {
        const double norm = ctr.norm();
        if (norm > 0.0) ctr /= norm;
    }

    std::vector<int> labels(n, 0);
    constexpr int kMaxIterations = 300;
    constexpr double kShiftTol = 1e-9;

    for (int pass = 0; pass < kMaxIterations; ++pass) {
        // Assign to the nearest centroid (ties toward the lower id).
        for (int j = 0; j < n; ++j) {
            double best = std::numeric_limits<double>::infinity();
            int best_k = 0;
            for (int k = 0; k < k_clusters; ++k) {
                const double d = sqdist(atoms.col(j), centroids[k]);
                if (d < best) {
                    best = d;
                    best_k = k;
                }
            }
            labels[j] = best_k;
        }

        // Re-seed any emptied cluster at the point farthest from its centroid.
        std::vector<int> counts(k_clusters, 0);
        for (int j = 0; j < n; ++j) ++counts[labels[j]];
        for (int k = 0; k < k_clusters; ++k) {
            if (counts[k] > 0) continue;
            double farthest = -1.0;
            int pick = 0;
            for (int j = 0; j < n; ++j) {
                if (counts[labels[j]] <= 1) continue;  // keep donors non-empty
                const double d = sqdist(atoms.col(j), centroids[labels[j]]);
                if (d > farthest) {
                    farthest = d;
                    pick = j;
                }
            }
            --counts[labels[pick]];
            labels[pick] = k;
            ++counts[k];
            centroids[k] = atoms.col(pick);
        }

        // Update centroids: normalized mean atom per cluster.
        double max_shift = 0.0;
        std::vector<Eigen::VectorXcd> means(k_clusters, Eigen::VectorXcd::Zero(L));
        for (int j = 0; j < n; ++j) means[labels[j]] += atoms.col(j);
        for (int k = 0; k < k_clusters; ++k) {
            Eigen::VectorXcd next = means[k] / static_cast<double>(std::max(counts[k], 1));
            const double norm = next.norm();
            if (norm > 0.0) next /= norm;
            else next = centroids[k];
            max_shift = std::max(max_shift, (next - centroids[k]).norm());
            centroids[k] = next;
        }
        if (max_shift <= kShiftTol) break;
    }

    ClusteredDictionary dict;
    dict.matrix = A;
    dict.k_clusters = k_clusters;
    dict.labels = labels;
    dict.centroids = std::move(centroids);
    dict.members.assign(k_clusters, {});
    for (int j = 0; j < n; ++j) dict.members[labels[j]].push_back(j);
    for (int k = 0; k < k_clusters; ++k)
        if (dict.members[k].empty())
            throw std::runtime_error("cluster_dictionary: empty cluster survived re-seeding");
    return dict;
}

int select_cluster(const Eigen::VectorXcd& c, const ClusteredDictionary& dict) {
    if (c.norm() == 0.0) throw std::invalid_argument("select_cluster: zero observation");
    // Positive real correlation only: an anti-correlated atom (half the
    // unambiguous range away) cannot carry a nonnegative amplitude.
    std::vector<double> best_per_cluster(dict.k_clusters, -1.0);
    for (int j = 0; j < dict.n_atoms(); ++j) {
        const double score = real_dot(dict.matrix.entries.col(j), c);
        auto& best = best_per_cluster[dict.labels[j]];
        if (score > best) best = score;
    }
    int winner = 0;
    for (int k = 1; k < dict.k_clusters; ++k)
        if (best_per_cluster[k] > best_per_cluster[winner]) winner = k;
    return winner;
}

SparseSolution cc_omp(const Eigen::VectorXcd& c, const ClusteredDictionary& dict,
                      int k_sparse, double residual_tol, int neighbor_margin,
                      OmpInstrumentation* instrumentation) {
    const int first = select_cluster(c, dict);
    return greedy_omp(c, dict.matrix.entries, &dict, first, k_sparse, residual_tol,
                      neighbor_margin, instrumentation);
}

SparseSolution omp_full(const Eigen::VectorXcd& c, const SensingMatrix& A,
                        int k_sparse, double residual_tol) {
    return greedy_omp(c, A.entries, nullptr, -1, k_sparse, residual_tol, 0, nullptr);
}

SparseSolution cosamp(const Eigen::VectorXcd& c, const SensingMatrix& A, int k_sparse,
                      const CoSaMPParams& params) {
    if (k_sparse < 1) throw std::invalid_argument("cosamp: k_sparse must be >= 1");
    const Eigen::MatrixXcd& M = A.entries;
    const int n = static_cast<int>(M.cols());
    const double c_norm = c.norm();
    if (c_norm == 0.0) throw std::invalid_argument("cosamp: zero observation");

    std::vector<int> support;  // current pruned support
    Eigen::VectorXcd coeffs;   // aligned with support
    Eigen::VectorXcd r = c;

    std::vector<int> best_support;
    Eigen::VectorXcd best_coeffs;
    double best_residual = c_norm;
    int iterations = 0;
    bool converged = false;

    for (int t = 0; t < params.max_iterations; ++t) {
        // Identify: 2k strongest proxy entries, merged with current support.
        Eigen::VectorXd proxy = (M.adjoint() * r).real().cwiseAbs();
        std::vector<int> omega = top_k_indices(proxy, 2 * k_sparse);
        std::vector<char> in_t(static_cast<size_t>(n), 0);
        for (int j : omega) in_t[j] = 1;
        for (int j : support) in_t[j] = 1;
        std::vector<int> merged;
        for (int j = 0; j < n; ++j)
            if (in_t[j]) merged.push_back(j);

        Eigen::VectorXcd b = ls_on_support(M, merged, c, nullptr);

        // Prune to the k largest coefficients.
        Eigen::VectorXd mags = b.cwiseAbs();
        std::vector<int> keep = top_k_indices(mags, k_sparse);
        std::sort(keep.begin(), keep.end());
        std::vector<int> new_support;
        Eigen::VectorXcd new_coeffs(static_cast<Eigen::Index>(keep.size()));
        for (size_t i = 0; i < keep.size(); ++i) {
            new_support.push_back(merged[keep[i]]);
            new_coeffs(static_cast<Eigen::Index>(i)) = b(keep[i]);
        }

        r = residual_for(M, new_support, new_coeffs, c);
        const double r_norm = r.norm();
        iterations = t + 1;

        if (r_norm < best_residual) {
            best_residual = r_norm;
            best_support = new_support;
            best_coeffs = new_coeffs;
        }
        const bool same_support = (new_support == support);
        support = std::move(new_support);
        coeffs = std::move(new_coeffs);
        if (r_norm <= params.residual_tol * c_norm) {
            converged = true;
            break;
        }
        if (same_support) {  // fixed point
            converged = true;
            break;
        }
    }

    SparseSolution sol;
    sol.support = best_support;
    sol.coefficients = best_coeffs;
    sol.residual_norm = best_residual;
    sol.iterations = iterations;
    sol.converged = converged;
    return sol;
}

double largest_squared_singular_value(const Eigen::MatrixXcd& A, int iterations,
                                      std::uint64_t seed) {
    RandomStream rng(seed, 0x51);
    Eigen::VectorXcd v(A.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = cplx(rng.next_gaussian(), rng.next_gaussian());
    v.normalize();
    for (int t = 0; t < iterations; ++t) {
        Eigen::VectorXcd w = A.adjoint() * (A * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
    }
    return (A * v).squaredNorm();
}

SparseSolution fista(const Eigen::VectorXcd& c, const SensingMatrix& A,
                     const FistaParams& params) {
    const Eigen::MatrixXcd& M = A.entries;
    const int n = static_cast<int>(M.cols());
    if (params.lambda < 0.0) throw std::invalid_argument("fista: lambda must be >= 0");

    double step = params.step_size;
    if (step <= 0.0) {
        const double lmax = largest_squared_singular_value(M);
        if (lmax <= 0.0) throw std::invalid_argument("fista: zero matrix");
        step = 1.0 / lmax;
    }
    const double threshold = step * params.lambda;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = x;
    double momentum = 1.0;
    int iterations = 0;
    bool converged = false;

    for (int t = 0; t < params.max_iterations; ++t) {
        const Eigen::VectorXd grad = (M.adjoint() * (M * y.cast<cplx>() - c)).real();
        Eigen::VectorXd z = y - step * grad;
        // Soft threshold: shrink magnitudes toward zero, keep signs.
        Eigen::VectorXd x_next(n);
        for (int j = 0; j < n; ++j) {
            const double mag = std::abs(z(j));
            x_next(j) = (mag <= threshold) ? 0.0 : z(j) * ((mag - threshold) / mag);
        }
        const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x);
        const double change = (x_next - x).norm();
        x = std::move(x_next);
        momentum = momentum_next;
        iterations = t + 1;
        if (change <= 1e-10 * std::max(1.0, x.norm())) {
            converged = true;
            break;
        }
    }

    SparseSolution sol;
    sol.iterations = iterations;
    sol.converged = converged;
    const double x_max = x.cwiseAbs().maxCoeff();
    if (x_max > 0.0) {
        for (int j = 0; j < n; ++j)
            if (std::abs(x(j)) > params.support_rel_tol * x_max) sol.support.push_back(j);
        sol.coefficients.resize(static_cast<Eigen::Index>(sol.support.size()));
        for (size_t i = 0; i < sol.support.size(); ++i)
            sol.coefficients(static_cast<Eigen::Index>(i)) = cplx(x(sol.support[i]), 0.0);
    }
    sol.residual_norm = (M * x.cast<cplx>() - c).norm();
    return sol;
}

SolverMethod solver_method_from_string(const std::string& name) {
    if (name == "cc_omp") return SolverMethod::CC_OMP;
    if (name == "omp_full") return SolverMethod::OMP_full;
    if (name == "cosamp") return SolverMethod::CoSaMP;
    if (name == "fista") return SolverMethod::FISTA;
    if (name == "naive") return SolverMethod::Naive;
    throw std::invalid_argument("unknown solver method: " + name);
}

std::string to_string(SolverMethod method) {
    switch (method) {
        case SolverMethod::CC_OMP: return "cc_omp";
        case SolverMethod::OMP_full: return "omp_full";
        case SolverMethod::CoSaMP: return "cosamp";
        case SolverMethod::FISTA: return "fista";
        case SolverMethod::Naive: return "naive";
    }
    return "unknown";
}

SparseSolution solve_baseline(SolverMethod method, const Eigen::VectorXcd& c,
                              const SensingMatrix& A, int k_sparse, const SolverConfig& params) {
    switch (method) {
        case SolverMethod::OMP_full:
            return omp_full(c, A, k_sparse, params.residual_tol);
        case SolverMethod::CoSaMP: {
            CoSaMPParams p;
            p.max_iterations = params.max_iterations;
            p.residual_tol = params.residual_tol;
            return cosamp(c, A, k_sparse, p);
        }
        case SolverMethod::FISTA: {
            FistaParams p;
            p.lambda = params.lambda;
            p.max_iterations = params.max_iterations;
            return fista(c, A, p);
        }
        default:
            throw std::invalid_argument("solve_baseline: method is not a baseline solver");
    }
}

DepthEstimate extract_depth_index(const SparseSolution& sol, int k_top, int window) {
    if (sol.support.empty() || sol.coefficients.size() == 0)
        throw std::invalid_argument("extract_depth_index: empty solution");
    if (k_top < 1) throw std::invalid_argument("extract_depth_index: k_top must be >= 1");

    const Eigen::VectorXd mags = sol.coefficients.cwiseAbs();
    if (mags.maxCoeff() <= 0.0)
        throw std::invalid_argument("extract_depth_index: all-zero coefficients");

    Eigen::Index dominant = 0;
    mags.maxCoeff(&dominant);
    const int center_bin = sol.support[static_cast<size_t>(dominant)];

    // Entries within the window, strongest first.
    std::vector<int> local;
    for (size_t i = 0; i < sol.support.size(); ++i)
        if (std::abs(sol.support[i] - center_bin) <= window) local.push_back(static_cast<int>(i));
    std::sort(local.begin(), local.end(), [&](int a, int b) {
        if (mags(a) != mags(b)) return mags(a) > mags(b);
        return sol.support[a] < sol.support[b];
    });
    if (static_cast<int>(local.size()) > k_top) local.resize(k_top);

    DepthEstimate est;
    double weight_sum = 0.0, weighted_index = 0.0;
    std::vector<char> used(sol.support.size(), 0);
    for (int i : local) {
        weighted_index += mags(i) * sol.support[i];
        weight_sum += mags(i);
        used[i] = 1;
    }
    est.depth_index = weighted_index / weight_sum;
    est.primary_amplitude = weight_sum;
    for (size_t i = 0; i < sol.support.size(); ++i)
        if (!used[i] && mags(static_cast<Eigen::Index>(i)) > 0.0)
            est.secondary_paths.emplace_back(static_cast<double>(sol.support[i]),
                                             mags(static_cast<Eigen::Index>(i)));
    std::sort(est.secondary_paths.begin(), est.secondary_paths.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    return est;
}

double index_to_depth(double depth_index, const DepthGrid& grid, bool* clamped) {
    const double max_index = static_cast<double>(grid.n_bins() - 1);
    bool hit = false;
    if (depth_index < 0.0) {
        depth_index = 0.0;
        hit = true;
    } else if (depth_index > max_index) {
        depth_index = max_index;
        hit = true;
    }
    if (clamped) *clamped = hit;
    return grid.depth_of(depth_index);
}

DepthEstimate estimate_depth(const SparseSolution& sol, const DepthGrid& grid,
                             int k_top, int window) {
    DepthEstimate est = extract_depth_index(sol, k_top, window);
    est.depth_mm = index_to_depth(est.depth_index, grid, &est.clamped);
    for (auto& [bin, amp] : est.secondary_paths) bin = grid.depth_of(bin);
    return est;
}

Eigen::VectorXcd to_dense_amplitudes(const SparseSolution& sol, const SensingMatrix& A) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(A.cols());
    for (size_t i = 0; i < sol.support.size(); ++i) {
        const int bin = sol.support[i];
        g(bin) += sol.coefficients(static_cast<Eigen::Index>(i)) / A.column_norms(bin);
    }
    return g;
}

std::vector<RecoveredPath> consolidate_paths(const SparseSolution& sol, const SensingMatrix& A,
                                             int window) {
    std::vector<RecoveredPath> paths;
    std::vector<char> used(sol.support.size(), 0);
    const Eigen::VectorXd mags = sol.coefficients.cwiseAbs();

    for (;;) {
        int strongest = -1;
        for (size_t i = 0; i < sol.support.size(); ++i)
            if (!used[i] && mags(static_cast<Eigen::Index>(i)) > 0.0 &&
                (strongest < 0 || mags(static_cast<Eigen::Index>(i)) > mags(strongest)))
                strongest = static_cast<int>(i);
        if (strongest < 0) break;

        const int center = sol.support[static_cast<size_t>(strongest)];
        RecoveredPath path;
        double weight = 0.0, weighted_index = 0.0;
        for (size_t i = 0; i < sol.support.size(); ++i) {
            if (used[i] || std::abs(sol.support[i] - center) > window) continue;
            const double amp =
                mags(static_cast<Eigen::Index>(i)) / A.column_norms(sol.support[i]);
            weighted_index += mags(static_cast<Eigen::Index>(i)) * sol.support[i];
            weight += mags(static_cast<Eigen::Index>(i));
            path.amplitude += amp;
            used[i] = 1;
        }
        path.depth_index = weighted_index / weight;
        paths.push_back(path);
    }
    return paths;
}

Eigen::VectorXcd paths_to_dense(const std::vector<RecoveredPath>& paths, const DepthGrid& grid) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(grid.n_bins());
    for (const auto& path : paths) {
        int bin = static_cast<int>(std::lround(path.depth_index));
        bin = std::max(0, std::min(grid.n_bins() - 1, bin));
        g(bin) += path.amplitude;
    }
    return g;
}

namespace {

NaiveDepth range_from_phase(double phase) {
    NaiveDepth out;
    double wrapped = std::fmod(phase, kTwoPi);
    if (wrapped < 0.0) wrapped += kTwoPi;
    out.range_mm = wrapped;  // caller scales
    out.valid = true;
    return out;
}

}  // namespace

NaiveDepth naive_four_phase_depth(const RawFourPhase& raw, int x, int y, int config,
                                  double f_mod_hz) {
    if (!raw.subtracted)
        throw std::invalid_argument("naive_four_phase_depth: input is not baseline-subtracted");
    if (config < 0 || config >= raw.n_configs())
        throw std::invalid_argument("naive_four_phase_depth: bad config index");
    const size_t px = raw.index(x, y);
    const double re = raw.taps[config][0][px] - raw.taps[config][2][px];
    const double im = raw.taps[config][1][px] - raw.taps[config][3][px];
    if (re == 0.0 && im == 0.0) return {};  // undefined phase
    NaiveDepth out = range_from_phase(std::atan2(im, re) + raw.plan.phase_shifts[config]);
    out.range_mm *= kSpeedOfLightMmPerSec / (4.0 * kPi * f_mod_hz);
    return out;
}

NaiveDepth naive_depth_coherent(const RawFourPhase& raw, int x, int y) {
    if (!raw.subtracted)
        throw std::invalid_argument("naive_depth_coherent: input is not baseline-subtracted");
    const size_t px = raw.index(x, y);
    cplx acc(0.0, 0.0);
    for (int m = 0; m < raw.n_configs(); ++m) {
        const cplx c_m(raw.taps[m][0][px] - raw.taps[m][2][px],
                       raw.taps[m][1][px] - raw.taps[m][3][px]);
        acc += c_m * std::exp(cplx(0.0, raw.plan.phase_shifts[m]));
    }
    if (std::abs(acc) == 0.0) return {};
    NaiveDepth out = range_from_phase(std::arg(acc));
    out.range_mm *= kSpeedOfLightMmPerSec / (4.0 * kPi * raw.plan.f_mod_hz);
    return out;
}

}  // namespace tofcs
