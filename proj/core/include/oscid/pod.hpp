#pragma once

#include <vector>

namespace oscid::pod {

/// Ensemble of M field snapshots with a weighted inner product. Each
/// snapshot is a flat array of n_points * n_components values; the weights
/// are the quadrature (cell-volume) factors of the n_points grid points.
struct SnapshotEnsemble {
    int n_components = 1;
    std::vector<std::vector<double>> snapshots;
    std::vector<double> weights;

    int size() const { return static_cast<int>(snapshots.size()); }
    int n_points() const { return static_cast<int>(weights.size()); }

    double inner(const std::vector<double>& v, const std::vector<double>& w) const;
    void validate() const;
};

using Matrix = std::vector<std::vector<double>>;

struct EigenResult {
    std::vector<double> eigenvalues;       // descending
    std::vector<std::vector<double>> eigenvectors;  // eigenvectors[i] pairs eigenvalues[i]
};

/// Arithmetic mean over the snapshots.
std::vector<double> mean_snapshot(const SnapshotEnsemble& ens);

/// Grammian of the snapshot fluctuations,
///   C[m][n] = (1/M) <u_m - u0, u_n - u0>;
/// symmetric positive semi-definite by construction.
Matrix correlation_matrix(const SnapshotEnsemble& ens);

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// 1e-12 of the matrix norm; eigenpairs sorted by descending eigenvalue,
/// ties kept in original index order. The input must be symmetric to 1e-12
/// relative.
EigenResult symmetric_eigendecomposition(const Matrix& c);

struct PodResult {
    std::vector<double> mean;
    std::vector<double> eigenvalues;             // all M, descending
    std::vector<std::vector<double>> modes;      // retained modes, orthonormal
    std::vector<std::vector<double>> amplitudes; // amplitudes[i][m]
};

/// Modes u_i = (1/sqrt(M lambda_i)) sum_m e_i^m (u_m - u0) and amplitudes
/// a_i^m = sqrt(lambda_i M) e_i^m for the retained eigenpairs (those above
/// 1e-12 of the leading eigenvalue).
PodResult pod_modes_and_amplitudes(const SnapshotEnsemble& ens, const EigenResult& eig);

/// Full pipeline: mean, Grammian, eigendecomposition, modes.
PodResult snapshot_pod(const SnapshotEnsemble& ens);

}  // namespace oscid::pod
