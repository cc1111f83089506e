#include "oscid/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oscid::pod {

void SnapshotEnsemble::validate() const {
    if (snapshots.empty()) throw std::invalid_argument("pod: empty ensemble");
    const std::size_t len = static_cast<std::size_t>(n_points()) * n_components;
    for (const auto& s : snapshots) {
        if (s.size() != len) throw std::invalid_argument("pod: snapshot shape mismatch");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("pod: negative quadrature weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("pod: weights sum to zero");
}

double SnapshotEnsemble::inner(const std::vector<double>& v,
                               const std::vector<double>& w) const {
    double acc = 0.0;
    const int d = n_components;
    for (int p = 0; p < n_points(); ++p) {
        double cell = 0.0;
        for (int c = 0; c < d; ++c) {
            cell += v[static_cast<std::size_t>(p) * d + c] *
                    w[static_cast<std::size_t>(p) * d + c];
        }
        acc += weights[p] * cell;
    }
    return acc;
}

std::vector<double> mean_snapshot(const SnapshotEnsemble& ens) {
    ens.validate();
    std::vector<double> mean(ens.snapshots.front().size(), 0.0);
    for (const auto& s : ens.snapshots) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += s[i];
    }
    const double inv = 1.0 / ens.size();
    for (double& v : mean) v *= inv;
    return mean;
}

Matrix correlation_matrix(const SnapshotEnsemble& ens) {
    ens.validate();
    if (ens.size() < 2) throw std::invalid_argument("pod: need at least 2 snapshots");
    const auto mean = mean_snapshot(ens);
    const int m = ens.size();

    std::vector<std::vector<double>> fluct(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        fluct[i] = ens.snapshots[i];
        for (std::size_t k = 0; k < mean.size(); ++k) fluct[i][k] -= mean[k];
    }

    Matrix c(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m)));
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const double v = ens.inner(fluct[i], fluct[j]) / m;
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    return c;
}

namespace {

double frobenius(const Matrix& a) {
    double acc = 0.0;
    for (const auto& row : a) {
        for (double v : row) acc += v * v;
    }
    return std::sqrt(acc);
}

double off_diagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (i != j) acc += a[i][j] * a[i][j];
        }
    }
    return std::sqrt(acc);
}

}  // namespace

EigenResult symmetric_eigendecomposition(const Matrix& c) {
    const std::size_t n = c.size();
    if (n == 0) throw std::invalid_argument("eigendecomposition: empty matrix");
    const double scale = std::max(frobenius(c), 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
        if (c[i].size() != n) throw std::invalid_argument("eigendecomposition: not square");
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(c[i][j] - c[j][i]) > 1e-12 * scale) {
                throw std::invalid_argument("eigendecomposition: matrix not symmetric");
            }
        }
    }

    Matrix a = c;
    // Eigenvector columns accumulate in v.
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    const double target = 1e-12 * scale;
    for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > target; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) <= 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;
                const double tau = sn / (1.0 + cs);

                const double apq = a[p][q];
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a[r][p], arq = a[r][q];
                        a[r][p] = arp - sn * (arq + tau * arp);
                        a[p][r] = a[r][p];
                        a[r][q] = arq + sn * (arp - tau * arq);
                        a[q][r] = a[r][q];
                    }
                    const double vrp = v[r][p], vrq = v[r][q];
                    v[r][p] = vrp - sn * (vrq + tau * vrp);
                    v[r][q] = vrq + sn * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });

    EigenResult out;
    out.eigenvalues.resize(n);
    out.eigenvectors.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        out.eigenvalues[i] = a[order[i]][order[i]];
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors[i][r] = v[r][order[i]];
    }
    return out;
}

PodResult pod_modes_and_amplitudes(const SnapshotEnsemble& ens, const EigenResult& eig) {
    ens.validate();
    const int m = ens.size();
    const auto mean = mean_snapshot(ens);

    PodResult out;
    out.mean = mean;
    out.eigenvalues = eig.eigenvalues;

    const double lead = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.front();
    int retained = 0;
    for (double lambda : eig.eigenvalues) {
        if (lambda > 1e-12 * lead && retained < m - 1) ++retained;
    }
    if (retained == 0) throw std::runtime_error("pod: no modes above the eigenvalue floor");

    std::vector<std::vector<double>> fluct(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        fluct[i] = ens.snapshots[i];
        for (std::size_t k = 0; k < mean.size(); ++k) fluct[i][k] -= mean[k];
    }

    out.modes.assign(static_cast<std::size_t>(retained),
                     std::vector<double>(mean.size(), 0.0));
    out.amplitudes.assign(static_cast<std::size_t>(retained),
                          std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int i = 0; i < retained; ++i) {
        const double lambda = eig.eigenvalues[i];
        const double mode_scale = 1.0 / std::sqrt(m * lambda);
        const double amp_scale = std::sqrt(lambda * m);
        for (int s = 0; s < m; ++s) {
            const double e = eig.eigenvectors[i][s];
            out.amplitudes[i][s] = amp_scale * e;
            for (std::size_t k = 0; k < mean.size(); ++k) {
                out.modes[i][k] += mode_scale * e * fluct[s][k];
            }
        }
    }
    return out;
}

PodResult snapshot_pod(const SnapshotEnsemble& ens) {
    return pod_modes_and_amplitudes(ens, symmetric_eigendecomposition(correlation_matrix(ens)));
}

}  // namespace oscid::pod
