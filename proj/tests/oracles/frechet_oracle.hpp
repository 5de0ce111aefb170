// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

// Wasserstein-2 between Gaussians without matrix square roots.
//
// Every linear coupling of N(ma, Sa) and N(mb, Sb) can be written
// y = mb + Lb Q La^-1 (x - ma) with Cholesky factors La, Lb and an orthogonal
// Q. The coupling cost is |ma - mb|^2 + tr Sa + tr Sb - 2 tr(Lb Q La^T).
// The oracle searches Q by random-rotation hill climbing and then estimates
// the cost of the resulting coupling by sampling pairs.

#pragma once

#include <random>

#include <Eigen/Dense>

namespace oracles {

struct Coupling {
    Eigen::MatrixXd q;
    double objective = 0;  // tr(Lb Q La^T)
};

inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& gen, double jitter = 0.2) {
    std::normal_distribution<double> n(0, 1);
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = n(gen);
    return a * a.transpose() / d + jitter * Eigen::MatrixXd::Identity(d, d);
}

inline Coupling best_rotation(const Eigen::MatrixXd& la, const Eigen::MatrixXd& lb, std::mt19937_64& gen,
                              int iters = 20000) {
    const int d = static_cast<int>(la.rows());
    const Eigen::MatrixXd k = la.transpose() * lb;  // tr(Lb Q La^T) = tr(Q La^T Lb)
    auto obj = [&](const Eigen::MatrixXd& q) { return (q * k).trace(); };
    std::normal_distribution<double> n(0, 1);
    Coupling best;
    for (int start = 0; start < 2; ++start) {
        Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d);
        if (start == 1) q(0, 0) = -1;  // the reflected component of O(d)
        double f = obj(q), step = 0.5;
        for (int it = 0; it < iters; ++it) {
            Eigen::MatrixXd a(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) a(i, j) = n(gen);
            a = 0.5 * step * (a - a.transpose()).eval();
            const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
            const Eigen::MatrixXd rot = (id - a).inverse() * (id + a);  // Cayley map, orthogonal
            Eigen::MatrixXd cand = q * rot;
            const double fc = obj(cand);
            if (fc > f) {
                q = cand;
                f = fc;
            } else if (it % 200 == 199) {
                step *= 0.7;
            }
        }
        if (start == 0 || f > best.objective) best = {q, f};
    }
    return best;
}

/// Monte Carlo estimate of E|x - y|^2 under the coupling defined by q.
inline double sampled_coupling_cost(const Eigen::VectorXd& ma, const Eigen::MatrixXd& sa, const Eigen::VectorXd& mb,
                                    const Eigen::MatrixXd& sb, int samples, std::uint64_t seed,
                                    const Eigen::MatrixXd* q_out = nullptr) {
    std::mt19937_64 gen(seed);
    const Eigen::MatrixXd la = sa.llt().matrixL(), lb = sb.llt().matrixL();
    const Coupling c = q_out ? Coupling{*q_out, 0} : best_rotation(la, lb, gen);
    const Eigen::MatrixXd map = lb * c.q;  // y = mb + Lb Q e, x = ma + La e
    std::normal_distribution<double> n(0, 1);
    const int d = static_cast<int>(ma.size());
    double total = 0;
    Eigen::VectorXd e(d);
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < d; ++i) e(i) = n(gen);
        const Eigen::VectorXd x = ma + la * e, y = mb + map * e;
        total += (x - y).squaredNorm();
    }
    return total / samples;
}

/// Closed form of the optimal coupling cost: the best Q attains the nuclear
/// norm of La^T Lb.
inline double nuclear_norm_w2(const Eigen::VectorXd& ma, const Eigen::MatrixXd& sa, const Eigen::VectorXd& mb,
                              const Eigen::MatrixXd& sb) {
    const Eigen::MatrixXd la = sa.llt().matrixL(), lb = sb.llt().matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(la.transpose() * lb);
    return (ma - mb).squaredNorm() + sa.trace() + sb.trace() - 2 * svd.singularValues().sum();
}

}  // namespace oracles
