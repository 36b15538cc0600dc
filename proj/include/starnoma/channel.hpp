// SPDX-License-Identifier: Apache-2.0
//
// starnoma: STAR-RIS assisted uplink NOMA total-power minimization toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "starnoma/common.hpp"
#include "starnoma/system_config.hpp"

namespace starnoma {

/// Distance-dependent power gain eps * d^(-rho), valid from the 1 m
/// reference distance outward.
inline double path_loss(double distance_m, const SystemConfig& cfg) {
    if (!(distance_m >= 1.0))
        throw std::domain_error("path_loss: distance below the 1 m reference");
    return db_to_linear(cfg.pathloss_ref_db) * std::pow(distance_m, -cfg.pathloss_exponent);
}

/// Half-wavelength ULA response for a wave whose direction cosine along the
/// array axis is cos_axis.
inline CVec ula_steering(double cos_axis, int n) {
    CVec a(n);
    for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, M_PI * i * cos_axis);
    return a;
}

/// One small-scale fading draw: the surface-to-BS matrix F, the per-user
/// uplink vectors g, and the derived matrices A_k = F diag(g_k).
struct ChannelRealization {
    CMat f_matrix;                          // N_T x M
    std::array<std::vector<CVec>, 2> g;     // per side, K_q vectors of length M
    std::array<std::vector<CMat>, 2> a_matrices;  // A_{q,k} = F diag(g_{q,k})
    std::array<std::vector<Eigen::Vector3d>, 2> user_positions;

    const std::vector<CVec>& g_side(Side q) const { return g[side_index(q)]; }
    const CMat& a(Side q, int k) const { return a_matrices[side_index(q)][k]; }
    int n_users(Side q) const { return static_cast<int>(g[side_index(q)].size()); }
};

namespace detail {

inline cplx circular_gaussian(std::mt19937_64& rng) {
    // CN(0,1): real and imaginary parts i.i.d. N(0, 1/2).
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    double re = nd(rng);
    double im = nd(rng);
    return {re, im};
}

// Direction cosine along the x-oriented array axis, seen from `at` towards `to`.
inline double direction_cosine_x(const Eigen::Vector3d& at, const Eigen::Vector3d& to) {
    Eigen::Vector3d d = to - at;
    double n = d.norm();
    return n > 0.0 ? d.x() / n : 0.0;
}

inline CMat rician_mix(const CMat& los, double k_factor, double pl, std::mt19937_64& rng) {
    double w_los = std::sqrt(k_factor / (k_factor + 1.0));
    double w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
    CMat out(los.rows(), los.cols());
    for (Eigen::Index j = 0; j < los.cols(); ++j)
        for (Eigen::Index i = 0; i < los.rows(); ++i)
            out(i, j) = std::sqrt(pl) * (w_los * los(i, j) + w_nlos * circular_gaussian(rng));
    return out;
}

}  // namespace detail

/// Draws one channel realization. Deterministic given the RNG state; the draw
/// order is fixed (R positions, T positions, F, then g per side) so streams
/// are reproducible.
inline ChannelRealization draw_channels(const SystemConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    ChannelRealization chan;

    // Users fall uniformly on a half-disc at ground level, R side facing the BS.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Side q : kSides) {
        int kq = cfg.n_users(q);
        auto& pos = chan.user_positions[side_index(q)];
        pos.reserve(kq);
        double y_sign = (q == Side::R) ? -1.0 : 1.0;
        for (int k = 0; k < kq; ++k) {
            double radius = cfg.user_drop_radius * std::sqrt(unif(rng));
            double theta = M_PI * unif(rng);
            Eigen::Vector3d p = cfg.ris_position;
            p.x() += radius * std::cos(theta);
            p.y() += y_sign * radius * std::sin(theta);
            p.z() = 0.0;
            pos.push_back(p);
        }
    }

    // Surface-to-BS link: rank-one LoS from the node geometry plus i.i.d. NLoS.
    double cos_bs = detail::direction_cosine_x(cfg.bs_position, cfg.ris_position);
    double cos_ris_bs = detail::direction_cosine_x(cfg.ris_position, cfg.bs_position);
    CMat f_los = ula_steering(cos_bs, cfg.n_antennas) *
                 ula_steering(cos_ris_bs, cfg.n_elements).adjoint();
    double pl_f = path_loss((cfg.bs_position - cfg.ris_position).norm(), cfg);
    chan.f_matrix = detail::rician_mix(f_los, cfg.rician_factor, pl_f, rng);

    for (Side q : kSides) {
        int kq = cfg.n_users(q);
        auto& gs = chan.g[side_index(q)];
        auto& as = chan.a_matrices[side_index(q)];
        gs.reserve(kq);
        as.reserve(kq);
        for (int k = 0; k < kq; ++k) {
            const Eigen::Vector3d& p = chan.user_positions[side_index(q)][k];
            double cos_u = detail::direction_cosine_x(cfg.ris_position, p);
            CMat g_los = ula_steering(cos_u, cfg.n_elements);
            double pl = path_loss((p - cfg.ris_position).norm(), cfg);
            CVec gk = detail::rician_mix(g_los, cfg.rician_factor, pl, rng).col(0);
            gs.push_back(gk);
            as.push_back(chan.f_matrix * gk.asDiagonal());
        }
    }
    return chan;
}

}  // namespace starnoma
