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

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "starnoma/channel.hpp"
#include "starnoma/common.hpp"

namespace starnoma {

/// Effective channel power gains H_{j,k}: signal of user j as seen through
/// user k's receive beamformer, in the lifted trace form. Entry (j,k) of
/// h_coeffs[q].
struct EffectiveGains {
    std::array<Mat, 2> h_coeffs;

    const Mat& h(Side q) const { return h_coeffs[side_index(q)]; }
    Mat& h(Side q) { return h_coeffs[side_index(q)]; }
};

/// Tr(A V A^H W) for Hermitian PSD V (M x M) and W (N_T x N_T). Equals
/// |w^H A v|^2 when V = v v^H and W = w w^H. Tiny negative values from
/// roundoff are clamped to zero.
inline double effective_gain(const CMat& V, const CMat& W, const CMat& A) {
    const auto m = V.rows();
    const auto n = W.rows();
    if (V.cols() != m || W.cols() != n || A.rows() != n || A.cols() != m)
        throw std::invalid_argument("effective_gain: shape mismatch");
    double herm_tol = 1e-9 * (1.0 + V.norm() + W.norm());
    if ((V - V.adjoint()).norm() > herm_tol || (W - W.adjoint()).norm() > herm_tol)
        throw std::invalid_argument("effective_gain: inputs must be Hermitian");
    cplx tr = (A * V * A.adjoint() * W).trace();
    if (std::abs(tr.imag()) > 1e-9 * (1.0 + std::abs(tr.real())))
        throw std::invalid_argument("effective_gain: trace has a non-negligible imaginary part");
    double value = tr.real();
    if (value < -1e-12 * (1.0 + std::abs(tr)))
        throw std::invalid_argument("effective_gain: trace is negative beyond roundoff");
    return std::max(value, 0.0);
}

/// Full K x K gain matrix for one side: users indexed by `order` positions,
/// so row/column p refers to the p-th decoded user.
inline Mat effective_gain_matrix(const ChannelRealization& chan, Side q, const CMat& V,
                                 const std::vector<CMat>& W, const std::vector<int>& order) {
    const int kq = static_cast<int>(order.size());
    Mat h(kq, kq);
    for (int k = 0; k < kq; ++k) {
        // A V A^H is shared across receive beamformers of the same transmitter.
        CMat avah = chan.a(q, order[k]) * V * chan.a(q, order[k]).adjoint();
        for (int j = 0; j < kq; ++j) {
            cplx tr = (avah * W[j]).trace();
            h(k, j) = std::max(tr.real(), 0.0);
        }
    }
    return h;
}

struct RateReport {
    Vec sinr;   // per user, original indexing
    Vec rates;  // lambda_q * log2(1 + sinr)
};

/// SINRs and rates under successive decoding in the given order (position 0
/// decoded first). gains(j,k) = H_{j,k} with original user indices; user at
/// position i sees interference from users decoded after it.
inline RateReport sinr_and_rate(const Mat& gains, const Vec& powers, double sigma2,
                                double lambda_q, const std::vector<int>& order) {
    const int kq = static_cast<int>(powers.size());
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sinr_and_rate: sigma2 must be > 0");
    if (gains.rows() != kq || gains.cols() != kq)
        throw std::invalid_argument("sinr_and_rate: gain matrix shape mismatch");
    if (!is_permutation_of_0_to_n(order, kq))
        throw std::invalid_argument("sinr_and_rate: order is not a permutation");
    if ((powers.array() < 0.0).any())
        throw std::invalid_argument("sinr_and_rate: negative power");

    RateReport rep;
    rep.sinr.resize(kq);
    rep.rates.resize(kq);
    for (int pos = 0; pos < kq; ++pos) {
        int user = order[pos];
        double interference = 0.0;
        for (int later = pos + 1; later < kq; ++later)
            interference += powers(order[later]) * gains(order[later], user);
        rep.sinr(user) = powers(user) * gains(user, user) / (interference + sigma2);
        rep.rates(user) = lambda_q * std::log2(1.0 + rep.sinr(user));
    }
    return rep;
}

/// Decoding order for one side: users sorted by their own effective gain
/// |w_k^H F Theta g_k|^2, descending, ties broken by the lower index.
inline std::vector<int> initial_decoding_order(const ChannelRealization& chan, Side q,
                                               const CMat& V_init,
                                               const std::vector<CMat>& W_init) {
    const int kq = chan.n_users(q);
    std::vector<double> own(kq);
    for (int k = 0; k < kq; ++k) own[k] = effective_gain(V_init, W_init[k], chan.a(q, k));
    std::vector<int> order(kq);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return own[a] > own[b]; });
    return order;
}

/// Full decision state of one optimized trial. Per-user lists (w, powers,
/// normalized_powers) are indexed by decoding position; decoding_order maps
/// position -> original user index.
struct Solution {
    std::array<CVec, 2> v;       // unit-modulus surface beamforming vectors
    std::array<CMat, 2> big_v;   // relaxed lifted V_q (PSD, unit diagonal)
    std::array<std::vector<CVec>, 2> w;       // unit-norm receive beamformers
    std::array<std::vector<CMat>, 2> big_w;   // relaxed lifted W_{q,k} (PSD, trace 1)
    std::array<Vec, 2> powers;             // watts
    std::array<Vec, 2> normalized_powers;  // sums to 1 per side
    std::array<double, 2> p_sum{0.0, 0.0};
    double lambda_r = 0.5;
    std::array<std::vector<int>, 2> decoding_order;

    double lambda(Side q) const { return q == Side::R ? lambda_r : 1.0 - lambda_r; }
    double total_power() const { return p_sum[0] + p_sum[1]; }
    const CVec& v_side(Side q) const { return v[side_index(q)]; }
    const std::vector<int>& order(Side q) const { return decoding_order[side_index(q)]; }
};

}  // namespace starnoma
