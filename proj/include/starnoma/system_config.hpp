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

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "starnoma/common.hpp"

namespace starnoma {

/// Scenario constants for one simulated deployment: geometry, array sizes,
/// propagation law, Rician factor, noise floor and per-user QoS targets.
struct SystemConfig {
    int n_antennas = 4;   // BS antennas
    int n_elements = 10;  // surface elements
    int k_r = 2;          // users in the reflection half-space
    int k_t = 2;          // users in the transmission half-space

    Eigen::Vector3d bs_position{0.0, 0.0, 10.0};
    Eigen::Vector3d ris_position{0.0, 50.0, 10.0};
    double user_drop_radius = 10.0;  // half-circle radius around the surface, m

    double pathloss_ref_db = -30.0;   // at the 1 m reference distance
    double pathloss_exponent = 2.2;
    double rician_factor = 1.0;       // linear K-factor
    double noise_power_dbm = -90.0;

    // Minimum rates in bit/s/Hz, one entry per user and side.
    std::vector<double> qos_bits_r{0.2, 0.2};
    std::vector<double> qos_bits_t{0.2, 0.2};

    std::uint64_t rng_seed = 1;

    const std::vector<double>& qos_bits(Side q) const {
        return q == Side::R ? qos_bits_r : qos_bits_t;
    }
    int n_users(Side q) const { return q == Side::R ? k_r : k_t; }
    double noise_watts() const { return dbm_to_watts(noise_power_dbm); }

    /// Sets both sides' QoS lists to a common per-user rate.
    void set_uniform_qos(double rate_bits) {
        qos_bits_r.assign(static_cast<std::size_t>(k_r), rate_bits);
        qos_bits_t.assign(static_cast<std::size_t>(k_t), rate_bits);
    }

    void validate() const {
        if (n_antennas < 1 || n_elements < 1 || k_r < 1 || k_t < 1)
            throw std::invalid_argument("config: antenna/element/user counts must be >= 1");
        if (user_drop_radius <= 0.0)
            throw std::invalid_argument("config: user_drop_radius must be > 0");
        if (rician_factor < 0.0)
            throw std::invalid_argument("config: rician_factor must be >= 0");
        if (static_cast<int>(qos_bits_r.size()) != k_r ||
            static_cast<int>(qos_bits_t.size()) != k_t)
            throw std::invalid_argument("config: qos list length must match user count");
        for (Side q : kSides)
            for (double r : qos_bits(q))
                if (!(r > 0.0)) throw std::invalid_argument("config: qos rates must be > 0");
    }
};

}  // namespace starnoma
