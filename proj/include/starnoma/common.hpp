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
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace starnoma {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

// Surface side. R users sit in the reflection half-space (towards the BS),
// T users in the transmission half-space.
enum class Side : int { R = 0, T = 1 };

constexpr std::array<Side, 2> kSides{Side::R, Side::T};

inline int side_index(Side q) { return static_cast<int>(q); }
inline const char* side_name(Side q) { return q == Side::R ? "r" : "t"; }

/// Thrown when a trial or subproblem has an empty feasible set. Carries the
/// pipeline stage so callers can report which update failed.
class infeasible_error : public std::runtime_error {
  public:
    infeasible_error(std::string stage, std::string what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

/// Thrown on violated internal invariants (e.g. a non-monotone block update
/// beyond tolerance, which indicates misconfigured solver tolerances).
class internal_error : public std::logic_error {
  public:
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

inline double dbm_to_watts(double level_dbm) {
    return std::pow(10.0, (level_dbm - 30.0) / 10.0);
}

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// splitmix64 finalizer; used to derive independent per-trial seeds so that
// adding trials never perturbs earlier trials' draws.
inline std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t trial) {
    std::uint64_t z = base_seed + (trial + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline bool is_permutation_of_0_to_n(const std::vector<int>& order, int n) {
    if (static_cast<int>(order.size()) != n) return false;
    std::vector<bool> seen(n, false);
    for (int idx : order) {
        if (idx < 0 || idx >= n || seen[idx]) return false;
        seen[idx] = true;
    }
    return true;
}

}  // namespace starnoma
