// Copyright 2026 the cogsat-ra authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>

#include "cogsat/core.hpp"

namespace cogsat {

/// Sentinel bit count meaning "exchange the value unquantized".
inline constexpr int kUnquantized = 0;

inline bool is_unquantized(int bits) { return bits == kUnquantized; }

// ---------------------------------------------------------------------------
// Two scalar quantizers back all inter-operator exchange:
//  * gains — uniform midpoint cells in dB over [lo_db, hi_db], since channel
//    gains span orders of magnitude; exact zero is a reserved codeword so
//    structurally absent links stay absent.
//  * interference levels — uniform linear cells over [0, cap], rounded UP so
//    a reported contribution never understates the true interference.
// ---------------------------------------------------------------------------

struct QuantizerConfig {
    enum class Mode { GainDb, LevelLinear };

    int bits = kUnquantized;
    double lo_db = -60.0;
    double hi_db = 20.0;
    Mode mode = Mode::GainDb;

    void validate() const {
        if (bits != kUnquantized && bits < 1)
            throw ValidationError("quantizer: bits must be >= 1 or the unquantized sentinel");
        if (bits > 60) throw ValidationError("quantizer: bits > 60 is not representable");
        if (!(lo_db < hi_db)) throw ValidationError("quantizer: lo_db must be < hi_db");
    }
};

/// Quantize a linear power gain. Identity when unquantized; 0 maps to 0.
/// Idempotent: cell midpoints are fixed points.
inline double quantize_gain(double x, const QuantizerConfig& cfg) {
    cfg.validate();
    if (is_unquantized(cfg.bits)) return x;
    if (x < 0.0) throw ValidationError("quantize_gain: negative gain");
    if (x == 0.0) return 0.0;

    const double cells = std::ldexp(1.0, cfg.bits);
    const double width = (cfg.hi_db - cfg.lo_db) / cells;
    double xdb = linear_to_db(x);
    xdb = std::min(std::max(xdb, cfg.lo_db), cfg.hi_db);
    double idx = std::floor((xdb - cfg.lo_db) / width);
    idx = std::min(std::max(idx, 0.0), cells - 1.0);
    return db_to_linear(cfg.lo_db + (idx + 0.5) * width);
}

/// Quantize an interference level over [0, cap] with 2^bits cells, rounding up
/// to the next cell boundary. Levels above the cap are an infeasibility report
/// from the operator, not a representable value.
inline double quantize_level(double x, double cap, int bits) {
    if (x < 0.0) throw ValidationError("quantize_level: negative level");
    if (cap < 0.0) throw ValidationError("quantize_level: negative cap");
    if (x > cap)
        throw InfeasibleReportError("quantize_level: reported level " + std::to_string(x) +
                                    " exceeds cap " + std::to_string(cap));
    if (is_unquantized(bits)) return x;
    if (bits < 1 || bits > 60)
        throw ValidationError("quantize_level: bits must be in [1,60] or unquantized");
    if (cap == 0.0) return 0.0;

    const double cells = std::ldexp(1.0, bits);
    const double width = cap / cells;  // exact: division by a power of two
    double idx = std::ceil(x / width);
    if (idx > cells) idx = cells;
    double q = idx * width;
    if (q < x) q = (idx + 1.0) * width;  // guard against a downward rounding of idx*width
    return std::min(q, cap);
}

/// Quantize every entry of a gain tensor.
inline Tensor3 quantize_gain_tensor(const Tensor3& t, const QuantizerConfig& cfg) {
    if (is_unquantized(cfg.bits)) return t;
    Tensor3 out = t;
    for (double& v : out.data()) v = quantize_gain(v, cfg);
    return out;
}

}  // namespace cogsat
