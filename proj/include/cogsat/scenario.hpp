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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cogsat/core.hpp"

namespace cogsat {

// ---------------------------------------------------------------------------
// System instance: N secondary operators, each with a B-beam satellite serving
// K SUs over M subbands, sharing spectrum with L primary users. Channel gains
// are linear power gains with the noise power normalized to 1.
// ---------------------------------------------------------------------------

struct Dimensions {
    int n_operators = 1;       // N
    int sus_per_operator = 1;  // K
    int beams = 1;             // B
    int subbands = 1;          // M
    int pus = 1;               // L

    int total_sus() const { return n_operators * sus_per_operator; }

    /// K = B*M is required so the one-SU-per-beam-per-subband and
    /// one-subband-per-SU constraints can hold as equalities.
    void validate() const {
        if (n_operators < 1 || sus_per_operator < 1 || beams < 1 || subbands < 1 || pus < 1)
            throw DimensionError("dimensions: all of N, K, B, M, L must be >= 1");
        if (sus_per_operator != beams * subbands)
            throw DimensionError("dimensions: K must equal B*M (got K=" +
                                 std::to_string(sus_per_operator) + ", B*M=" +
                                 std::to_string(beams * subbands) + ")");
    }

    bool operator==(const Dimensions&) const = default;
};

struct Scenario {
    Dimensions dims;
    Tensor3 gain_to_sat;           // G[k][b][m], SU k to beam b of its own satellite
    Tensor3 gain_to_pu;            // F[k][l][m], SU k to PU l
    Tensor2 threshold;             // eta[l][m], interference-temperature thresholds
    double p_max = 1.0;            // per-SU per-subband power cap
    std::vector<int> beam_of;      // serving beam of SU k
    std::vector<int> operator_of;  // operator of SU k

    // Derived index sets (rebuilt by validate()): sus_of[n] lists operator n's
    // SUs, beam_sus[n][b] the SUs in beam b of operator n. Each beam holds
    // exactly M SUs so the sets partition the SU range.
    std::vector<std::vector<int>> sus_of;
    std::vector<std::vector<std::vector<int>>> beam_sus;

    void rebuild_index_sets() {
        const int n = dims.n_operators, b = dims.beams;
        sus_of.assign(n, {});
        beam_sus.assign(n, std::vector<std::vector<int>>(b));
        for (int k = 0; k < dims.total_sus(); ++k) {
            sus_of[operator_of[k]].push_back(k);
            beam_sus[operator_of[k]][beam_of[k]].push_back(k);
        }
    }

    void validate() {
        dims.validate();
        const int nk = dims.total_sus();
        if (gain_to_sat.dim0() != nk || gain_to_sat.dim1() != dims.beams ||
            gain_to_sat.dim2() != dims.subbands)
            throw ValidationError("scenario: g tensor shape mismatch");
        if (gain_to_pu.dim0() != nk || gain_to_pu.dim1() != dims.pus ||
            gain_to_pu.dim2() != dims.subbands)
            throw ValidationError("scenario: f tensor shape mismatch");
        if (threshold.rows() != dims.pus || threshold.cols() != dims.subbands)
            throw ValidationError("scenario: eta (threshold) shape mismatch");
        if (static_cast<int>(beam_of.size()) != nk ||
            static_cast<int>(operator_of.size()) != nk)
            throw ValidationError("scenario: beam_of/operator_of length mismatch");
        for (double v : gain_to_sat.data())
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError("scenario: g entries must be finite and >= 0");
        for (double v : gain_to_pu.data())
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError("scenario: f entries must be finite and >= 0");
        for (double v : threshold.data())
            if (!std::isfinite(v) || v <= 0.0)
                throw ValidationError("scenario: eta (threshold) entries must be > 0");
        if (!std::isfinite(p_max) || p_max <= 0.0)
            throw ValidationError("scenario: p_max must be > 0");
        for (int k = 0; k < nk; ++k) {
            if (operator_of[k] < 0 || operator_of[k] >= dims.n_operators)
                throw ValidationError("scenario: operator_of out of range at SU " +
                                      std::to_string(k));
            if (beam_of[k] < 0 || beam_of[k] >= dims.beams)
                throw ValidationError("scenario: beam_of out of range at SU " +
                                      std::to_string(k));
        }
        rebuild_index_sets();
        for (int n = 0; n < dims.n_operators; ++n)
            for (int b = 0; b < dims.beams; ++b)
                if (static_cast<int>(beam_sus[n][b].size()) != dims.subbands)
                    throw ValidationError(
                        "scenario: beam (" + std::to_string(n) + "," + std::to_string(b) +
                        ") must contain exactly M SUs");
    }

    bool equal_data(const Scenario& o) const {
        return dims == o.dims && gain_to_sat == o.gain_to_sat && gain_to_pu == o.gain_to_pu &&
               threshold == o.threshold && p_max == o.p_max && beam_of == o.beam_of &&
               operator_of == o.operator_of;
    }
};

// ---------------------------------------------------------------------------
// Random instance generation. Gains are i.i.d. exponential (Rayleigh-fading
// power) with configurable dB means; thresholds are uniform across (l,m).
// The seed fully determines the instance.
// ---------------------------------------------------------------------------

struct ScenarioSpec {
    Dimensions dims;
    std::uint64_t seed = 0;
    double mean_gain_sat_db = 0.0;    // mean of G entries, dB
    double mean_gain_pu_db = -20.0;   // mean of F entries, dB (SU-to-PU links are weak)
    double threshold_db = -13.0;      // uniform eta, dB
    double p_max = 1.0;
    bool all_f_zero = false;          // force F = 0 (no PU coupling at all)
};

inline Scenario generate_scenario(const ScenarioSpec& spec) {
    spec.dims.validate();
    const Dimensions& d = spec.dims;
    const int nk = d.total_sus();

    Scenario s;
    s.dims = d;
    s.p_max = spec.p_max;
    s.gain_to_sat = Tensor3(nk, d.beams, d.subbands);
    s.gain_to_pu = Tensor3(nk, d.pus, d.subbands);
    s.threshold = Tensor2(d.pus, d.subbands, db_to_linear(spec.threshold_db));
    s.beam_of.resize(nk);
    s.operator_of.resize(nk);
    for (int k = 0; k < nk; ++k) {
        s.operator_of[k] = k / d.sus_per_operator;
        s.beam_of[k] = (k % d.sus_per_operator) / d.subbands;
    }

    std::mt19937_64 rng(spec.seed);
    const double mean_sat = db_to_linear(spec.mean_gain_sat_db);
    for (int k = 0; k < nk; ++k)
        for (int b = 0; b < d.beams; ++b)
            for (int m = 0; m < d.subbands; ++m)
                s.gain_to_sat(k, b, m) = exponential_draw(rng, mean_sat);

    const bool f_zero = spec.all_f_zero || std::isinf(spec.mean_gain_pu_db);
    if (!f_zero) {
        const double mean_pu = db_to_linear(spec.mean_gain_pu_db);
        for (int k = 0; k < nk; ++k)
            for (int l = 0; l < d.pus; ++l)
                for (int m = 0; m < d.subbands; ++m)
                    s.gain_to_pu(k, l, m) = exponential_draw(rng, mean_pu);
    }

    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// File format: JSON with a fixed key order and %.17g reals, so that
// save -> load -> save is byte-stable and load(save(s)) == s exactly.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_real_array(std::ostream& os, const std::vector<double>& v, size_t begin,
                             size_t count) {
    os << "[";
    for (size_t i = 0; i < count; ++i) {
        if (i) os << ", ";
        os << format_real(v[begin + i]);
    }
    os << "]";
}

// rows x cols matrix laid out row-major starting at `begin`
inline void write_real_matrix(std::ostream& os, const std::vector<double>& v, size_t begin,
                              int rows, int cols, const char* indent) {
    os << "[\n";
    for (int r = 0; r < rows; ++r) {
        os << indent;
        write_real_array(os, v, begin + static_cast<size_t>(r) * cols, cols);
        os << (r + 1 < rows ? ",\n" : "\n");
    }
}

}  // namespace detail

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ostringstream os;
    const Dimensions& d = s.dims;
    os << "{\n";
    os << "  \"format\": \"cogsat-scenario-v1\",\n";
    os << "  \"dims\": {\"N\": " << d.n_operators << ", \"K\": " << d.sus_per_operator
       << ", \"B\": " << d.beams << ", \"M\": " << d.subbands << ", \"L\": " << d.pus << "},\n";
    os << "  \"p_max\": " << detail::format_real(s.p_max) << ",\n";
    os << "  \"eta\": ";
    detail::write_real_matrix(os, s.threshold.data(), 0, d.pus, d.subbands, "    ");
    os << "  ],\n";
    os << "  \"beam_of\": [";
    for (size_t i = 0; i < s.beam_of.size(); ++i) os << (i ? ", " : "") << s.beam_of[i];
    os << "],\n";
    os << "  \"operator_of\": [";
    for (size_t i = 0; i < s.operator_of.size(); ++i) os << (i ? ", " : "") << s.operator_of[i];
    os << "],\n";

    const int nk = d.total_sus();
    os << "  \"g\": [\n";
    for (int k = 0; k < nk; ++k) {
        os << "    ";
        detail::write_real_matrix(os, s.gain_to_sat.data(),
                                  static_cast<size_t>(k) * d.beams * d.subbands, d.beams,
                                  d.subbands, "      ");
        os << "    ]" << (k + 1 < nk ? ",\n" : "\n");
    }
    os << "  ],\n";
    os << "  \"f\": [\n";
    for (int k = 0; k < nk; ++k) {
        os << "    ";
        detail::write_real_matrix(os, s.gain_to_pu.data(),
                                  static_cast<size_t>(k) * d.pus * d.subbands, d.pus, d.subbands,
                                  "      ");
        os << "    ]" << (k + 1 < nk ? ",\n" : "\n");
    }
    os << "  ]\n";
    os << "}\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << os.str();
    if (!out) throw Error("write failed: " + path);
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const char* what) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError(std::string("scenario file: missing field \"") + key + "\" (" + what +
                         ")");
    return *it;
}

inline double as_real(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError("scenario file: " + where + " must be a number");
    return j.get<double>();
}

}  // namespace detail

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("scenario file: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ParseError("scenario file: top level must be an object");

    Scenario s;
    const auto& jd = detail::require_field(j, "dims", "dimension block");
    s.dims.n_operators = detail::require_field(jd, "N", "operator count").get<int>();
    s.dims.sus_per_operator = detail::require_field(jd, "K", "SUs per operator").get<int>();
    s.dims.beams = detail::require_field(jd, "B", "beams per satellite").get<int>();
    s.dims.subbands = detail::require_field(jd, "M", "subband count").get<int>();
    s.dims.pus = detail::require_field(jd, "L", "PU count").get<int>();
    s.dims.validate();
    const Dimensions& d = s.dims;
    const int nk = d.total_sus();

    s.p_max = detail::as_real(detail::require_field(j, "p_max", "power cap"), "p_max");

    const auto& je = detail::require_field(j, "eta", "interference-temperature threshold");
    if (!je.is_array() || static_cast<int>(je.size()) != d.pus)
        throw ParseError("scenario file: eta (threshold) must be an L-row array");
    s.threshold = Tensor2(d.pus, d.subbands);
    for (int l = 0; l < d.pus; ++l) {
        if (!je[l].is_array() || static_cast<int>(je[l].size()) != d.subbands)
            throw ParseError("scenario file: eta (threshold) row " + std::to_string(l) +
                             " must have M entries");
        for (int m = 0; m < d.subbands; ++m)
            s.threshold(l, m) = detail::as_real(je[l][m], "eta entry");
    }

    auto read_ints = [&](const char* key, const char* what) {
        const auto& ja = detail::require_field(j, key, what);
        if (!ja.is_array() || static_cast<int>(ja.size()) != nk)
            throw ParseError(std::string("scenario file: ") + key + " must list all N*K SUs");
        std::vector<int> out(nk);
        for (int k = 0; k < nk; ++k) out[k] = ja[k].get<int>();
        return out;
    };
    s.beam_of = read_ints("beam_of", "serving beam per SU");
    s.operator_of = read_ints("operator_of", "operator per SU");

    auto read_tensor3 = [&](const char* key, const char* what, int d1, int d2) {
        const auto& jt = detail::require_field(j, key, what);
        if (!jt.is_array() || static_cast<int>(jt.size()) != nk)
            throw ParseError(std::string("scenario file: ") + key +
                             " must be an array with one block per SU");
        Tensor3 t(nk, d1, d2);
        for (int k = 0; k < nk; ++k) {
            if (!jt[k].is_array() || static_cast<int>(jt[k].size()) != d1)
                throw ParseError(std::string("scenario file: ") + key + "[" + std::to_string(k) +
                                 "] has the wrong row count");
            for (int i = 0; i < d1; ++i) {
                if (!jt[k][i].is_array() || static_cast<int>(jt[k][i].size()) != d2)
                    throw ParseError(std::string("scenario file: ") + key + "[" +
                                     std::to_string(k) + "][" + std::to_string(i) +
                                     "] has the wrong column count");
                for (int c = 0; c < d2; ++c)
                    t(k, i, c) = detail::as_real(jt[k][i][c], std::string(key) + " entry");
            }
        }
        return t;
    };
    s.gain_to_sat = read_tensor3("g", "SU-to-satellite gains", d.beams, d.subbands);
    s.gain_to_pu = read_tensor3("f", "SU-to-PU gains", d.pus, d.subbands);

    s.validate();
    return s;
}

}  // namespace cogsat
