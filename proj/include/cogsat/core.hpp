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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cogsat {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct SizeError : Error {
    using Error::Error;
};
struct ProtocolError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
/// Thrown when a reported interference level exceeds its cap.
struct InfeasibleReportError : Error {
    using Error::Error;
};
/// Thrown when a returned allocation fails the feasibility audit.
struct AuditError : Error {
    explicit AuditError(const std::string& msg, std::vector<std::string> v = {})
        : Error(msg), violations(std::move(v)) {}
    std::vector<std::string> violations;
};

// ---------------------------------------------------------------------------
// Dense row-major tensors (instances here are tiny; no BLAS needed)
// ---------------------------------------------------------------------------

template <typename T>
class Tensor2T {
  public:
    Tensor2T() = default;
    Tensor2T(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }
    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor2T&) const = default;

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using Tensor2 = Tensor2T<double>;
using Tensor2i = Tensor2T<int>;

template <typename T>
class Tensor3T {
  public:
    Tensor3T() = default;
    Tensor3T(int d0, int d1, int d2, T fill = T{})
        : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<size_t>(d0) * d1 * d2, fill) {}

    T& operator()(int i, int j, int k) {
        return data_[(static_cast<size_t>(i) * d1_ + j) * d2_ + k];
    }
    const T& operator()(int i, int j, int k) const {
        return data_[(static_cast<size_t>(i) * d1_ + j) * d2_ + k];
    }

    int dim0() const { return d0_; }
    int dim1() const { return d1_; }
    int dim2() const { return d2_; }
    size_t size() const { return data_.size(); }
    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool operator==(const Tensor3T&) const = default;

  private:
    int d0_ = 0, d1_ = 0, d2_ = 0;
    std::vector<T> data_;
};

using Tensor3 = Tensor3T<double>;

// ---------------------------------------------------------------------------
// dB <-> linear power
// ---------------------------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// ---------------------------------------------------------------------------
// Deterministic random draws. std::mt19937_64 is bit-identical everywhere;
// the distributions below avoid the implementation-defined stdlib ones.
// ---------------------------------------------------------------------------

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
template <typename Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exponential draw with the given mean via inverse CDF.
template <typename Rng>
double exponential_draw(Rng& rng, double mean) {
    return -mean * std::log1p(-uniform01(rng));
}

// ---------------------------------------------------------------------------
// parallel_for: runs fn(i) for i in [0, n) on `jobs` threads. Items must be
// independent; results keyed by index stay deterministic.
// ---------------------------------------------------------------------------

inline void parallel_for(int jobs, int n, const std::function<void(int)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int nthreads = std::min(jobs, n);
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace cogsat
