// Copyright 2026 The bpre Authors.
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

#include <cstdint>

#include "bpre/rng.hpp"

// Exact variate generators for the discrete laws the simulator needs at
// arbitrarily large parameters, built only on `Rng` so that draws are
// reproducible across standard libraries.
//
// Poisson and binomial use inversion below a mean of 10 and Hoermann's
// transformed rejection with squeeze (PTRS / BTRS) above it; both are O(1)
// expected time for any parameter. Acceptance tests evaluate log-pmfs through
// Loader's saddle-point form so they stay accurate at counts near 2^62,
// where differences of lgamma values would lose every significant digit.
namespace bpre::dist {

// Standard normal (Marsaglia polar method).
double normal(Rng& rng);

// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang).
double gamma(Rng& rng, double shape);

// Poisson(mean) as an integer-valued double; mean may exceed 2^64.
double poisson_real(Rng& rng, double mean);

// Poisson(mean) for mean < 2^63.
std::uint64_t poisson(Rng& rng, double mean);

// Binomial(trials, p).
std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p);

// Number of failures before `successes` successes, success probability
// `p_success`, as an integer-valued double (gamma-Poisson mixture).
double negative_binomial_real(Rng& rng, std::uint64_t successes,
                              double p_success);

// Stirling-series remainder: lgamma(n + 1) - (n + 1/2) log n + n - log sqrt(2 pi).
double stirling_error(double n);

// Deviance term x log(x / np) + np - x, computed without cancellation.
double deviance(double x, double np);

// log(1 + x) - x without cancellation near zero.
double log1pmx(double x);

double log_poisson_pmf(double k, double mean);
double log_binomial_pmf(double k, double trials, double p);

}  // namespace bpre::dist
