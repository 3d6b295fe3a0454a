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

#include "bpre/cli/presets.hpp"

#include <algorithm>
#include <array>

#include "bpre/cli/config.hpp"

namespace bpre::cli {
namespace {

constexpr std::array kPresets = {
    Preset{"delta-closed-form",
           "variance series of constant Poisson(2) and GeometricShifted(0.5) equals 1",
           R"({
  "campaign": "suite",
  "members": [
    {
      "name": "poisson",
      "campaign": "delta",
      "model": {"kind": "deterministic", "laws": [{"family": "poisson", "lambda": 2}]},
      "params": {"expected": 1.0, "rel_tol": 1e-9, "shift_n": [1, 5, 20]}
    },
    {
      "name": "geometric",
      "campaign": "delta",
      "model": {"kind": "deterministic", "laws": [{"family": "geometric_shifted", "s": 0.5}]},
      "params": {"expected": 1.0, "rel_tol": 1e-9, "shift_n": [1, 5, 20]}
    }
  ]
})"},
    Preset{"martingale-variance",
           "mean and variance of W_hat - W_5 for constant Poisson(2), 1e5 replicates",
           R"({
  "campaign": "simulate",
  "model": {"kind": "deterministic", "laws": [{"family": "poisson", "lambda": 2}]},
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "params": {"n": 5, "reps": 100000, "mean_sigma": 3, "variance_rel_tol": 0.05}
})"},
    Preset{"heyde-gw-clt",
           "U_10 against the G sqrt(W) limit for constant Poisson(2), 20 seeded campaigns",
           R"({
  "campaign": "clt",
  "model": {"kind": "deterministic", "laws": [{"family": "poisson", "lambda": 2}]},
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "params": {
    "n_list": [10],
    "reps": 20000,
    "mode": "quenched",
    "repeats": 20,
    "min_pass_fraction": 0.95,
    "alpha": 0.01
  }
})"},
    Preset{"iid-env-clt",
           "KS trend of U_n in an IID Poisson(1.5)/Poisson(2.5) environment, annealed and quenched",
           R"({
  "campaign": "suite",
  "model": {
    "kind": "iid",
    "laws": [{"family": "poisson", "lambda": 1.5}, {"family": "poisson", "lambda": 2.5}],
    "probs": [0.5, 0.5]
  },
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "members": [
    {
      "name": "annealed",
      "campaign": "clt",
      "params": {"n_list": [4, 8, 12], "reps": 20000, "mode": "annealed", "final_ks_max": 0.03}
    },
    {
      "name": "quenched",
      "campaign": "clt",
      "params": {"n_list": [4, 8, 12], "reps": 20000, "mode": "quenched", "env_reps": 20}
    }
  ]
})"},
    Preset{"exp-rate-l2",
           "slope of log E(W_hat - W_n)^2 for constant and alternating Poisson environments",
           R"({
  "campaign": "suite",
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "members": [
    {
      "name": "constant",
      "campaign": "rate",
      "model": {"kind": "deterministic", "laws": [{"family": "poisson", "lambda": 2}]},
      "params": {
        "n_min": 4, "n_max": 14, "reps": 100000,
        "target": {"kind": "exponential", "p": 2},
        "statistic": "mean_square", "tolerance": 0.1, "two_sided": true
      }
    },
    {
      "name": "alternating",
      "campaign": "rate",
      "model": {
        "kind": "deterministic",
        "laws": [{"family": "poisson", "lambda": 1.5}, {"family": "poisson", "lambda": 2.5}],
        "extension": "cyclic"
      },
      "params": {
        "n_min": 4, "n_max": 14, "reps": 100000,
        "target": {"kind": "exponential", "p": 2},
        "statistic": "mean_square", "tolerance": 0.1, "two_sided": true
      }
    }
  ]
})"},
    Preset{"poly-rate-power-tail",
           "n * median|W_hat - W_n| for power_tail(2.5) offspring (heuristic)",
           R"({
  "campaign": "rate",
  "model": {
    "kind": "deterministic",
    "laws": [{"family": "power_tail", "exponent": 2.5, "kmax": 1000000}]
  },
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "extra_depth": 16,
  "params": {
    "n_min": 4, "n_max": 20, "reps": 10000,
    "target": {"kind": "polynomial", "alpha": 1},
    "statistic": "median_abs"
  }
})"},
    Preset{"finite-state-tail",
           "log(-log P(W_n <= eps)) in a two-state Markov geometric environment, 1e6 replicates",
           R"({
  "campaign": "tail",
  "model": {
    "kind": "markov",
    "laws": [{"family": "geometric_shifted", "s": 0.4}, {"family": "geometric_shifted", "s": 0.5}],
    "transition": [[0.7, 0.3], [0.3, 0.7]]
  },
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "params": {
    "n_list": [2, 3, 4, 5, 6, 7, 8],
    "eps_list": [0.1],
    "reps": 1000000,
    "tolerance": 0.25,
    "lack_of_fit_alpha": 1e-6
  }
})"},
    Preset{"exp-moment-geometric",
           "quenched exponential moment of W for constant GeometricShifted(0.5)",
           R"({
  "campaign": "mgf",
  "model": {"kind": "deterministic", "laws": [{"family": "geometric_shifted", "s": 0.5}]},
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "params": {
    "t_grid": [0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.01, 1.5, 2],
    "n_cap": 1000,
    "expect": [
      {"t": 0.5, "value": 2.0, "tolerance": 1e-6},
      {"t": 1.5, "divergent": true}
    ],
    "mc_t": 0.5,
    "mc_reps": 100000,
    "mc_depth": 25
  }
})"},
    Preset{"calibration",
           "synthetic-input checks of the rate fit, the tail test, the samplers and KS",
           R"({
  "campaign": "calibration",
  "seeds": {"env_seed": 1, "traj_seed": 2},
  "params": {
    "tail_instances": 100,
    "tail_reps": 1000000,
    "sampler_draws": 10000,
    "sampler_max_z": 50,
    "ks_campaigns": 100,
    "ks_reps": 10000,
    "ks_min_pass_fraction": 0.95
  }
})"},
};

}  // namespace

std::span<const Preset> presets() { return kPresets; }

nlohmann::json preset_config(const std::string& name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return nlohmann::json::parse(p.config);
  }
  throw ConfigError("unknown preset \"" + name + "\"; run `bpre presets` for the list");
}

std::string list_presets() {
  std::string out;
  for (const auto& p : kPresets) {
    std::string name = p.name;
    name.resize(std::max<std::size_t>(name.size() + 2, 24), ' ');
    out += name + p.summary + "\n";
  }
  return out;
}

}  // namespace bpre::cli
