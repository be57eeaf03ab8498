#pragma once

#include <optional>
#include <string_view>

// Bundled copies of scenarios/*.json (a test keeps them in sync).

namespace ftform {

namespace bundled {

inline constexpr std::string_view sim1 = R"json({
  "name": "sim1",
  "graph": {"n": 9, "d": 2},
  "distances": {"default": 2.0},
  "desired": [
    [0, 0], [1, 1.7320508075688772], [2, 0], [3, 1.7320508075688772], [4, 0],
    [5, 1.7320508075688772], [6, 0], [7, 1.7320508075688772], [8, 0]
  ],
  "leaders": {
    "positions": [[0, 0], [1, 1.7320508075688772]],
    "profile": {"type": "sinusoid", "amplitude": 1.0, "frequencies": "random"}
  },
  "followers": {
    "initial": {"mode": "perturb", "radius": 1.0},
    "frames": "random"
  },
  "control": {"law": "basic", "k": 1.0, "k_prime": 0.0, "alpha": 0.5, "gamma": 2.0, "eps": 1e-3},
  "sim": {"dt": 1e-3, "t_end": 5.0, "integrator": "rk4", "seed": 1, "record_every": 1},
  "analysis": {"delta": 1e-2, "window": 0.5}
})json";

inline constexpr std::string_view sim2a = R"json({
  "name": "sim2a",
  "graph": {
    "n": 6,
    "d": 3
  },
  "distances": {
    "default": 2.0,
    "edges": [
      [
        2,
        4,
        2.8284271247461903
      ],
      [
        3,
        4,
        2.8284271247461903
      ]
    ]
  },
  "desired": [
    [
      2,
      0,
      3
    ],
    [
      0,
      0,
      3
    ],
    [
      1,
      -1.7320508075688772,
      3
    ],
    [
      2,
      0,
      1
    ],
    [
      0.2857142857142857,
      -0.989743318610787,
      1.2857142857142858
    ],
    [
      2.024890659167824,
      -1.9771932027918706,
      1.3001457877762348
    ]
  ],
  "leaders": {
    "positions": [
      [
        2,
        0,
        3
      ],
      [
        0,
        0,
        3
      ],
      [
        1,
        -1.7320508075688772,
        3
      ]
    ],
    "profile": {
      "type": "modulated",
      "scale": 0.8164965809277261,
      "G": [
        [
          {
            "fn": "sin",
            "rate": "random"
          },
          {
            "fn": "cos",
            "rate": "random"
          }
        ],
        [
          {
            "fn": "cos",
            "rate": "random"
          },
          {
            "fn": "sin",
            "rate": "random"
          }
        ],
        [
          {
            "fn": "sin",
            "rate": "random"
          },
          {
            "fn": "cos",
            "rate": "random"
          }
        ]
      ],
      "h": [
        {
          "fn": "sin",
          "rate": 1.0
        },
        {
          "fn": "cos",
          "rate": 0.5
        }
      ]
    }
  },
  "followers": {
    "initial": {
      "mode": "perturb",
      "radius": 1.0
    },
    "frames": "random"
  },
  "control": {
    "law": "modulated",
    "k": 1.0,
    "k_prime": 0.0,
    "alpha": 0.5,
    "gamma": 2.0,
    "eps": 0.001
  },
  "sim": {
    "dt": 2e-05,
    "t_end": 15.0,
    "integrator": "rk4",
    "seed": 1,
    "record_every": 10
  },
  "analysis": {
    "delta": 0.001,
    "window": 0.5
  }
})json";

inline constexpr std::string_view sim2b = R"json({
  "name": "sim2b",
  "graph": {
    "n": 6,
    "d": 3
  },
  "distances": {
    "default": 2.0,
    "edges": [
      [
        2,
        4,
        2.8284271247461903
      ],
      [
        3,
        4,
        2.8284271247461903
      ]
    ]
  },
  "desired": [
    [
      2,
      0,
      3
    ],
    [
      0,
      0,
      3
    ],
    [
      1,
      -1.7320508075688772,
      3
    ],
    [
      2,
      0,
      1
    ],
    [
      0.2857142857142857,
      -0.989743318610787,
      1.2857142857142858
    ],
    [
      2.024890659167824,
      -1.9771932027918706,
      1.3001457877762348
    ]
  ],
  "leaders": {
    "positions": [
      [
        2,
        0,
        3
      ],
      [
        0,
        0,
        3
      ],
      [
        1,
        -1.7320508075688772,
        3
      ]
    ],
    "profile": {
      "type": "modulated",
      "scale": 0.8164965809277261,
      "G": [
        [
          {
            "fn": "sin",
            "rate": "random"
          },
          {
            "fn": "cos",
            "rate": "random"
          }
        ],
        [
          {
            "fn": "cos",
            "rate": "random"
          },
          {
            "fn": "sin",
            "rate": "random"
          }
        ],
        [
          {
            "fn": "sin",
            "rate": "random"
          },
          {
            "fn": "cos",
            "rate": "random"
          }
        ]
      ],
      "h": [
        {
          "fn": "sin",
          "rate": 1.0
        },
        {
          "fn": "cos",
          "rate": 0.5
        }
      ]
    }
  },
  "followers": {
    "initial": {
      "mode": "perturb",
      "radius": 1.0
    },
    "frames": "random"
  },
  "control": {
    "law": "modulated_fixed_time",
    "k": 1.0,
    "k_prime": 1.0,
    "alpha": 0.5,
    "gamma": 2.0,
    "eps": 0.001
  },
  "sim": {
    "dt": 2e-05,
    "t_end": 15.0,
    "integrator": "rk4",
    "seed": 1,
    "record_every": 10
  },
  "analysis": {
    "delta": 0.001,
    "window": 0.5
  }
})json";

}  // namespace bundled

inline std::optional<std::string_view> bundled_scenario(std::string_view name) {
  if (name == "sim1") return bundled::sim1;
  if (name == "sim2a") return bundled::sim2a;
  if (name == "sim2b") return bundled::sim2b;
  return std::nullopt;
}

}  // namespace ftform
