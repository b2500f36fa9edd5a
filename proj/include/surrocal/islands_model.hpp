#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "surrocal/common.hpp"
#include "surrocal/param_space.hpp"
#include "surrocal/prng.hpp"

namespace surrocal {

// Islands endogenous-growth model: agents mine homogeneous output on islands
// scattered over an infinite 2-D lattice, explore for new ones, and imitate
// more productive peers reached by decaying signals. The lattice is realized
// lazily from a stateless hash, so no global grid is materialized.
struct IslandParams {
    double rho = 1.0;     // signal decay with Manhattan distance
    double alpha = 1.5;   // extraction exponent (per-miner output s*m^(alpha-1))
    double phi = 0.5;     // cumulative-learning weight in new-island productivity
    double pi = 0.1;      // island density
    double epsilon = 0.1; // per-period miner -> explorer probability
    double lambda = 1.0;  // Poisson mean for radical jumps
    int n_agents = 50;
    int horizon = 1000;

    void validate() const {
        require(rho >= 0.0, "islands: rho must be >= 0");
        require(alpha >= 0.0, "islands: alpha must be >= 0");
        require(phi >= 0.0 && phi <= 1.0, "islands: phi must lie in [0,1]");
        require(pi >= 0.0 && pi <= 1.0, "islands: pi must lie in [0,1]");
        require(epsilon >= 0.0 && epsilon <= 1.0, "islands: epsilon must lie in [0,1]");
        require(lambda >= 0.0, "islands: lambda must be >= 0");
        require(n_agents >= 1, "islands: need at least one agent");
        require(horizon >= 2, "islands: horizon must be >= 2");
    }
};

struct GdpSeries {
    std::vector<double> gdp;
};

struct IslandsTrace {
    std::vector<int> miners, explorers, imitators, islands;
};

// Stateless island draw for node (x,y): hash (seed,x,y) to a uniform variate,
// island iff u < pi. Repeated queries agree by construction.
inline bool realize_node(std::uint64_t seed, std::int64_t x, std::int64_t y, double pi) {
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
                              static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
    const std::uint64_t h = splitmix64(mix_seed(seed ^ 0x15AD5ull, key));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < pi;
}

namespace islands_detail {

inline constexpr double kOmegaHalfWidth = 1.7320508075688772; // sqrt(3): uniform with unit variance
inline constexpr double kProductivityFloor = 1e-12;

enum class Mode : std::uint8_t { miner, explorer, imitator };

struct Agent {
    Mode mode = Mode::miner;
    std::int64_t x = 0, y = 0;
    double memory_q = 0.0;
    int island = 0;     // miners: island currently mined
    int target = -1;    // imitators: destination island
    int departure = -1; // explorers: island left behind (never re-colonized)
};

struct Island {
    std::int64_t x = 0, y = 0;
    double s = 1.0;
};

inline std::uint64_t pack(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
}

} // namespace islands_detail

// One full run. All randomness comes from a single stream seeded by `seed`;
// agents are processed in index order and islands in discovery order, which
// pins the draw sequence:
//   stage 1  one uniform per miner (explore decision)
//   stage 2  one uniform per explorer (direction); on discovery one Poisson
//            inversion draw plus one uniform (productivity noise)
//   stage 3  one uniform per (miner, emitting island != own) pair, miners in
//            index order, islands in discovery order
//   stage 4  imitators step deterministically (x first, then y)
//   stage 5  production, no draws
inline GdpSeries islands_simulate(const IslandParams& p, std::uint64_t seed, IslandsTrace* trace = nullptr) {
    using namespace islands_detail;
    p.validate();

    Rng rng(mix_seed(0x157A5Dull, seed));

    std::vector<Island> islands;
    std::unordered_map<std::uint64_t, int> island_index;
    islands.push_back({0, 0, 1.0}); // the origin starts discovered with s = 1
    island_index.emplace(pack(0, 0), 0);

    std::vector<Agent> agents(static_cast<std::size_t>(p.n_agents));

    auto is_island_node = [&](std::int64_t x, std::int64_t y) {
        if (x == 0 && y == 0) return true;
        return realize_node(seed, x, y, p.pi);
    };

    GdpSeries out;
    out.gdp.reserve(static_cast<std::size_t>(p.horizon));

    std::vector<int> miners_on(islands.size(), 0);

    // exp(-rho*d) memoized per integer Manhattan distance
    std::vector<double> decay{1.0};
    auto signal_decay = [&](std::int64_t d) {
        const auto ud = static_cast<std::size_t>(d);
        while (decay.size() <= ud)
            decay.push_back(std::exp(-p.rho * static_cast<double>(decay.size())));
        return decay[ud];
    };

    for (int t = 1; t <= p.horizon; ++t) {
        // 1. miners consider becoming explorers
        for (auto& a : agents) {
            if (a.mode != Mode::miner) continue;
            const double u = rng.uniform();
            if (u < p.epsilon) {
                a.mode = Mode::explorer;
                a.departure = a.island;
                a.island = -1;
            }
        }

        // 2. explorers sail one step; island nodes other than the departure
        //    island are colonized (drawing productivity if undiscovered)
        for (auto& a : agents) {
            if (a.mode != Mode::explorer) continue;
            const double u = rng.uniform();
            const int dir = static_cast<int>(u * 4.0) & 3;
            switch (dir) {
                case 0: a.x += 1; break;
                case 1: a.x -= 1; break;
                case 2: a.y += 1; break;
                default: a.y -= 1; break;
            }
            if (!is_island_node(a.x, a.y)) continue;
            const std::uint64_t key = pack(a.x, a.y);
            auto it = island_index.find(key);
            int idx;
            if (it == island_index.end()) {
                const double w = static_cast<double>(rng.poisson(p.lambda));
                const double noise = rng.uniform(-kOmegaHalfWidth, kOmegaHalfWidth);
                const double dist = static_cast<double>(std::llabs(a.x) + std::llabs(a.y));
                double s = (1.0 + w) * (dist + p.phi * a.memory_q + noise);
                if (s < kProductivityFloor) s = kProductivityFloor;
                idx = static_cast<int>(islands.size());
                islands.push_back({a.x, a.y, s});
                island_index.emplace(key, idx);
            } else {
                idx = it->second;
            }
            if (idx == a.departure) continue; // keep sailing past the island it left
            a.mode = Mode::miner;
            a.island = idx;
            a.departure = -1;
        }

        // 3. signal diffusion over a snapshot of current miner counts
        miners_on.assign(islands.size(), 0);
        int total_miners = 0;
        for (const auto& a : agents) {
            if (a.mode == Mode::miner) {
                ++miners_on[static_cast<std::size_t>(a.island)];
                ++total_miners;
            }
        }
        if (total_miners > 0) {
            std::vector<int> emitting;
            for (std::size_t j = 0; j < islands.size(); ++j)
                if (miners_on[j] > 0) emitting.push_back(static_cast<int>(j));
            std::vector<double> percap(islands.size(), 0.0);
            for (int j : emitting) {
                const auto js = static_cast<std::size_t>(j);
                percap[js] = islands[js].s *
                             std::pow(static_cast<double>(miners_on[js]), p.alpha - 1.0);
            }
            for (auto& a : agents) {
                if (a.mode != Mode::miner) continue;
                const double own = percap[static_cast<std::size_t>(a.island)];
                int best = -1;
                double best_percap = 0.0;
                std::int64_t best_dist = 0;
                for (int j : emitting) {
                    if (j == a.island) continue;
                    const auto js = static_cast<std::size_t>(j);
                    const std::int64_t dist = std::llabs(a.x - islands[js].x) + std::llabs(a.y - islands[js].y);
                    const double w = static_cast<double>(miners_on[js]) / static_cast<double>(total_miners) *
                                     signal_decay(dist);
                    const double u = rng.uniform();
                    if (u >= w) continue;              // signal not received
                    if (!(percap[js] > own)) continue; // only strictly better islands attract
                    bool take = false;
                    if (best == -1 || percap[js] > best_percap) {
                        take = true;
                    } else if (percap[js] == best_percap) {
                        if (dist < best_dist) {
                            take = true;
                        } else if (dist == best_dist) {
                            const auto& b = islands[static_cast<std::size_t>(best)];
                            take = islands[js].x < b.x ||
                                   (islands[js].x == b.x && islands[js].y < b.y);
                        }
                    }
                    if (take) {
                        best = j;
                        best_percap = percap[js];
                        best_dist = dist;
                    }
                }
                if (best >= 0) {
                    a.mode = Mode::imitator;
                    a.target = best;
                    a.island = -1;
                }
            }
        }

        // 4. imitators travel the shortest Manhattan path, x first
        for (auto& a : agents) {
            if (a.mode != Mode::imitator) continue;
            const auto& isl = islands[static_cast<std::size_t>(a.target)];
            if (a.x != isl.x) a.x += (isl.x > a.x) ? 1 : -1;
            else if (a.y != isl.y) a.y += (isl.y > a.y) ? 1 : -1;
            if (a.x == isl.x && a.y == isl.y) {
                a.mode = Mode::miner;
                a.island = a.target;
                a.target = -1;
            }
        }

        // 5. production; explorers and imitators extract nothing
        miners_on.assign(islands.size(), 0);
        for (const auto& a : agents)
            if (a.mode == Mode::miner) ++miners_on[static_cast<std::size_t>(a.island)];
        double gdp = 0.0;
        for (auto& a : agents) {
            if (a.mode != Mode::miner) continue;
            const auto js = static_cast<std::size_t>(a.island);
            const double q = islands[js].s *
                             std::pow(static_cast<double>(miners_on[js]), p.alpha - 1.0);
            a.memory_q = q;
            gdp += q;
        }
        out.gdp.push_back(gdp);

        if (trace) {
            int nm = 0, ne = 0, ni = 0;
            for (const auto& a : agents) {
                if (a.mode == Mode::miner) ++nm;
                else if (a.mode == Mode::explorer) ++ne;
                else ++ni;
            }
            trace->miners.push_back(nm);
            trace->explorers.push_back(ne);
            trace->imitators.push_back(ni);
            trace->islands.push_back(static_cast<int>(islands.size()));
        }
    }
    return out;
}

// Table 2 explored box; lambda, m0 and T_IS stay fixed.
inline ParameterSpace islands_space() {
    ParameterSpace s;
    s.dims = {
        {"rho", 0.0, 10.0}, {"alpha", 0.8, 2.0}, {"phi", 0.0, 1.0},
        {"pi", 0.0, 1.0},   {"epsilon", 0.0, 1.0},
    };
    s.fixed = {{"lambda", 1.0}, {"m0", 50}, {"horizon", 1000}};
    return s;
}

inline IslandParams islands_params_from_vector(const ParameterSpace& space, const double* v) {
    IslandParams p;
    auto pick = [&](const char* name, double fallback) {
        const int i = space.index_of(name);
        return i >= 0 ? v[i] : space.fixed_value(name, fallback);
    };
    p.rho = pick("rho", 1.0);
    p.alpha = pick("alpha", 1.5);
    p.phi = pick("phi", 0.5);
    p.pi = pick("pi", 0.1);
    p.epsilon = pick("epsilon", 0.1);
    p.lambda = space.fixed_value("lambda", 1.0);
    p.n_agents = static_cast<int>(space.fixed_value("m0", 50));
    p.horizon = static_cast<int>(space.fixed_value("horizon", 1000));
    return p;
}

} // namespace surrocal
