#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "revgap/cdf.hpp"
#include "revgap/order_stats.hpp"

namespace revgap {

// Monte Carlo estimate of a mechanism's expected revenue.  std_err is the
// standard error of the mean (sample standard deviation / sqrt(trials)).
// The member is named std_err rather than stderr because stdio reserves
// the latter as a macro.
struct SimResult {
    double mean = 0.0;
    double std_err = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

// Counter-based generator: a 64-bit finalizing hash applied to the
// (seed, trial, draw) counter triple.  Each trial owns an independent
// substream, so a simulation's output is a pure function of (seed, trials)
// and does not depend on how trials are partitioned across threads.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    // Uniform in the open interval (0,1); the +0.5 offset keeps both
    // endpoints unreachable so inverse-CDF sampling never sees 0 or 1.
    double uniform(std::uint64_t trial, std::uint64_t draw) const {
        std::uint64_t key = mix(seed_ + kGolden * (trial + 1));
        std::uint64_t r = mix(key + kGolden * (draw + 1));
        return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
};

namespace detail {

// Runs per_trial(trial) for trial = 0..trials-1 and reduces to mean and
// standard error.  Trials are summed inside fixed-size chunks and the chunk
// sums are reduced in index order, so the floating-point result is identical
// for every thread count.  Each worker thread runs its own copy of the
// callable: scratch state captured by value inside it stays thread-local,
// which the callable must tolerate (trial outputs may not depend on state
// carried over from earlier trials).
template <class PerTrial>
SimResult reduce_trials(PerTrial&& per_trial, std::uint64_t trials,
                        std::uint64_t seed, int threads) {
    if (trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
    if (threads < 1) threads = 1;

    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t num_chunks = (trials + kChunk - 1) / kChunk;
    std::vector<double> sums(num_chunks, 0.0);
    std::vector<double> sqsums(num_chunks, 0.0);

    auto run_chunk = [&](auto& fn, std::uint64_t c) {
        const std::uint64_t lo = c * kChunk;
        const std::uint64_t hi = std::min(trials, lo + kChunk);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t t = lo; t < hi; ++t) {
            const double rev = fn(t);
            s += rev;
            s2 += rev * rev;
        }
        sums[c] = s;
        sqsums[c] = s2;
    };

    if (threads == 1 || num_chunks == 1) {
        for (std::uint64_t c = 0; c < num_chunks; ++c) run_chunk(per_trial, c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        const int workers = static_cast<int>(
            std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), num_chunks));
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, fn = per_trial]() mutable {
                for (;;) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= num_chunks) break;
                    run_chunk(fn, c);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    double sum = 0.0, sqsum = 0.0;
    for (std::uint64_t c = 0; c < num_chunks; ++c) {
        sum += sums[c];
        sqsum += sqsums[c];
    }

    SimResult out;
    out.trials = trials;
    out.seed = seed;
    const double n = static_cast<double>(trials);
    out.mean = sum / n;
    if (trials > 1) {
        const double var = std::max(0.0, (sqsum - n * out.mean * out.mean) / (n - 1.0));
        out.std_err = std::sqrt(var / n);
    }
    return out;
}

inline void draw_bids(const Instance& inst, const CounterRng& rng,
                      std::uint64_t trial, std::vector<double>& bids) {
    const std::size_t n = inst.cdfs.size();
    bids.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        bids[j] = inst.cdfs[j].inverse(rng.uniform(trial, j));
    }
}

}  // namespace detail

// Posts the single price p; each of the up-to-k buyers bidding at least p
// buys one unit.  Ties at b = p count as willing to pay.
inline SimResult simulate_ap(const Instance& inst, double p, std::uint64_t trials,
                             std::uint64_t seed, int threads = 1) {
    validate_instance(inst);
    if (!(p >= 0.0)) throw std::invalid_argument("simulate_ap: price must be >= 0");
    const CounterRng rng(seed);
    const int k = inst.k;
    auto per_trial = [&, bids = std::vector<double>()](std::uint64_t t) mutable {
        detail::draw_bids(inst, rng, t, bids);
        int count = 0;
        for (double b : bids) {
            if (b >= p) ++count;
        }
        return p * static_cast<double>(std::min(count, k));
    };
    return detail::reduce_trials(per_trial, trials, seed, threads);
}

// Simulates the (k+1)-th price auction with anonymous reserve r.  Per
// profile the revenue equals r times the number of top-k bids at or above
// the reserve, plus k times the excess of the (k+1)-th highest bid over r.
inline SimResult simulate_ar(const Instance& inst, double r, std::uint64_t trials,
                             std::uint64_t seed, int threads = 1) {
    validate_instance(inst);
    if (!(r >= 0.0)) throw std::invalid_argument("simulate_ar: reserve must be >= 0");
    const CounterRng rng(seed);
    const int k = inst.k;
    const std::size_t n = inst.cdfs.size();
    auto per_trial = [&, bids = std::vector<double>()](std::uint64_t t) mutable {
        detail::draw_bids(inst, rng, t, bids);
        int count = 0;
        for (double b : bids) {
            if (b >= r) ++count;
        }
        double rev = r * static_cast<double>(std::min(count, k));
        if (n > static_cast<std::size_t>(k)) {
            // (k+1)-th highest bid; bids below it never pay, so a partial
            // selection of the top k+1 entries suffices.
            std::nth_element(bids.begin(), bids.begin() + k, bids.end(),
                             std::greater<double>());
            const double price_setter = bids[static_cast<std::size_t>(k)];
            rev += static_cast<double>(k) * std::max(price_setter - r, 0.0);
        }
        return rev;
    };
    return detail::reduce_trials(per_trial, trials, seed, threads);
}

// Sequential posted pricing: buyer order[j] is offered price prices[j] in
// arrival slot j and buys iff the bid is at least that price and stock
// remains.  No price optimization, evaluation only.
inline SimResult simulate_spm(const Instance& inst, const std::vector<double>& prices,
                              const std::vector<int>& order, std::uint64_t trials,
                              std::uint64_t seed, int threads = 1) {
    validate_instance(inst);
    const std::size_t n = inst.cdfs.size();
    if (prices.size() != n || order.size() != n) {
        throw std::invalid_argument(
            "simulate_spm: prices and order must have one entry per buyer");
    }
    std::vector<char> seen(n, 0);
    for (int j : order) {
        if (j < 0 || static_cast<std::size_t>(j) >= n || seen[static_cast<std::size_t>(j)]) {
            throw std::invalid_argument("simulate_spm: order is not a permutation");
        }
        seen[static_cast<std::size_t>(j)] = 1;
    }
    const CounterRng rng(seed);
    const int k = inst.k;
    auto per_trial = [&, bids = std::vector<double>()](std::uint64_t t) mutable {
        detail::draw_bids(inst, rng, t, bids);
        double rev = 0.0;
        int stock = k;
        for (std::size_t j = 0; j < n && stock > 0; ++j) {
            const auto buyer = static_cast<std::size_t>(order[j]);
            if (bids[buyer] >= prices[j]) {
                rev += prices[j];
                --stock;
            }
        }
        return rev;
    };
    return detail::reduce_trials(per_trial, trials, seed, threads);
}

}  // namespace revgap
