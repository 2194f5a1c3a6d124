#include "mpmdp/simulate.hpp"

#include <algorithm>
#include <random>

#include <gmpxx.h>
#include <json.hpp>

#include "mpmdp/errors.hpp"

namespace mpmdp {

using nlohmann::ordered_json;

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

u128 u128_from_mpz(const mpz_class& z) {
    // z is known to lie in [0, 2^64]; export the at most two 64-bit limbs.
    u128 out = 0;
    size_t count = 0;
    std::vector<std::uint64_t> limbs((mpz_sizeinbase(z.get_mpz_t(), 2) + 63) / 64 + 1, 0);
    mpz_export(limbs.data(), &count, -1, sizeof(std::uint64_t), 0, 0, z.get_mpz_t());
    if (count > 2) throw SolveError("sampler boundary exceeded 128 bits");
    if (count >= 1) out = limbs[0];
    if (count >= 2) out |= static_cast<u128>(limbs[1]) << 64;
    return out;
}

mpz_class mpz_from_i128(i128 v) {
    const bool neg = v < 0;
    u128 mag = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
    mpz_class out = static_cast<unsigned long>(mag >> 64);
    out <<= 64;
    out += static_cast<unsigned long>(mag & ~std::uint64_t(0));
    return neg ? mpz_class(-out) : out;
}

/// Samples an index 0..k-1 from a fixed distribution given 64-bit uniform
/// draws. The boundaries ceil(c*2^64)/floor(c*2^64) decide almost every draw;
/// when the draw's 2^-64 cell straddles a boundary the decision is refined
/// with further draws and exact rational comparisons.
struct ExactSampler {
    std::vector<Rational> cum;  // cumulative probabilities, last is 1
    std::vector<u128> lo;       // floor(cum * 2^64)
    std::vector<u128> hi;       // ceil(cum * 2^64)

    void build(const std::vector<Rational>& probs) {
        Rational c;
        cum.clear();
        lo.clear();
        hi.clear();
        for (const auto& p : probs) {
            c = c + p;
            cum.push_back(c);
            mpz_class scaled_num = c.numerator() << 64;
            mpz_class f, r;
            mpz_fdiv_qr(f.get_mpz_t(), r.get_mpz_t(), scaled_num.get_mpz_t(),
                        c.denominator().get_mpz_t());
            lo.push_back(u128_from_mpz(f));
            hi.push_back(u128_from_mpz(r == 0 ? f : mpz_class(f + 1)));
        }
        if (cum.empty() || cum.back() != Rational(1))
            throw SolveError("sampler built from a distribution that does not sum to 1");
    }

    template <class Rng>
    int sample(Rng& rng) const {
        const std::uint64_t u = rng();
        // First k with u < hi[k] == ceil(cum_k * 2^64), i.e. u/2^64 < cum_k.
        std::size_t k =
            std::lower_bound(hi.begin(), hi.end(), static_cast<u128>(u) + 1) - hi.begin();
        if (static_cast<u128>(u) + 1 <= lo[k]) return static_cast<int>(k);
        // The cell [u, u+1)/2^64 straddles cum_k; refine exactly.
        Rational x(0);
        Rational scale(1);
        const Rational word = Rational(mpq_class(mpz_class(1) << 64));
        {
            mpz_class uz = static_cast<unsigned long>(u >> 32);
            uz <<= 32;
            uz += static_cast<unsigned long>(u & 0xffffffffu);
            x = Rational(mpq_class(uz));
        }
        scale = word;
        while (true) {
            const Rational left = x / scale;
            const Rational right = (x + Rational(1)) / scale;
            // First segment whose upper boundary lies strictly above the cell start.
            std::size_t j = 0;
            while (j + 1 < cum.size() && !(cum[j] > left)) ++j;
            if (cum[j] >= right || j + 1 == cum.size()) return static_cast<int>(j);
            const std::uint64_t v = rng();
            mpz_class vz = static_cast<unsigned long>(v >> 32);
            vz <<= 32;
            vz += static_cast<unsigned long>(v & 0xffffffffu);
            x = x * word + Rational(mpq_class(vz));
            scale = scale * word;
        }
    }
};

} // namespace

SimulationReport simulate(const Mdp& m, const FiniteStrategy& s, const Query& q,
                          const SimulationOptions& options) {
    s.validate(m);
    validate_query(m, q, /*require_exp=*/false);
    if (options.runs <= 0 || options.horizon <= 0)
        throw ValidationError("simulation needs positive run count and horizon");

    const int n = m.dimension;
    const long T = options.horizon;
    const Rational eps = s.epsilon;

    SimulationReport rep;
    rep.runs = options.runs;
    rep.horizon = T;
    rep.seed = options.seed;
    rep.window = T - T / 2;

    rep.sat_thresholds.resize(n);
    for (int i = 0; i < n; ++i) rep.sat_thresholds[i] = q.sat[i] - eps;
    rep.has_joint = q.is_joint() || q.is_conjunctive_joint();
    if (rep.has_joint) {
        const auto& base = q.is_conjunctive_joint() ? q.sat_joint : q.sat;
        rep.joint_thresholds.resize(n);
        for (int i = 0; i < n; ++i) rep.joint_thresholds[i] = base[i] - eps;
    }

    // Entry samplers: joint (memory, action) outcome on entering a state with
    // transient memory; per-mode action samplers; per-action successor samplers.
    const std::size_t S = m.states.size();
    std::vector<ExactSampler> entry(S);
    std::vector<std::vector<std::pair<int, int>>> entry_outcome(S); // (memory, action)
    for (std::size_t st = 0; st < S; ++st) {
        std::vector<Rational> probs;
        for (const auto& [ai, p] : s.transient_next[st]) {
            entry_outcome[st].push_back({0, ai});
            probs.push_back(p);
        }
        for (const auto& [mi, p] : s.switch_to[st]) {
            const auto table = s.mode_next[mi].find(static_cast<int>(st));
            if (table == s.mode_next[mi].end())
                throw ValidationError("strategy switches to " + s.memory[mi].label() +
                                      " at state " + m.states[st] +
                                      " but that mode has no action distribution there");
            for (const auto& [ai, w] : table->second) {
                entry_outcome[st].push_back({mi, ai});
                probs.push_back(p * w);
            }
        }
        entry[st].build(probs);
    }
    std::vector<std::vector<ExactSampler>> mode(s.memory.size(),
                                                std::vector<ExactSampler>(S));
    std::vector<std::vector<std::vector<int>>> mode_outcome(
        s.memory.size(), std::vector<std::vector<int>>(S));
    for (std::size_t mi = 1; mi < s.memory.size(); ++mi) {
        for (const auto& [st, dist] : s.mode_next[mi]) {
            std::vector<Rational> probs;
            for (const auto& [ai, p] : dist) {
                mode_outcome[mi][st].push_back(ai);
                probs.push_back(p);
            }
            mode[mi][st].build(probs);
        }
    }
    std::vector<ExactSampler> succ(m.actions.size());
    std::vector<std::vector<int>> succ_outcome(m.actions.size());
    for (std::size_t ai = 0; ai < m.actions.size(); ++ai) {
        std::vector<Rational> probs;
        for (const auto& [t, p] : m.actions[ai].delta) {
            succ_outcome[ai].push_back(t);
            probs.push_back(p);
        }
        succ[ai].build(probs);
    }

    // Scaled integer rewards: R[i][a] = r_i(a) * L_i with L_i the lcm of the
    // dimension's denominators, so per-run sums stay exact in 128 bits.
    std::vector<mpz_class> lcm(n, 1);
    for (int i = 0; i < n; ++i) {
        for (const auto& a : m.actions)
            mpz_lcm(lcm[i].get_mpz_t(), lcm[i].get_mpz_t(),
                    a.reward[i].denominator().get_mpz_t());
    }
    std::vector<std::vector<i128>> scaled(n, std::vector<i128>(m.actions.size()));
    for (int i = 0; i < n; ++i) {
        for (std::size_t ai = 0; ai < m.actions.size(); ++ai) {
            mpz_class z = m.actions[ai].reward[i].numerator() *
                          (lcm[i] / m.actions[ai].reward[i].denominator());
            mpz_class bound = ::abs(z) * T;
            if (mpz_sizeinbase(bound.get_mpz_t(), 2) > 126)
                throw ValidationError("rewards are too large for exact simulation accumulators");
            const bool neg = z < 0;
            mpz_class mag = ::abs(z);
            mpz_class hi_limb = mag >> 64;
            mpz_class lo_limb = mag - (hi_limb << 64);
            i128 v = static_cast<i128>(
                (static_cast<u128>(hi_limb.get_ui()) << 64) | lo_limb.get_ui());
            scaled[i][ai] = neg ? -v : v;
        }
    }
    // Exact comparison sum/ (L_i * T) >= thr as sum * thr_den >= thr_num * L_i * T.
    std::vector<mpz_class> thr_rhs(n), joint_rhs(n);
    for (int i = 0; i < n; ++i) {
        thr_rhs[i] = rep.sat_thresholds[i].numerator() * lcm[i] * T;
        if (rep.has_joint) joint_rhs[i] = rep.joint_thresholds[i].numerator() * lcm[i] * T;
    }

    std::vector<double> payoff_sum(n, 0.0);
    std::vector<long> sat_count(n, 0);
    long joint_count = 0;
    std::vector<double> freq_sum(m.actions.size(), 0.0);
    std::vector<long> window_count(m.actions.size(), 0);
    std::vector<i128> acc(n);

    for (long run = 0; run < options.runs; ++run) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(options.seed),
                          static_cast<std::uint32_t>(static_cast<std::uint64_t>(run) >> 32),
                          static_cast<std::uint32_t>(run)};
        std::mt19937_64 rng(seq);
        std::fill(acc.begin(), acc.end(), 0);
        std::fill(window_count.begin(), window_count.end(), 0);
        const long window_start = T - rep.window + 1; // steps are 1-based

        int memory = 0;
        int action = -1;
        {
            const int o = entry[m.initial].sample(rng);
            memory = entry_outcome[m.initial][o].first;
            action = entry_outcome[m.initial][o].second;
        }
        for (long step = 1; step <= T; ++step) {
            for (int i = 0; i < n; ++i) acc[i] += scaled[i][action];
            if (step >= window_start) ++window_count[action];
            if (step == T) break;
            const int target = succ_outcome[action][succ[action].sample(rng)];
            if (memory == 0) {
                const int o = entry[target].sample(rng);
                memory = entry_outcome[target][o].first;
                action = entry_outcome[target][o].second;
            } else {
                if (mode_outcome[memory][target].empty())
                    throw ValidationError("strategy can reach state " + m.states[target] +
                                          " in " + s.memory[memory].label() +
                                          " but that mode has no action distribution there");
                action = mode_outcome[memory][target][mode[memory][target].sample(rng)];
            }
        }

        bool joint_ok = rep.has_joint;
        for (int i = 0; i < n; ++i) {
            const mpz_class sum = mpz_from_i128(acc[i]);
            payoff_sum[i] += mpq_class(sum, lcm[i] * T).get_d();
            if (sum * rep.sat_thresholds[i].denominator() >= thr_rhs[i]) ++sat_count[i];
            if (rep.has_joint &&
                !(sum * rep.joint_thresholds[i].denominator() >= joint_rhs[i]))
                joint_ok = false;
        }
        if (joint_ok) ++joint_count;
        for (std::size_t ai = 0; ai < m.actions.size(); ++ai)
            freq_sum[ai] += static_cast<double>(window_count[ai]) / rep.window;
    }

    rep.mean_payoff_average.resize(n);
    rep.sat_rate.resize(n);
    for (int i = 0; i < n; ++i) {
        rep.mean_payoff_average[i] = payoff_sum[i] / options.runs;
        rep.sat_rate[i] = static_cast<double>(sat_count[i]) / options.runs;
    }
    if (rep.has_joint) rep.joint_rate = static_cast<double>(joint_count) / options.runs;
    rep.action_frequency.resize(m.actions.size());
    for (std::size_t ai = 0; ai < m.actions.size(); ++ai)
        rep.action_frequency[ai] = freq_sum[ai] / options.runs;
    return rep;
}

std::string serialize_report(const SimulationReport& r, const Mdp& m) {
    ordered_json doc;
    doc["runs"] = r.runs;
    doc["horizon"] = r.horizon;
    doc["seed"] = r.seed;
    doc["window"] = r.window;
    doc["mean_payoff_average"] = r.mean_payoff_average;
    ordered_json thr = ordered_json::array();
    for (const auto& t : r.sat_thresholds) thr.push_back(t.str());
    doc["sat_thresholds"] = thr;
    doc["sat_rate"] = r.sat_rate;
    if (r.has_joint) {
        ordered_json jt = ordered_json::array();
        for (const auto& t : r.joint_thresholds) jt.push_back(t.str());
        doc["joint_thresholds"] = jt;
        doc["joint_rate"] = r.joint_rate;
    }
    ordered_json freq = ordered_json::object();
    for (std::size_t ai = 0; ai < m.actions.size(); ++ai)
        freq[m.actions[ai].name] = r.action_frequency[ai];
    doc["action_frequency"] = freq;
    return doc.dump(2) + "\n";
}

} // namespace mpmdp
