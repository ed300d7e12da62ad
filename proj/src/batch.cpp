#include "cdgain/batch.hpp"

#include "cdgain/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace cdgain {

std::vector<TrialRecord> simulate_batch(const BatchConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.subjects);
    const SimulationSetup setup = cfg.setup();
    std::vector<std::vector<TrialRecord>> per_subject(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const SessionPlan plan =
                    plan_session(static_cast<int>(i), cfg.session.display, cfg.session.seed);
                per_subject[i] = simulate_session(plan, cfg.agent, cfg.session.seed, setup);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        }
    };

    std::size_t jobs = cfg.jobs > 0 ? static_cast<std::size_t>(cfg.jobs)
                                    : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, n);
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
    if (failure)
        std::rethrow_exception(failure);

    std::vector<TrialRecord> out;
    for (auto& s : per_subject) out.insert(out.end(), s.begin(), s.end());
    return out;
}

MethodRun simulate_single(const BatchConfig& cfg) {
    cfg.validate();
    const SessionSettings settings = make_session_settings(cfg.session);
    const auto seed = derive_seed(cfg.session.seed, static_cast<std::uint64_t>(cfg.session.subject) + 1,
                                  static_cast<std::uint64_t>(cfg.session.method), 3);
    return simulate_method(settings, cfg.agent, seed);
}

} // namespace cdgain
