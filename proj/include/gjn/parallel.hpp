#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gjn
{
    /// Calls fn(i) for i in [0, n) on at most `threads` workers. Callers write results
    /// by index, so output never depends on scheduling. The first exception is rethrown.
    template <class Fn>
    void parallel_for(std::size_t n, unsigned threads, Fn &&fn)
    {
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
        {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
        pool.clear();
        if (error)
            std::rethrow_exception(error);
    }

    inline unsigned default_threads()
    {
        return std::max(1u, std::thread::hardware_concurrency());
    }
} // namespace gjn
