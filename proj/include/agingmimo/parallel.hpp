// SPDX-License-Identifier: Apache-2.0
//
// agingmimo: pilot spacing analysis for MU-MIMO uplink over aging channels
// Copyright (C) 2026 The agingmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef AGINGMIMO_PARALLEL_HPP
#define AGINGMIMO_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace agingmimo
{
    // AGINGMIMO_THREADS overrides the requested count; 0 means hardware concurrency.
    inline unsigned resolve_thread_count(unsigned requested = 0)
    {
        if (const char *env = std::getenv("AGINGMIMO_THREADS"))
        {
            try
            {
                const long v = std::stol(env);
                if (v > 0)
                    requested = static_cast<unsigned>(v);
            }
            catch (const std::exception &)
            {
            }
        }
        if (requested == 0)
            requested = std::max(1u, std::thread::hardware_concurrency());
        return requested;
    }

    // Runs fn(k) for k in [0, n) on up to `threads` workers. Indices are claimed dynamically, so
    // fn must write results into per-index slots for deterministic output. The first exception is rethrown.
    template <typename Fn>
    void parallel_for(std::size_t n, unsigned threads, Fn &&fn)
    {
        if (n == 0)
            return;
        threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
        if (threads == 1)
        {
            for (std::size_t k = 0; k < n; ++k)
                fn(k);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]()
        {
            for (;;)
            {
                const std::size_t k = next.fetch_add(1);
                if (k >= n)
                    return;
                try
                {
                    fn(k);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        };

        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }
}

#endif
