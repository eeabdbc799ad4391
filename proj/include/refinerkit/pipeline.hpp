#ifndef REFINERKIT_PIPELINE_HPP
#define REFINERKIT_PIPELINE_HPP

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace refinerkit {

// SIGINT sets the returned flag; pipelines poll it between dispatches so
// an interrupted run still emits every record it finished.
const std::atomic<bool>* install_interrupt_handler();

// Runs fn(0..n-1) on up to `workers` threads and hands each result to
// emit in index order.  Dispatch is sequential, so after a stop request
// the started items form a prefix and all of them are emitted.  fn must
// not throw — encode failures in Out.
template <typename Out, typename Fn, typename Emit>
void process_ordered(std::size_t n, int workers, Fn&& fn, Emit&& emit,
                     const std::atomic<bool>* stop = nullptr) {
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            if (stop && stop->load()) break;
            Out out = fn(i);
            emit(i, std::move(out));
        }
        return;
    }

    std::mutex mutex;
    std::condition_variable done;
    std::map<std::size_t, Out> results;
    std::atomic<std::size_t> next{0};
    int active = workers;

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                if (stop && stop->load()) break;
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                Out out = fn(i);
                {
                    std::lock_guard lock(mutex);
                    results.emplace(i, std::move(out));
                }
                done.notify_all();
            }
            {
                std::lock_guard lock(mutex);
                --active;
            }
            done.notify_all();
        });
    }

    std::size_t want = 0;
    while (want < n) {
        std::unique_lock lock(mutex);
        done.wait(lock, [&] { return results.count(want) > 0 || active == 0; });
        auto found = results.find(want);
        if (found == results.end()) break;  // never dispatched: stop requested
        Out out = std::move(found->second);
        results.erase(found);
        lock.unlock();
        emit(want, std::move(out));
        ++want;
    }
    for (auto& worker : pool) worker.join();
}

}  // namespace refinerkit

#endif
