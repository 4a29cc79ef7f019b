#pragma once

#include <omp.h>

#include <exception>
#include <mutex>

namespace ragdx::detail {

inline int thread_count(int requested) noexcept {
    return requested > 0 ? requested : omp_get_max_threads();
}

/// Exceptions must not escape an OpenMP region; workers park the first one
/// here and the caller rethrows after the loop.
class ErrorSlot {
public:
    template <class F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }

    void rethrow() {
        if (error_) {
            auto e = error_;
            error_ = nullptr;
            std::rethrow_exception(e);
        }
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

}  // namespace ragdx::detail
