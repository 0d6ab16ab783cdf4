#include "polling/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace polling {

namespace {
std::atomic<int> g_override{0};
}

int thread_count() {
    if (int n = g_override.load(); n > 0) return n;
    if (const char* env = std::getenv("POLLING_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_thread_count(int n) { g_override.store(n > 0 ? n : 0); }

}  // namespace polling
