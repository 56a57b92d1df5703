#include "crossd/detail/parallel.hpp"

#include <atomic>

namespace crossd {

namespace {
std::atomic<unsigned> g_thread_budget{1};
}

void set_thread_budget(unsigned n) { g_thread_budget.store(n == 0 ? 1 : n); }

unsigned thread_budget() { return g_thread_budget.load(); }

}  // namespace crossd
