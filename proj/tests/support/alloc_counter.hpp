#ifndef IPQP_TEST_ALLOC_COUNTER_HPP
#define IPQP_TEST_ALLOC_COUNTER_HPP

#include <atomic>
#include <cstddef>

namespace ipqp::testing
{

/// Replaced operator new bumps this while a window is open.
inline std::atomic<bool> g_counting{false};
inline std::atomic<std::size_t> g_allocations{0};

class AllocationWindow
{
public:
    AllocationWindow()
    {
        g_allocations = 0;
        g_counting = true;
    }
    ~AllocationWindow() { g_counting = false; }

    std::size_t count() const { return g_allocations.load(); }
};

} // namespace ipqp::testing

#endif // IPQP_TEST_ALLOC_COUNTER_HPP
