#pragma once

#include <cstddef>
#include <new>
#include <utility>
#include <vector>

namespace hd {

namespace detail {
void* large_allocate(std::size_t bytes);
void large_deallocate(void* p, std::size_t bytes) noexcept;
} // namespace detail

/// Allocator for big index tables: requests transparent huge pages for
/// allocations of a few MiB and up, and default-initialises elements so that
/// resize() does not zero memory that is about to be overwritten.
template <class T>
struct LargeAllocator {
    using value_type = T;

    LargeAllocator() noexcept = default;
    template <class U>
    LargeAllocator(const LargeAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(detail::large_allocate(n * sizeof(T))); }
    void deallocate(T* p, std::size_t n) noexcept { detail::large_deallocate(p, n * sizeof(T)); }

    template <class U>
    void construct(U* p) noexcept {
        ::new (static_cast<void*>(p)) U;
    }
    template <class U, class... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }

    template <class U>
    friend bool operator==(const LargeAllocator&, const LargeAllocator<U>&) noexcept {
        return true;
    }
};

template <class T>
using LargeVector = std::vector<T, LargeAllocator<T>>;

} // namespace hd
