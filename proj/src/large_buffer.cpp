#include "hd/large_buffer.hpp"

#include <cstdlib>

#if defined(__linux__)
#include <sys/mman.h>
#endif

namespace hd::detail {

namespace {
constexpr std::size_t kHugeThreshold = std::size_t{4} << 20;
}

void* large_allocate(std::size_t bytes) {
#if defined(__linux__)
    if (bytes >= kHugeThreshold) {
        void* p = ::mmap(nullptr, bytes, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
        if (p == MAP_FAILED) {
            throw std::bad_alloc();
        }
        ::madvise(p, bytes, MADV_HUGEPAGE);
        return p;
    }
#endif
    return ::operator new(bytes);
}

void large_deallocate(void* p, std::size_t bytes) noexcept {
#if defined(__linux__)
    if (bytes >= kHugeThreshold) {
        ::munmap(p, bytes);
        return;
    }
#endif
    ::operator delete(p);
}

} // namespace hd::detail
