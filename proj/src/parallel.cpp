#include "nsgp/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace nsgp {

std::size_t workers_from_env()
{
    const char* raw = std::getenv("NSGP_WORKERS");
    if (raw == nullptr) return 1;
    std::string_view s(raw);
    std::size_t n = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || n == 0) return 1;
    return n;
}

} // namespace nsgp
