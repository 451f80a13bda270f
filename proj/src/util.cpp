#include "fragpes/util.hpp"

#include <cctype>
#include <thread>

namespace fragpes {

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::size_t worker_count() {
    static const std::size_t cached = [] {
        std::size_t n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
        if (const char* env = std::getenv("FRAGPES_THREADS")) {
            char* end = nullptr;
            long cap = std::strtol(env, &end, 10);
            if (end != env && cap >= 1 && static_cast<std::size_t>(cap) < n)
                n = static_cast<std::size_t>(cap);
        }
        return n;
    }();
    return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn) {
    if (n == 0) return;
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        chunk_fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t step = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * step;
        const std::size_t e = std::min(n, b + step);
        if (b >= e) break;
        pool.emplace_back([&chunk_fn, b, e] { chunk_fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace fragpes
